//! Regenerates the bundled model files: `cargo run --example gen_fixtures [dir]`.

use std::path::PathBuf;

use dcause::canonical::to_canonical;
use dcause::fixtures;
use dcause::format::{self, Model};
use dcause::sem::{from_canonical, from_canonical_functional};

fn main() -> dcause::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir).map_err(|e| dcause::Error::Input(e.to_string()))?;

    let genotype = to_canonical(&fixtures::medical_g(), None)?;
    let mut smoking = to_canonical(&fixtures::smoking_priced([0.3, 0.4, 0.2, 0.1]), None)?;
    smoking.diagram.add_utility("u", &["s", "l"], vec![0.0, 10.0, -2.0, 8.0]);

    let files: Vec<(&str, Model)> = vec![
        ("omelet.world.json", fixtures::omelet().into()),
        ("smoking.world.json", fixtures::smoking().into()),
        ("medical.world.json", fixtures::medical().into()),
        ("medical_flags.world.json", fixtures::medical_flags().into()),
        ("medical_g.world.json", fixtures::medical_g().into()),
        ("coin.world.json", fixtures::coin().into()),
        ("medical.canonical.json", to_canonical(&fixtures::medical(), None)?.into()),
        ("medical_g.sem.json", from_canonical(&genotype)?.into()),
        ("medical_g.functional.json", from_canonical_functional(&genotype, &["g".to_owned()])?.into()),
        ("medical_g.canonical.json", genotype.into()),
        ("smoking_voi.canonical.json", smoking.into()),
    ];
    for (name, model) in files {
        format::write(&dir.join(name), &model)?;
        println!("{}", dir.join(name).display());
    }
    Ok(())
}
