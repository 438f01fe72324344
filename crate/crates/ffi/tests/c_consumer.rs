use std::path::{Path, PathBuf};
use std::process::Command;

/// Directory holding the library artifacts of the running build.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler `{cc}` found; C consumer not built");
        return;
    }
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libdcause_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = std::env::temp_dir().join(format!("dcause-smoke-{}", std::process::id()));
    let status = Command::new(&cc)
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(here.join("include"))
        .arg(here.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "compiling the C consumer failed");
    let out = Command::new(&exe).arg(here.join("../core/fixtures")).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), format!("ok {}", env!("CARGO_PKG_VERSION")));
}
