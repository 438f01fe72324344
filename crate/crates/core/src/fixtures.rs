//! Built-in example problems: the omelet, smoking, medical-treatment and
//! coin-betting stories, plus extended medical tables with an atomic
//! intervention on `t` and a genotype variable `g`.

use crate::space::IDLE;
use crate::worlds::{Prior, WorldTable};

const YES_NO: [&str; 2] = ["yes", "no"];

pub fn omelet() -> WorldTable {
    WorldTable::builder()
        .decision("a", ["break_into_bowl", "break_into_saucer", "throw_away"])
        .chance("o", ["zero", "five", "six"])
        .chance("g", ["zero", "one", "five"])
        .chance("s", ["no", "yes"])
        .state(
            1,
            Some("good egg"),
            Prior::Possible(true),
            [["six", "zero", "no"], ["six", "zero", "yes"], ["five", "one", "no"]],
        )
        .state(
            2,
            Some("bad egg"),
            Prior::Possible(true),
            [["zero", "five", "no"], ["five", "zero", "yes"], ["five", "zero", "no"]],
        )
        .build()
        .expect("omelet table is valid")
}

pub fn smoking() -> WorldTable {
    let rows = [
        ["cancer", "no_cancer"],
        ["no_cancer", "no_cancer"],
        ["cancer", "cancer"],
        ["no_cancer", "cancer"],
    ];
    let mut b = WorldTable::builder()
        .decision("s", ["continue", "quit"])
        .chance("l", ["cancer", "no_cancer"]);
    for (i, r) in rows.iter().enumerate() {
        b = b.state(i as u32 + 1, None, Prior::Possible(true), [[r[0]], [r[1]]]);
    }
    b.build().expect("smoking table is valid")
}

/// Smoking table with priors over its four states, in state order.
pub fn smoking_priced(priors: [f64; 4]) -> WorldTable {
    let base = smoking();
    let mut b = WorldTable::builder()
        .decision("s", ["continue", "quit"])
        .chance("l", ["cancer", "no_cancer"]);
    for (s, p) in base.states().iter().zip(priors) {
        let rows: Vec<[&str; 1]> = s.outcomes.iter().map(|r| [base.chances()[0].instances[r[0]].as_str()]).collect();
        b = b.state(s.id, None, Prior::Mass(p), rows);
    }
    b.build().expect("smoking table is valid")
}

const MEDICAL_ROWS: [(&str, [&str; 4]); 16] = [
    ("complier, helped", ["yes", "yes", "no", "no"]),
    ("complier, hurt", ["yes", "no", "no", "yes"]),
    ("complier, always cured", ["yes", "yes", "no", "yes"]),
    ("complier, never cured", ["yes", "no", "no", "no"]),
    ("defier, helped", ["no", "no", "yes", "yes"]),
    ("defier, hurt", ["no", "yes", "yes", "no"]),
    ("defier, always cured", ["no", "yes", "yes", "yes"]),
    ("defier, never cured", ["no", "no", "yes", "no"]),
    ("always taker, cured", ["yes", "yes", "yes", "yes"]),
    ("always taker, not cured", ["yes", "no", "yes", "no"]),
    ("never taker, not cured", ["no", "no", "no", "no"]),
    ("never taker, cured", ["no", "yes", "no", "yes"]),
    ("impossible", ["yes", "yes", "yes", "no"]),
    ("impossible", ["yes", "no", "yes", "yes"]),
    ("impossible", ["no", "no", "no", "yes"]),
    ("impossible", ["no", "yes", "no", "no"]),
];

/// The medical-treatment table with a uniform prior over its twelve
/// possible states and zero on the four impossible ones.
pub fn medical() -> WorldTable {
    medical_with_priors(&[1.0 / 12.0; 12])
}

/// The medical-treatment table with the given priors on states 1–12.
pub fn medical_with_priors(priors: &[f64; 12]) -> WorldTable {
    let mut b = WorldTable::builder()
        .decision("r", ["take", "dont_take"])
        .chance("t", YES_NO)
        .chance("c", YES_NO);
    for (i, (label, r)) in MEDICAL_ROWS.iter().enumerate() {
        let p = priors.get(i).copied().unwrap_or(0.0);
        b = b.state(i as u32 + 1, Some(label), Prior::Mass(p), [[r[0], r[1]], [r[2], r[3]]]);
    }
    b.build().expect("medical table is valid")
}

/// Flag-only medical table: states 13–16 impossible.
pub fn medical_flags() -> WorldTable {
    let mut b = WorldTable::builder()
        .decision("r", ["take", "dont_take"])
        .chance("t", YES_NO)
        .chance("c", YES_NO);
    for (i, (label, r)) in MEDICAL_ROWS.iter().enumerate() {
        b = b.state(i as u32 + 1, Some(label), Prior::Possible(i < 12), [[r[0], r[1]], [r[2], r[3]]]);
    }
    b.build().expect("medical table is valid")
}

const T_TYPES: [(&str, [&str; 2]); 4] = [
    ("complier", ["yes", "no"]),
    ("defier", ["no", "yes"]),
    ("always taker", ["yes", "yes"]),
    ("never taker", ["no", "no"]),
];

const C_TYPES: [(&str, [&str; 2]); 4] = [
    ("helped", ["yes", "no"]),
    ("hurt", ["no", "yes"]),
    ("always cured", ["yes", "yes"]),
    ("never cured", ["no", "no"]),
];

const T_HAT: [&str; 3] = [IDLE, "set:yes", "set:no"];

fn override_rows(t_type: usize, c_type: usize, broken: bool) -> Vec<Vec<&'static str>> {
    let mut rows = Vec::with_capacity(6);
    for r in 0..2 {
        for (h, hat) in T_HAT.iter().enumerate() {
            let mut t = match *hat {
                "set:yes" => "yes",
                "set:no" => "no",
                _ => T_TYPES[t_type].1[r],
            };
            if broken && h == 1 {
                t = "no";
            }
            let c = C_TYPES[c_type].1[if t == "yes" { 0 } else { 1 }];
            rows.push(vec![t, c]);
        }
    }
    rows
}

/// Medical table over `D = {r, t_hat}` where `t_hat` is an atomic
/// intervention on `t`; sixteen states, one per (t(r), c(t)) pair, uniform.
/// With `broken`, `t_hat = set:yes` fails to force `t` in state 1.
pub fn medical_with_override(broken: bool) -> WorldTable {
    let mut b = WorldTable::builder()
        .decision("r", ["take", "dont_take"])
        .decision("t_hat", T_HAT)
        .chance("t", YES_NO)
        .chance("c", YES_NO);
    let mut id = 1;
    for (ti, t_type) in T_TYPES.iter().enumerate() {
        for (ci, c_type) in C_TYPES.iter().enumerate() {
            let label = format!("{}, {}", t_type.0, c_type.0);
            b = b.state(
                id,
                Some(&label),
                Prior::Mass(1.0 / 16.0),
                override_rows(ti, ci, broken && id == 1),
            );
            id += 1;
        }
    }
    b.build().expect("medical table is valid")
}

const G_PRIOR: [f64; 2] = [0.4, 0.6];
const T_GIVEN_G: [[f64; 4]; 2] = [[0.5, 0.1, 0.2, 0.2], [0.2, 0.2, 0.3, 0.3]];
const C_GIVEN_G: [[f64; 4]; 2] = [[0.4, 0.1, 0.3, 0.2], [0.1, 0.3, 0.2, 0.4]];

/// Medical table with genotype `g` and `t_hat`: thirty-two states, with the
/// responses of `t` and `c` conditionally independent given `g`.
pub fn medical_g() -> WorldTable {
    let mut b = WorldTable::builder()
        .decision("r", ["take", "dont_take"])
        .decision("t_hat", T_HAT)
        .chance("g", ["a", "b"])
        .chance("t", YES_NO)
        .chance("c", YES_NO);
    let mut id = 1;
    for (gi, g) in ["a", "b"].iter().enumerate() {
        for ti in 0..4 {
            for ci in 0..4 {
                let p = G_PRIOR[gi] * T_GIVEN_G[gi][ti] * C_GIVEN_G[gi][ci];
                let rows: Vec<Vec<&str>> = override_rows(ti, ci, false)
                    .into_iter()
                    .map(|r| vec![*g, r[0], r[1]])
                    .collect();
                let label = format!("g={g}, {}, {}", T_TYPES[ti].0, C_TYPES[ci].0);
                b = b.state(id, Some(&label), Prior::Mass(p), rows);
                id += 1;
            }
        }
    }
    b.build().expect("medical table is valid")
}

/// Betting on a fair coin: `w` (win?) and `m` (match?) given bet `b`.
pub fn coin() -> WorldTable {
    WorldTable::builder()
        .decision("b", ["heads", "tails"])
        .chance("w", ["win", "lose"])
        .chance("m", ["yes", "no"])
        .state(1, Some("heads"), Prior::Mass(0.5), [["win", "yes"], ["lose", "no"]])
        .state(2, Some("tails"), Prior::Mass(0.5), [["lose", "no"], ["win", "yes"]])
        .build()
        .expect("coin table is valid")
}
