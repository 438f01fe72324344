//! Random models and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dcause::diagram::{Cpt, InfluenceDiagram, NodeKind};
use dcause::sem::StructuralEquationModel;
use dcause::space::{self, Configs};
use dcause::{Act, Assignment, Prior, Variable, WorldState, WorldTable};
use rand::seq::SliceRandom;
use rand::Rng;

pub const TOL: f64 = 1e-9;

/// Decision shapes with at most six acts.
const ACT_SHAPES: [&[usize]; 6] = [&[2], &[3], &[2, 2], &[2, 3], &[3, 2], &[6]];

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// How a chance variable's outcome is drawn.
enum Rule {
    /// Fixed by the state.
    Exogenous,
    /// Free per state and act.
    Free,
    /// A fixed function of an earlier chance variable and a state-level value.
    Derived { from: usize, table: Vec<Vec<usize>> },
}

/// A world table with at most six acts, four chance variables of two or
/// three instances, and at most `max_states` states. Priced tables get a
/// random prior with some zero-mass states.
pub fn random_table<R: Rng>(rng: &mut R, priced: bool, max_states: usize) -> WorldTable {
    random_table_with(rng, priced, max_states, 3)
}

/// As `random_table`, with at most `max_card` instances per variable.
pub fn random_table_with<R: Rng>(rng: &mut R, priced: bool, max_states: usize, max_card: usize) -> WorldTable {
    let shapes: Vec<&[usize]> = ACT_SHAPES.iter().copied().filter(|s| s.iter().all(|&c| c <= max_card)).collect();
    let shape = shapes[rng.gen_range(0..shapes.len())];
    let decisions: Vec<Variable> = shape
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::decision(format!("d{i}"), names("a", c)))
        .collect();
    let n_acts: usize = shape.iter().product();
    let n_chance = rng.gen_range(1..=4);
    let cards: Vec<usize> = (0..n_chance).map(|_| rng.gen_range(2..=max_card.max(2))).collect();
    let chances: Vec<Variable> = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::chance(format!("x{i}"), names("v", c)))
        .collect();
    let rules: Vec<Rule> = (0..n_chance)
        .map(|j| match rng.gen_range(0..3) {
            0 => Rule::Exogenous,
            2 if j > 0 => {
                let from = rng.gen_range(0..j);
                let table = (0..cards[j])
                    .map(|_| (0..cards[from]).map(|_| rng.gen_range(0..cards[j])).collect())
                    .collect();
                Rule::Derived { from, table }
            }
            _ => Rule::Free,
        })
        .collect();
    let n_states = rng.gen_range(1..=max_states.max(1));
    let mut weights: Vec<f64> = (0..n_states)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights[0] = 1.0;
    }
    let total: f64 = weights.iter().sum();
    let mut flags: Vec<bool> = (0..n_states).map(|_| rng.gen_bool(0.8)).collect();
    flags[0] = true;
    let states = (0..n_states)
        .map(|s| {
            let fixed: Vec<usize> = cards.iter().map(|&c| rng.gen_range(0..c)).collect();
            let outcomes = (0..n_acts)
                .map(|_| {
                    let mut row: Vec<usize> = Vec::with_capacity(n_chance);
                    for j in 0..n_chance {
                        let v = match &rules[j] {
                            Rule::Exogenous => fixed[j],
                            Rule::Free => rng.gen_range(0..cards[j]),
                            Rule::Derived { from, table } => table[fixed[j]][row[*from]],
                        };
                        row.push(v);
                    }
                    row
                })
                .collect();
            WorldState {
                id: s as u32 + 1,
                label: None,
                prior: if priced {
                    Prior::Mass(weights[s] / total)
                } else {
                    Prior::Possible(flags[s])
                },
                outcomes,
            }
        })
        .collect();
    WorldTable::new(decisions, chances, states).expect("generated table is valid")
}

pub fn all_ids(t: &WorldTable) -> Vec<String> {
    t.decisions().iter().chain(t.chances()).map(|v| v.id.clone()).collect()
}

pub fn chance_ids(t: &WorldTable) -> Vec<String> {
    t.chances().iter().map(|v| v.id.clone()).collect()
}

pub fn decision_ids(t: &WorldTable) -> Vec<String> {
    t.decisions().iter().map(|v| v.id.clone()).collect()
}

/// A random subset, in declared order.
pub fn subset<R: Rng>(rng: &mut R, ids: &[String]) -> Vec<String> {
    ids.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

/// Instance index of `id` in state `s` under act index `a`, read off the raw rows.
pub fn value(t: &WorldTable, s: usize, a: usize, id: &str) -> usize {
    if let Some(k) = t.decisions().iter().position(|v| v.id == id) {
        let act = t.act_at(a);
        let inst = act.get(id).expect("complete act");
        return t.decisions()[k].index_of(inst).expect("valid act");
    }
    let j = t.chances().iter().position(|v| v.id == id).expect("known id");
    t.states()[s].outcomes[a][j]
}

pub fn possible(t: &WorldTable) -> Vec<usize> {
    (0..t.states().len()).filter(|&s| t.states()[s].prior.is_possible()).collect()
}

/// Limited unresponsiveness straight from its definition.
pub fn oracle_unresponsive(t: &WorldTable, x: &[String], y: &[String]) -> bool {
    let n = t.act_count();
    possible(t).into_iter().all(|s| {
        (0..n).all(|a| {
            (0..n).all(|b| {
                let same_y = y.iter().all(|v| value(t, s, a, v) == value(t, s, b, v));
                !same_y || x.iter().all(|v| value(t, s, a, v) == value(t, s, b, v))
            })
        })
    })
}

/// Distribution over `vars` under act index `a`, by summing state priors.
pub fn oracle_induced(t: &WorldTable, a: usize, vars: &[String]) -> BTreeMap<Vec<usize>, f64> {
    let mut out = BTreeMap::new();
    for (s, st) in t.states().iter().enumerate() {
        if let Prior::Mass(p) = st.prior {
            if p > 0.0 {
                let key: Vec<usize> = vars.iter().map(|v| value(t, s, a, v)).collect();
                *out.entry(key).or_insert(0.0) += p;
            }
        }
    }
    out
}

/// All subsets `C` of the other variables that make `x` unresponsive in
/// states limited by `C`, keeping the minimal ones.
pub fn oracle_causes(t: &WorldTable, x: &str) -> BTreeSet<BTreeSet<String>> {
    let pool: Vec<String> = all_ids(t).into_iter().filter(|v| v != x).collect();
    let mut good: Vec<BTreeSet<String>> = Vec::new();
    for mask in 0u32..(1 << pool.len()) {
        let c: Vec<String> = (0..pool.len()).filter(|i| mask & (1 << i) != 0).map(|i| pool[i].clone()).collect();
        if oracle_unresponsive(t, &[x.to_owned()], &c) {
            good.push(c.into_iter().collect());
        }
    }
    good.iter()
        .filter(|c| !good.iter().any(|o| o != *c && o.is_subset(c)))
        .cloned()
        .collect()
}

/// Counterfactual distribution by state enumeration: condition the prior on
/// the factual act and evidence, then read `query` under the cf act.
pub fn oracle_counterfactual(
    t: &WorldTable,
    factual: usize,
    evidence: &Assignment,
    cf: usize,
    query: &[String],
) -> Option<BTreeMap<Assignment, f64>> {
    let mut out = BTreeMap::new();
    let mut z = 0.0;
    for (s, st) in t.states().iter().enumerate() {
        let Prior::Mass(p) = st.prior else { continue };
        if p == 0.0 {
            continue;
        }
        let ok = evidence.iter().all(|(k, v)| {
            let var = t.variable(k).expect("known");
            var.instances[value(t, s, factual, k)] == *v
        });
        if !ok {
            continue;
        }
        z += p;
        let key: Assignment = query
            .iter()
            .map(|q| (q.clone(), t.variable(q).unwrap().instances[value(t, s, cf, q)].clone()))
            .collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    (z > 0.0).then(|| out.into_iter().map(|(k, p)| (k, p / z)).collect())
}

/// Evidence taken from one state of positive prior, so it is possible.
pub fn possible_evidence<R: Rng>(rng: &mut R, t: &WorldTable, act: usize, vars: &[String]) -> Assignment {
    let live: Vec<usize> = (0..t.states().len())
        .filter(|&s| matches!(t.states()[s].prior, Prior::Mass(p) if p > 0.0))
        .collect();
    let s = *live.choose(rng).expect("some state has mass");
    vars.iter()
        .map(|v| (v.clone(), t.variable(v).unwrap().instances[value(t, s, act, v)].clone()))
        .collect()
}

pub fn act_index_of(t: &WorldTable, act: &Act) -> usize {
    t.act_index(act).expect("valid act")
}

/// Random diagram with `n` nodes of two or three instances: one decision,
/// then chance and deterministic nodes with up to two earlier parents.
pub fn random_diagram<R: Rng>(rng: &mut R, n: usize) -> InfluenceDiagram {
    let mut d = InfluenceDiagram::new();
    let mut made: Vec<(String, usize)> = Vec::new();
    let dc = rng.gen_range(2..=3);
    d.add_decision("n0", names("s", dc));
    made.push(("n0".into(), dc));
    for i in 1..n {
        let id = format!("n{i}");
        let card = rng.gen_range(2..=3);
        let k = rng.gen_range(0..=made.len().min(2));
        let mut parents: Vec<(String, usize)> = made.choose_multiple(rng, k).cloned().collect();
        parents.sort();
        let configs: usize = parents.iter().map(|p| p.1).product();
        let pids: Vec<&str> = parents.iter().map(|p| p.0.as_str()).collect();
        if rng.gen_bool(0.3) {
            let table = (0..configs).map(|_| rng.gen_range(0..card)).collect();
            d.add_deterministic(&id, names("s", card), &pids, table);
        } else {
            let rows = (0..configs)
                .map(|_| {
                    let w: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let z: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / z).collect()
                })
                .collect();
            d.add_chance(&id, names("s", card), &pids, Cpt::dense(rows));
        }
        made.push((id, card));
    }
    d
}

/// Distribution over the non-hidden variables of a structural model under
/// an act, by running every combination of block outcomes through the
/// equations.
pub fn oracle_sem(m: &StructuralEquationModel, act: &Act) -> BTreeMap<Assignment, f64> {
    let full = m.intervention_act(act).expect("valid act");
    let vars = m.variables();
    let mut worlds: Vec<(BTreeMap<String, usize>, f64)> = vec![(BTreeMap::new(), 1.0)];
    for b in m.blocks() {
        let mut next = Vec::new();
        for (eps, p) in &worlds {
            for (vals, q) in &b.joint {
                let mut e = eps.clone();
                for (id, &v) in b.members.iter().zip(vals) {
                    e.insert(id.clone(), v);
                }
                next.push((e, p * q));
            }
        }
        worlds = next;
    }
    let mut out = BTreeMap::new();
    for (eps, p) in worlds {
        if p == 0.0 {
            continue;
        }
        let mut val: BTreeMap<&str, usize> = BTreeMap::new();
        while val.len() < vars.len() {
            for v in vars {
                if val.contains_key(v.id.as_str()) || !v.parents.iter().all(|q| val.contains_key(q.as_str())) {
                    continue;
                }
                let hat = v.intervention_instances();
                let h = hat.iter().position(|x| x == full.get(&v.intervention).unwrap()).unwrap();
                let mut cfg: Vec<usize> = v.parents.iter().map(|q| val[q.as_str()]).collect();
                let mut cards: Vec<usize> = v
                    .parents
                    .iter()
                    .map(|q| m.variable(q).unwrap().instances.len())
                    .collect();
                cfg.push(h);
                cards.push(hat.len());
                if let Some(e) = &v.disturbance {
                    cfg.push(eps[e]);
                    cards.push(m.disturbance(e).unwrap().instances.len());
                }
                val.insert(&v.id, v.equation[space::encode(&cfg, &cards)]);
            }
        }
        let key: Assignment = vars
            .iter()
            .filter(|v| !v.hidden)
            .map(|v| (v.id.clone(), v.instances[val[v.id.as_str()]].clone()))
            .collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

/// Joint over every chance and deterministic node of a diagram under an
/// act, by summing products of table entries over all configurations.
pub fn oracle_joint(d: &InfluenceDiagram, act: &Act) -> BTreeMap<Assignment, f64> {
    let nodes: Vec<_> = d
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Chance | NodeKind::Deterministic))
        .collect();
    let cards: Vec<usize> = nodes.iter().map(|n| n.card()).collect();
    let mut out = BTreeMap::new();
    for cfg in Configs::new(&cards) {
        let mut named: BTreeMap<&str, usize> = nodes.iter().zip(&cfg).map(|(n, &v)| (n.id.as_str(), v)).collect();
        for n in d.decisions() {
            named.insert(&n.id, n.index_of(act.get(&n.id).unwrap()).unwrap());
        }
        let mut p = 1.0;
        for n in &nodes {
            let pcfg: Vec<usize> = n.parents.iter().map(|q| named[q.as_str()]).collect();
            let pc: Vec<usize> = n.parents.iter().map(|q| d.node(q).unwrap().card()).collect();
            let k = space::encode(&pcfg, &pc);
            let x = named[n.id.as_str()];
            p *= match n.kind {
                NodeKind::Deterministic => f64::from(u8::from(d.function(&n.id).unwrap()[k] == x)),
                _ => d.cpt(&n.id).unwrap().row(k).map_or(0.0, |r| r[x]),
            };
            if p == 0.0 {
                break;
            }
        }
        if p > 0.0 {
            let key: Assignment = nodes
                .iter()
                .zip(&cfg)
                .map(|(n, &v)| (n.id.clone(), n.instances[v].clone()))
                .collect();
            out.insert(key, p);
        }
    }
    out
}

/// Largest gap between two named distributions.
pub fn max_gap(a: &BTreeMap<Assignment, f64>, b: &BTreeMap<Assignment, f64>) -> f64 {
    let mut worst = 0.0f64;
    for (k, p) in a {
        worst = worst.max((p - b.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            worst = worst.max(q.abs());
        }
    }
    worst
}

/// A library distribution as a map of named assignments, with trailing
/// primes stripped from variable names.
pub fn named(d: &dcause::Distribution) -> BTreeMap<Assignment, f64> {
    d.entries()
        .map(|(a, p)| (a.into_iter().map(|(k, v)| (k.trim_end_matches('\'').to_owned(), v)).collect(), p))
        .collect()
}
