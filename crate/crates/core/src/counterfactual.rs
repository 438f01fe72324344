//! Counterfactual queries answered on twin diagrams: decisions and the nodes
//! responsive to them are copied once per counterfactual world, while the
//! unresponsive nodes (mapping nodes included) are shared by every copy.

use std::collections::BTreeSet;

use crate::canonical::{verify_canonical, CanonicalDiagram};
use crate::diagram::{InfluenceDiagram, Node, NodeKind};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::space::{Act, Assignment};

/// Which decisions get copied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TwinMode {
    /// Only decisions whose counterfactual value differs, and what they reach.
    #[default]
    Minimal,
    /// Every decision and every responsive node.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualWorld {
    /// Partial act; decisions it leaves out keep their factual value.
    pub act: Act,
    pub evidence: Assignment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualQuery {
    pub factual_act: Act,
    pub factual_evidence: Assignment,
    /// One entry per counterfactual world, in order.
    pub worlds: Vec<CounterfactualWorld>,
    /// Variables read in the last world. An id with `k` trailing primes is
    /// read in world `k` instead.
    pub query: Vec<String>,
}

impl CounterfactualQuery {
    /// Single-world query.
    pub fn new<S: Into<String>>(
        factual_act: Act,
        factual_evidence: Assignment,
        cf_act: Act,
        cf_evidence: Assignment,
        query: impl IntoIterator<Item = S>,
    ) -> Self {
        CounterfactualQuery {
            factual_act,
            factual_evidence,
            worlds: vec![CounterfactualWorld {
                act: cf_act,
                evidence: cf_evidence,
            }],
            query: query.into_iter().map(Into::into).collect(),
        }
    }

    /// Adds a further counterfactual world.
    pub fn with_world(mut self, act: Act, evidence: Assignment) -> Self {
        self.worlds.push(CounterfactualWorld { act, evidence });
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinDiagram {
    pub base: CanonicalDiagram,
    pub diagram: InfluenceDiagram,
    /// Number of counterfactual copies.
    pub worlds: usize,
    /// Base ids of the duplicated nodes.
    pub duplicated: BTreeSet<String>,
}

/// `id` with `world` primes.
pub fn primed(id: &str, world: usize) -> String {
    let mut s = String::with_capacity(id.len() + world);
    s.push_str(id);
    s.extend(std::iter::repeat_n('\'', world));
    s
}

/// Splits trailing primes off an id.
fn unprime(id: &str) -> (&str, usize) {
    let base = id.trim_end_matches('\'');
    (base, id.len() - base.len())
}

impl TwinDiagram {
    /// Id of base node `id` as seen from `world` (0 is the factual world).
    pub fn id_in(&self, id: &str, world: usize) -> Option<String> {
        self.base.diagram.node(id)?;
        Some(if world > 0 && self.duplicated.contains(id) {
            primed(id, world)
        } else {
            id.to_owned()
        })
    }

    /// Ids of the copies, in diagram order.
    pub fn primed(&self) -> Vec<String> {
        self.diagram.nodes()[self.base.diagram.nodes().len()..]
            .iter()
            .map(|n| n.id.clone())
            .collect()
    }

    /// Unresponsive nodes, present once and feeding every copy.
    pub fn shared(&self) -> Vec<String> {
        let below = self.base.decision_descendants();
        self.base
            .diagram
            .nodes()
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Chance | NodeKind::Deterministic) && !below.contains(&n.id))
            .map(|n| n.id.clone())
            .collect()
    }
}

fn check_form(cd: &CanonicalDiagram) -> Result<()> {
    let invalid = cd.diagram.validate();
    if !invalid.is_empty() {
        return Err(Error::InvalidDiagram(invalid));
    }
    let bad = verify_canonical(&cd.diagram, &cd.responsive);
    if !bad.is_empty() {
        return Err(Error::NotCanonical(bad));
    }
    Ok(())
}

/// Two-world twin diagram. With `changed`, only those decisions and their
/// descendants are copied; otherwise every decision and responsive node is.
pub fn build_twin(cd: &CanonicalDiagram, changed: Option<&[String]>) -> Result<TwinDiagram> {
    build_worlds(cd, 1, changed)
}

/// Twin diagram with `worlds` counterfactual copies.
pub fn build_worlds(cd: &CanonicalDiagram, worlds: usize, changed: Option<&[String]>) -> Result<TwinDiagram> {
    check_form(cd)?;
    let roots: Vec<String> = match changed {
        None => cd.decision_ids(),
        Some(c) => {
            for id in c {
                match cd.diagram.node(id) {
                    Some(n) if n.kind == NodeKind::Decision => {}
                    Some(_) => return Err(Error::Input(format!("`{id}` is not a decision"))),
                    None => return Err(Error::UnknownVariable(id.clone())),
                }
            }
            c.to_vec()
        }
    };
    assemble(cd, worlds, closure(&cd.diagram, roots))
}

/// `roots` plus every non-utility node they reach.
fn closure(d: &InfluenceDiagram, roots: Vec<String>) -> BTreeSet<String> {
    let below = d.descendants(&roots);
    let mut out: BTreeSet<String> = roots.into_iter().collect();
    out.extend(
        below
            .into_iter()
            .filter(|id| d.node(id).is_some_and(|n| n.kind != NodeKind::Utility)),
    );
    out
}

fn assemble(cd: &CanonicalDiagram, worlds: usize, duplicated: BTreeSet<String>) -> Result<TwinDiagram> {
    let base = &cd.diagram;
    let mut d = base.clone();
    for w in 1..=worlds {
        for n in base.nodes().iter().filter(|n| duplicated.contains(&n.id)) {
            let id = primed(&n.id, w);
            if base.node(&id).is_some() {
                return Err(Error::InvalidModel(format!("copy `{id}` collides with an existing node")));
            }
            let parents: Vec<String> = n
                .parents
                .iter()
                .map(|p| if duplicated.contains(p) { primed(p, w) } else { p.clone() })
                .collect();
            d.add_node(Node {
                id: id.clone(),
                kind: n.kind,
                instances: n.instances.clone(),
                parents,
            });
            if let Some(cpt) = base.cpt(&n.id) {
                d.set_cpt(&id, cpt.clone());
            }
            if let Some(f) = base.function(&n.id) {
                d.set_function(&id, f.to_vec());
            }
        }
    }
    Ok(TwinDiagram {
        base: cd.clone(),
        diagram: d,
        worlds,
        duplicated,
    })
}

/// Posterior over the query variables, on the minimal twin.
pub fn evaluate(cd: &CanonicalDiagram, q: &CounterfactualQuery) -> Result<Distribution> {
    evaluate_with(cd, q, TwinMode::Minimal)
}

pub fn evaluate_with(cd: &CanonicalDiagram, q: &CounterfactualQuery, mode: TwinMode) -> Result<Distribution> {
    check_form(cd)?;
    if q.query.is_empty() {
        return Err(Error::Input("counterfactual query names no variables".into()));
    }
    if q.worlds.is_empty() {
        return Err(Error::Input("counterfactual query has no counterfactual act".into()));
    }
    let d = &cd.diagram;
    let decisions = cd.decision_ids();
    for (k, _) in q.factual_act.iter() {
        if !decisions.iter().any(|id| id == k) {
            return Err(Error::UnknownVariable(k.to_owned()));
        }
    }
    for w in &q.worlds {
        for (k, v) in w.act.iter() {
            let n = d
                .node(k)
                .filter(|n| n.kind == NodeKind::Decision)
                .ok_or_else(|| Error::UnknownVariable(k.to_owned()))?;
            if n.index_of(v).is_none() {
                return Err(Error::UnknownInstance {
                    variable: k.to_owned(),
                    instance: v.to_owned(),
                });
            }
        }
    }
    let k = q.worlds.len();
    let world_of = |id: &str, default: usize| -> Result<(String, usize)> {
        let (base, primes) = unprime(id);
        if d.node(base).is_none() || primes > k {
            return Err(Error::UnknownVariable(id.to_owned()));
        }
        Ok((base.to_owned(), if primes > 0 { primes } else { default }))
    };

    let roots: Vec<String> = match mode {
        TwinMode::Full => decisions.clone(),
        TwinMode::Minimal => {
            let mut roots: Vec<String> = decisions
                .iter()
                .filter(|id| {
                    let f = q.factual_act.get(id);
                    q.worlds.iter().any(|w| w.act.get(id).is_some_and(|v| Some(v) != f))
                })
                .cloned()
                .collect();
            // explicitly primed references widen the copied set
            let named = q
                .query
                .iter()
                .chain(q.worlds.iter().flat_map(|w| w.evidence.keys()))
                .filter(|id| unprime(id).1 > 0);
            let below = cd.decision_descendants();
            for id in named {
                let (base, _) = world_of(id, k)?;
                let n = d.node(&base).expect("checked");
                if n.kind == NodeKind::Decision {
                    roots.push(base);
                } else if below.contains(&base) {
                    roots.extend(decisions.iter().filter(|dec| d.descendants(&[dec.as_str()]).contains(&base)).cloned());
                }
            }
            roots.sort();
            roots.dedup();
            roots
        }
    };
    let twin = assemble(cd, k, closure(d, roots))?;

    let mut act = q.factual_act.clone();
    for (w, world) in q.worlds.iter().enumerate() {
        for id in &twin.duplicated {
            if d.node(id).is_some_and(|n| n.kind == NodeKind::Decision) {
                let v = world
                    .act
                    .get(id)
                    .or_else(|| q.factual_act.get(id))
                    .ok_or_else(|| Error::Input(format!("act gives no value for decision `{id}`")))?;
                act.insert(primed(id, w + 1), v);
            }
        }
    }
    let mut evidence = Assignment::new();
    let mut add = |id: String, v: &String| -> Result<()> {
        match evidence.get(&id) {
            Some(prev) if prev != v => Err(Error::ImpossibleEvidence),
            _ => {
                evidence.insert(id, v.clone());
                Ok(())
            }
        }
    };
    for (id, v) in &q.factual_evidence {
        if d.node(id).is_none() {
            return Err(Error::UnknownVariable(id.clone()));
        }
        add(id.clone(), v)?;
    }
    for (w, world) in q.worlds.iter().enumerate() {
        for (id, v) in &world.evidence {
            let (base, at) = world_of(id, w + 1)?;
            add(twin.id_in(&base, at).expect("known"), v)?;
        }
    }
    let query: Vec<String> = q
        .query
        .iter()
        .map(|id| {
            let (base, at) = world_of(id, k)?;
            Ok(twin.id_in(&base, at).expect("known"))
        })
        .collect::<Result<_>>()?;
    twin.diagram.infer(&act, &evidence, &query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::to_canonical;
    use crate::fixtures;

    fn a(pairs: &[(&str, &str)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn genotype_twin_structure() {
        let cd = to_canonical(&fixtures::medical_g(), None).unwrap();
        let full = build_twin(&cd, None).unwrap();
        assert_eq!(full.primed(), ["r'", "t_hat'", "t'", "c'"]);
        assert_eq!(full.shared(), ["g", "t(r,t_hat)", "c(t)"]);
        let min = build_twin(&cd, Some(&["r".to_owned()])).unwrap();
        assert_eq!(min.primed(), ["r'", "t'", "c'"]);
        let none = build_twin(&cd, Some(&[])).unwrap();
        assert!(none.primed().is_empty());
        assert_eq!(none.diagram, cd.diagram);
        let t = full.diagram.node("t'").unwrap();
        assert_eq!(t.parents, ["r'", "t_hat'", "t(r,t_hat)"]);
        assert_eq!(full.diagram.function("t'"), cd.diagram.function("t"));
    }

    #[test]
    fn treated_and_cured_patient() {
        let cd = to_canonical(&fixtures::medical(), None).unwrap();
        let q = CounterfactualQuery::new(
            Act::new().with("r", "take"),
            a(&[("t", "yes"), ("c", "yes")]),
            Act::new().with("r", "dont_take"),
            Assignment::new(),
            ["c"],
        );
        let p = evaluate(&cd, &q).unwrap().prob(&a(&[("c'", "yes")])).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        let full = evaluate_with(&cd, &q, TwinMode::Full).unwrap();
        assert!((full.prob(&a(&[("c'", "yes")])).unwrap() - p).abs() < 1e-12);
    }

    #[test]
    fn same_act_reproduces_factual_posterior() {
        let cd = to_canonical(&fixtures::medical(), None).unwrap();
        let act = Act::new().with("r", "take");
        let ev = a(&[("c", "no")]);
        let q = CounterfactualQuery::new(act.clone(), ev.clone(), act.clone(), Assignment::new(), ["t'"]);
        let cf = evaluate(&cd, &q).unwrap();
        let base = cd.diagram.infer(&act, &ev, &["t"]).unwrap();
        for v in ["yes", "no"] {
            let x = cf.prob(&a(&[("t'", v)])).unwrap();
            let y = base.prob(&a(&[("t", v)])).unwrap();
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn three_worlds_and_impossible_evidence() {
        let cd = to_canonical(&fixtures::medical(), None).unwrap();
        let q = CounterfactualQuery::new(
            Act::new().with("r", "take"),
            a(&[("c", "yes")]),
            Act::new().with("r", "dont_take"),
            a(&[("c", "yes")]),
            ["c''"],
        )
        .with_world(Act::new().with("r", "take"), Assignment::new());
        // back in the factual act the patient is cured again
        let p = evaluate(&cd, &q).unwrap().prob(&a(&[("c''", "yes")])).unwrap();
        assert!((p - 1.0).abs() < 1e-12);

        let bad = CounterfactualQuery::new(
            Act::new().with("r", "take"),
            a(&[("t", "yes"), ("c", "yes")]),
            Act::new().with("r", "take"),
            a(&[("c", "no")]),
            ["c"],
        );
        assert!(matches!(evaluate_with(&cd, &bad, TwinMode::Full), Err(Error::ImpossibleEvidence)));
        assert!(matches!(evaluate(&cd, &bad), Err(Error::ImpossibleEvidence)));
    }
}
