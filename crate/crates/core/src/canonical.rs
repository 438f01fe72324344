//! Canonical-form influence diagrams: built from world tables by adding a
//! causal mapping variable for every responsive chance variable.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::diagram::{Cpt, InfluenceDiagram, NodeKind};
use crate::error::{Error, Result, Violation, ViolationKind};
use crate::mapping::{mapping_from_world, MappingVariable, WorldMapping};
use crate::space::{self, Act, Assignment, Configs};
use crate::worlds::{WorldTable, DEFAULT_CAUSE_SEARCH_LIMIT};

/// Conditional-independence tolerance used when dropping arcs among the
/// unresponsive variables.
pub const CI_TOLERANCE: f64 = 1e-9;

/// Parent spaces up to this size get one explicit row per configuration.
const DENSE_ROW_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDiagram {
    pub diagram: InfluenceDiagram,
    /// Chance nodes responsive to the decisions.
    pub responsive: BTreeSet<String>,
    /// Mapping node id → the mapping variable it carries.
    pub mappings: BTreeMap<String, MappingVariable>,
    /// Decision id → chance id it atomically intervenes on.
    pub interventions: BTreeMap<String, String>,
}

impl CanonicalDiagram {
    /// Wraps a diagram after checking validity and canonical form.
    pub fn new(
        diagram: InfluenceDiagram,
        responsive: BTreeSet<String>,
        mappings: BTreeMap<String, MappingVariable>,
        interventions: BTreeMap<String, String>,
    ) -> Result<Self> {
        let invalid = diagram.validate();
        if !invalid.is_empty() {
            return Err(Error::InvalidDiagram(invalid));
        }
        let mut violations = verify_canonical(&diagram, &responsive);
        for (id, mv) in &mappings {
            match diagram.node(id) {
                Some(n) if n.kind == NodeKind::Chance && n.card() == mv.len() => {}
                _ => violations.push(Violation::new(
                    ViolationKind::UnknownNode,
                    Some(id),
                    "mapping metadata does not match a chance node of the right size",
                )),
            }
        }
        for (d, x) in &interventions {
            let ok = diagram.node(d).is_some_and(|n| n.kind == NodeKind::Decision) && diagram.node(x).is_some();
            if !ok {
                violations.push(Violation::new(
                    ViolationKind::UnknownNode,
                    Some(d),
                    format!("intervention on `{x}` does not name a decision and a node"),
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::NotCanonical(violations));
        }
        Ok(CanonicalDiagram {
            diagram,
            responsive,
            mappings,
            interventions,
        })
    }

    /// Nodes that are descendants of some decision.
    pub fn decision_descendants(&self) -> BTreeSet<String> {
        let roots: Vec<String> = self.diagram.decisions().map(|n| n.id.clone()).collect();
        self.diagram.descendants(&roots).into_iter().collect()
    }

    pub fn decision_ids(&self) -> Vec<String> {
        self.diagram.decisions().map(|n| n.id.clone()).collect()
    }
}

/// Checks both canonical-form clauses: every responsive chance node descends
/// from a decision, and every chance node below a decision is deterministic.
pub fn verify_canonical(d: &InfluenceDiagram, responsive: &BTreeSet<String>) -> Vec<Violation> {
    let mut v = Vec::new();
    let roots: Vec<String> = d.decisions().map(|n| n.id.clone()).collect();
    let below = d.descendants(&roots);
    for id in responsive {
        match d.node(id) {
            None => v.push(Violation::new(ViolationKind::UnknownNode, Some(id), "responsive node does not exist")),
            Some(n) if !matches!(n.kind, NodeKind::Chance | NodeKind::Deterministic) => v.push(Violation::new(
                ViolationKind::UnknownNode,
                Some(id),
                format!("responsive node is a {} node", n.kind.as_str()),
            )),
            Some(_) if !below.contains(id) => v.push(Violation::new(
                ViolationKind::ResponsiveNotDescendant,
                Some(id),
                "responsive chance node is not a descendant of any decision",
            )),
            Some(_) => {}
        }
    }
    for n in d.nodes() {
        if n.kind == NodeKind::Chance && below.contains(&n.id) {
            v.push(Violation::new(
                ViolationKind::DescendantNotDeterministic,
                Some(&n.id),
                "chance node below a decision is not deterministic",
            ));
        }
    }
    v
}

/// Builds a canonical-form diagram from a priced world table.
///
/// `order` lists every chance variable, unresponsive ones first. By default
/// unresponsive variables come first, then responsive ones, each block in
/// declared order.
pub fn to_canonical(table: &WorldTable, order: Option<&[String]>) -> Result<CanonicalDiagram> {
    if !table.is_priced() {
        return Err(Error::Unquantified);
    }
    let responsive: BTreeSet<String> = table.responsive_set().into_iter().collect();
    let order = chance_order(table, &responsive, order)?;
    let nd = table.decisions().len();
    let decisions: Vec<usize> = (0..nd).collect();

    let mut chosen: Vec<(usize, Vec<usize>, WorldMapping)> = Vec::new();
    for (i, &x) in order.iter().enumerate() {
        if !responsive.contains(&table.var(x).id) {
            continue;
        }
        let mut pool = decisions.clone();
        pool.extend(&order[..i]);
        let mut candidates = table.minimal_limiting_sets(x, &pool, DEFAULT_CAUSE_SEARCH_LIMIT)?;
        if !candidates.contains(&decisions) {
            candidates.push(decisions.clone());
        }
        let mut picked = None;
        let mut last_err = None;
        for mut c in candidates {
            c.sort_unstable();
            let ids: Vec<&str> = c.iter().map(|&g| table.var(g).id.as_str()).collect();
            match mapping_from_world(table, [table.var(x).id.as_str()], &ids) {
                Ok(wm) => {
                    picked = Some((c, wm));
                    break;
                }
                Err(e @ (Error::Definedness { .. } | Error::NotAFunction { .. } | Error::TooLarge(_))) => {
                    last_err = Some(e)
                }
                Err(e) => return Err(e),
            }
        }
        let (c, wm) = match picked {
            Some(p) => p,
            None => return Err(last_err.expect("at least one candidate")),
        };
        if table.variable(wm.variable.id()).is_some() {
            return Err(Error::InvalidModel(format!(
                "mapping node id `{}` collides with a variable",
                wm.variable.id()
            )));
        }
        chosen.push((x, c, wm));
    }

    // the unresponsive block: original unresponsive variables, then mapping nodes
    let mut block: Vec<BlockVar> = order
        .iter()
        .filter(|&&x| !responsive.contains(&table.var(x).id))
        .map(|&x| BlockVar {
            id: table.var(x).id.clone(),
            instances: table.var(x).instances.clone(),
        })
        .collect();
    let n_plain = block.len();
    for (_, _, wm) in &chosen {
        block.push(BlockVar {
            id: wm.variable.id().to_owned(),
            instances: wm.variable.instance_names(),
        });
    }
    let mut joint: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for &s in table.possible_states() {
        let sid = table.states()[s].id;
        let mut key: Vec<usize> = order
            .iter()
            .filter(|&&x| !responsive.contains(&table.var(x).id))
            .map(|&x| table.value(s, 0, x))
            .collect();
        key.extend(chosen.iter().map(|(_, _, wm)| wm.for_state(sid).expect("possible state")));
        *joint.entry(key).or_insert(0.0) += table.mass(s);
    }
    debug_assert_eq!(block.len(), n_plain + chosen.len());

    let mut d = InfluenceDiagram::new();
    for v in table.decisions() {
        d.add_decision(&v.id, v.instances.clone());
    }
    let chain = cpt_chain(&block, &joint);
    for (k, (parents, cpt)) in chain.into_iter().enumerate() {
        let ps: Vec<&str> = parents.iter().map(|&p| block[p].id.as_str()).collect();
        d.add_chance(&block[k].id, block[k].instances.clone(), &ps, cpt);
    }
    let mut mappings = BTreeMap::new();
    for (x, c, wm) in chosen {
        let mv = wm.variable;
        let mut parents: Vec<&str> = c.iter().map(|&g| table.var(g).id.as_str()).collect();
        parents.push(mv.id());
        let mut cards: Vec<usize> = c.iter().map(|&g| table.var(g).card()).collect();
        cards.push(mv.len());
        let mut fun = Vec::with_capacity(space::space_size(&cards).unwrap_or(0));
        for cfg in Configs::new(&cards) {
            let (m, args) = cfg.split_last().expect("mapping parent");
            fun.push(mv.apply(*m, args)?);
        }
        let v = table.var(x);
        d.add_deterministic(&v.id, v.instances.clone(), &parents, fun);
        mappings.insert(mv.id().to_owned(), mv);
    }
    let interventions = table
        .atomic_interventions()
        .into_iter()
        .map(|(x, hat)| (hat, x))
        .collect();
    CanonicalDiagram::new(d, responsive, mappings, interventions)
}

fn chance_order(table: &WorldTable, responsive: &BTreeSet<String>, order: Option<&[String]>) -> Result<Vec<usize>> {
    let nd = table.decisions().len();
    let all: Vec<usize> = (nd..table.var_count()).collect();
    let is_resp = |g: usize| responsive.contains(&table.var(g).id);
    let Some(order) = order else {
        let mut out: Vec<usize> = all.iter().copied().filter(|&g| !is_resp(g)).collect();
        out.extend(all.iter().copied().filter(|&g| is_resp(g)));
        return Ok(out);
    };
    let out = table.chance_globals(order)?;
    if out.len() != all.len() || order.len() != all.len() {
        return Err(Error::Input("ordering must list every chance variable exactly once".into()));
    }
    if let Some(w) = out.windows(2).find(|w| is_resp(w[0]) && !is_resp(w[1])) {
        return Err(Error::Input(format!(
            "ordering puts responsive `{}` before unresponsive `{}`",
            table.var(w[0]).id,
            table.var(w[1]).id
        )));
    }
    Ok(out)
}

pub(crate) struct BlockVar {
    pub(crate) id: String,
    pub(crate) instances: Vec<String>,
}

/// Chain-rule factorization of `joint` in block order. Each variable starts
/// with all predecessors as parents; parents are then dropped, latest first,
/// whenever the variable is independent of that parent given the others.
pub(crate) fn cpt_chain(block: &[BlockVar], joint: &BTreeMap<Vec<usize>, f64>) -> Vec<(Vec<usize>, Cpt)> {
    let mut out = Vec::with_capacity(block.len());
    for k in 0..block.len() {
        let mut parents: Vec<usize> = (0..k).collect();
        for p in (0..k).rev() {
            let rest: Vec<usize> = parents.iter().copied().filter(|&q| q != p).collect();
            if independent(joint, k, p, &rest) {
                parents = rest;
            }
        }
        out.push((parents.clone(), conditional(block, joint, k, &parents)));
    }
    out
}

/// `x ⊥ p | z` in `joint`, within the CI tolerance on conditionals.
fn independent(joint: &BTreeMap<Vec<usize>, f64>, x: usize, p: usize, z: &[usize]) -> bool {
    let mut pxz: HashMap<(Vec<usize>, usize, usize), f64> = HashMap::new();
    let mut pz: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut ppz: HashMap<(Vec<usize>, usize), f64> = HashMap::new();
    let mut xz: HashMap<(Vec<usize>, usize), f64> = HashMap::new();
    for (cfg, &m) in joint {
        let zk: Vec<usize> = z.iter().map(|&i| cfg[i]).collect();
        *pxz.entry((zk.clone(), cfg[p], cfg[x])).or_insert(0.0) += m;
        *ppz.entry((zk.clone(), cfg[p])).or_insert(0.0) += m;
        *xz.entry((zk.clone(), cfg[x])).or_insert(0.0) += m;
        *pz.entry(zk).or_insert(0.0) += m;
    }
    // every (z, p) with mass: P(x | p, z) = P(x | z) for every x seen under z
    for ((zk, pv), &mpz) in &ppz {
        let total_z = pz[zk];
        for ((zk2, xv), &mxz) in xz.iter().filter(|((zk2, _), _)| zk2 == zk) {
            let joint_pxz = pxz.get(&(zk2.clone(), *pv, *xv)).copied().unwrap_or(0.0);
            if (joint_pxz / mpz - mxz / total_z).abs() > CI_TOLERANCE {
                return false;
            }
        }
    }
    true
}

fn conditional(block: &[BlockVar], joint: &BTreeMap<Vec<usize>, f64>, k: usize, parents: &[usize]) -> Cpt {
    let cards: Vec<usize> = parents.iter().map(|&p| block[p].instances.len()).collect();
    let card = block[k].instances.len();
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (cfg, &m) in joint {
        let vals: Vec<usize> = parents.iter().map(|&p| cfg[p]).collect();
        let key = space::encode(&vals, &cards);
        rows.entry(key).or_insert_with(|| vec![0.0; card])[cfg[k]] += m;
    }
    for row in rows.values_mut() {
        let total: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    let uniform = vec![1.0 / card as f64; card];
    let configs = space::space_size(&cards).unwrap_or(usize::MAX);
    if configs <= DENSE_ROW_LIMIT {
        Cpt::dense((0..configs).map(|c| rows.get(&c).cloned().unwrap_or_else(|| uniform.clone())).collect())
    } else if rows.len() == configs {
        Cpt::sparse(rows, None)
    } else {
        Cpt::sparse(rows, Some(uniform))
    }
}

/// Largest absolute difference between the diagram's distribution over the
/// table's chance variables and the table's own induced distribution.
pub fn observational_equivalence(table: &WorldTable, cd: &CanonicalDiagram, act: &Act) -> Result<f64> {
    let ids: Vec<String> = table.chances().iter().map(|v| v.id.clone()).collect();
    let want = table.induced_distribution(act, &ids)?;
    if ids.is_empty() {
        return Ok(0.0);
    }
    let got = cd.diagram.infer(act, &Assignment::new(), &ids)?;
    got.max_abs_diff(&want)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn medical_structure() {
        let m = fixtures::medical();
        let cd = to_canonical(&m, None).unwrap();
        let ids: Vec<&str> = cd.diagram.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["r", "t(r)", "c(r)", "t", "c"]);
        assert_eq!(cd.diagram.node("t").unwrap().kind, NodeKind::Deterministic);
        assert_eq!(cd.diagram.node("c").unwrap().parents, ["r", "c(r)"]);
        // t(r) and c(r) are dependent under the uniform prior
        assert_eq!(cd.diagram.node("c(r)").unwrap().parents, ["t(r)"]);
        for act in m.acts() {
            assert!(observational_equivalence(&m, &cd, &act).unwrap() < 1e-9);
        }
    }

    #[test]
    fn genotype_structure() {
        let m = fixtures::medical_g();
        let cd = to_canonical(&m, None).unwrap();
        let node = |id: &str| cd.diagram.node(id).unwrap();
        assert_eq!(node("t(r,t_hat)").parents, ["g"]);
        assert_eq!(node("c(t)").parents, ["g"]);
        assert_eq!(node("t").parents, ["r", "t_hat", "t(r,t_hat)"]);
        assert_eq!(node("c").parents, ["t", "c(t)"]);
        assert_eq!(node("t(r,t_hat)").card(), 4);
        assert_eq!(cd.interventions.get("t_hat").map(String::as_str), Some("t"));
        for act in m.acts() {
            assert!(observational_equivalence(&m, &cd, &act).unwrap() < 1e-9);
        }
    }

    #[test]
    fn coin_round_trip() {
        let c = fixtures::coin();
        let cd = to_canonical(&c, None).unwrap();
        for act in c.acts() {
            assert!(observational_equivalence(&c, &cd, &act).unwrap() < 1e-9);
            let w = cd.diagram.infer(&act, &Assignment::new(), &["w"]).unwrap();
            assert!((w.prob(&[("w".to_string(), "win".to_string())].into()).unwrap() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn unresponsive_table_gets_no_mapping_nodes() {
        let t = WorldTable::builder()
            .decision("d", ["a", "b"])
            .chance("x", ["0", "1"])
            .state(1, None, crate::worlds::Prior::Mass(0.25), [["0"], ["0"]])
            .state(2, None, crate::worlds::Prior::Mass(0.75), [["1"], ["1"]])
            .build()
            .unwrap();
        let cd = to_canonical(&t, None).unwrap();
        assert!(cd.mappings.is_empty());
        assert!(cd.decision_descendants().is_empty());
        assert_eq!(cd.diagram.nodes().len(), 2);
    }

    #[test]
    fn order_is_checked_and_priors_required() {
        let m = fixtures::medical_g();
        let bad = ["t".to_string(), "g".to_string(), "c".to_string()];
        assert!(matches!(to_canonical(&m, Some(&bad)), Err(Error::Input(_))));
        let good = ["g".to_string(), "t".to_string(), "c".to_string()];
        assert!(to_canonical(&m, Some(&good)).is_ok());
        assert_eq!(to_canonical(&fixtures::smoking(), None), Err(Error::Unquantified));
    }

    #[test]
    fn figure_3a_is_not_canonical() {
        let mut d = InfluenceDiagram::new();
        d.add_decision("r", ["take", "dont_take"])
            .add_chance("t", ["yes", "no"], &["r"], Cpt::dense(vec![vec![0.8, 0.2], vec![0.3, 0.7]]))
            .add_chance("c", ["yes", "no"], &["t"], Cpt::dense(vec![vec![0.6, 0.4], vec![0.2, 0.8]]));
        let resp: BTreeSet<String> = ["t".to_string(), "c".to_string()].into();
        let v = verify_canonical(&d, &resp);
        assert!(v.iter().any(|v| v.kind == ViolationKind::DescendantNotDeterministic));

        let mut free = InfluenceDiagram::new();
        free.add_chance("x", ["0", "1"], &[], Cpt::prior(vec![0.5, 0.5]));
        assert!(verify_canonical(&free, &BTreeSet::new()).is_empty());
        let resp: BTreeSet<String> = ["x".to_string()].into();
        assert!(verify_canonical(&free, &resp)
            .iter()
            .any(|v| v.kind == ViolationKind::ResponsiveNotDescendant));
    }
}
