//! Structural equation models. Every domain variable is a function of its
//! parents, its atomic intervention and at most one disturbance; the
//! disturbances are grouped into mutually independent blocks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::canonical::{cpt_chain, verify_canonical, BlockVar, CanonicalDiagram};
use crate::diagram::{InfluenceDiagram, Node, NodeKind, MAX_TABLE_CONFIGS};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::mapping::{MappedVar, MappingVariable, MAX_MAPPING_INSTANCES};
use crate::space::{self, Act, Configs, IDLE};

const MASS_TOLERANCE: f64 = 1e-9;

/// Probabilities keyed by instance indices.
type Joint = HashMap<Vec<usize>, f64>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SemMode {
    /// Every disturbance is independent of every other.
    #[default]
    Independent,
    /// Disturbances may depend on each other within a block.
    Functional,
}

impl SemMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SemMode::Independent => "sem",
            SemMode::Functional => "functional",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemVariable {
    pub id: String,
    pub instances: Vec<String>,
    pub parents: Vec<String>,
    /// Id of the atomic intervention on this variable.
    pub intervention: String,
    /// A decision in disguise: its intervention is never idle.
    pub idle_forbidden: bool,
    pub disturbance: Option<String>,
    /// Instance index at every configuration of (parents, intervention,
    /// disturbance), first most significant.
    pub equation: Vec<usize>,
    /// Latent common cause standing in for a dependent block.
    pub hidden: bool,
}

impl SemVariable {
    pub fn intervention_instances(&self) -> Vec<String> {
        space::intervention_instances(&self.instances)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disturbance {
    pub id: String,
    pub instances: Vec<String>,
}

/// Joint distribution of some disturbances; keys are instance indices in
/// member order.
#[derive(Clone, Debug, PartialEq)]
pub struct DisturbanceBlock {
    pub members: Vec<String>,
    pub joint: BTreeMap<Vec<usize>, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuralEquationModel {
    mode: SemMode,
    variables: Vec<SemVariable>,
    disturbances: Vec<Disturbance>,
    blocks: Vec<DisturbanceBlock>,
}

fn check_instances(id: &str, instances: &[String]) -> Result<()> {
    if instances.is_empty() {
        return Err(Error::InvalidModel(format!("`{id}` has no instances")));
    }
    let mut seen = HashSet::new();
    for i in instances {
        if !seen.insert(i) {
            return Err(Error::InvalidModel(format!("`{id}` lists instance `{i}` twice")));
        }
    }
    Ok(())
}

impl StructuralEquationModel {
    /// Checks the model and puts the variables in topological order.
    pub fn new(
        mode: SemMode,
        variables: Vec<SemVariable>,
        disturbances: Vec<Disturbance>,
        blocks: Vec<DisturbanceBlock>,
    ) -> Result<Self> {
        let mut m = StructuralEquationModel {
            mode,
            variables,
            disturbances,
            blocks,
        };
        let order = m.check()?;
        let mut vars: Vec<Option<SemVariable>> = std::mem::take(&mut m.variables).into_iter().map(Some).collect();
        m.variables = order.into_iter().map(|i| vars[i].take().expect("each index once")).collect();
        Ok(m)
    }

    pub fn mode(&self) -> SemMode {
        self.mode
    }

    pub fn variables(&self) -> &[SemVariable] {
        &self.variables
    }

    pub fn disturbances(&self) -> &[Disturbance] {
        &self.disturbances
    }

    pub fn blocks(&self) -> &[DisturbanceBlock] {
        &self.blocks
    }

    pub fn variable(&self, id: &str) -> Option<&SemVariable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn disturbance(&self, id: &str) -> Option<&Disturbance> {
        self.disturbances.iter().find(|e| e.id == id)
    }

    /// Domain variables that are neither hidden nor decisions in disguise.
    pub fn domain_ids(&self) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| !v.hidden && !v.idle_forbidden)
            .map(|v| v.id.as_str())
            .collect()
    }

    fn equation_cards(&self, v: &SemVariable) -> Vec<usize> {
        let mut cards: Vec<usize> = v
            .parents
            .iter()
            .map(|p| self.variable(p).map_or(0, |pv| pv.instances.len()))
            .collect();
        cards.push(v.instances.len() + 1);
        if let Some(e) = &v.disturbance {
            cards.push(self.disturbance(e).map_or(0, |d| d.instances.len()));
        }
        cards
    }

    /// Validates and returns a topological order of the variables.
    fn check(&self) -> Result<Vec<usize>> {
        let mut ids = HashSet::new();
        let dup = |id: &str| Error::InvalidModel(format!("id `{id}` is used twice"));
        for v in &self.variables {
            if !ids.insert(v.id.as_str()) {
                return Err(dup(&v.id));
            }
            if !ids.insert(v.intervention.as_str()) {
                return Err(dup(&v.intervention));
            }
        }
        for e in &self.disturbances {
            if !ids.insert(e.id.as_str()) {
                return Err(dup(&e.id));
            }
            check_instances(&e.id, &e.instances)?;
        }
        let pos: HashMap<&str, usize> = self.variables.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for v in &self.variables {
            check_instances(&v.id, &v.instances)?;
            let mut seen = HashSet::new();
            for p in &v.parents {
                if !pos.contains_key(p.as_str()) {
                    return Err(Error::InvalidModel(format!("`{}` has unknown parent `{p}`", v.id)));
                }
                if p == &v.id || !seen.insert(p) {
                    return Err(Error::InvalidModel(format!("`{}` lists parent `{p}` badly", v.id)));
                }
            }
            if let Some(e) = &v.disturbance {
                if self.disturbance(e).is_none() {
                    return Err(Error::InvalidModel(format!("`{}` has unknown disturbance `{e}`", v.id)));
                }
                if owner.insert(e, &v.id).is_some() {
                    return Err(Error::InvalidModel(format!("disturbance `{e}` drives more than one variable")));
                }
            }
            if v.idle_forbidden && (!v.parents.is_empty() || v.disturbance.is_some() || v.hidden) {
                return Err(Error::InvalidModel(format!(
                    "decision `{}` cannot have parents, a disturbance or be hidden",
                    v.id
                )));
            }
            let cards = self.equation_cards(v);
            let size = space::space_size(&cards)
                .filter(|&s| s <= MAX_TABLE_CONFIGS)
                .ok_or_else(|| Error::TooLarge(format!("equation of `{}` is too large", v.id)))?;
            if v.equation.len() != size {
                return Err(Error::InvalidModel(format!(
                    "equation of `{}` has {} entries, expected {size}",
                    v.id,
                    v.equation.len()
                )));
            }
            let hat = v.parents.len();
            let hats = v.intervention_instances();
            for (k, cfg) in Configs::new(&cards).enumerate() {
                if v.equation[k] >= v.instances.len() {
                    return Err(Error::InvalidModel(format!("equation of `{}` names instance {}", v.id, v.equation[k])));
                }
                if cfg[hat] > 0 && v.equation[k] != cfg[hat] - 1 {
                    return Err(Error::InvalidModel(format!(
                        "equation of `{}` is not overridden by `{}={}`",
                        v.id, v.intervention, hats[cfg[hat]]
                    )));
                }
            }
        }
        for e in &self.disturbances {
            if !owner.contains_key(e.id.as_str()) {
                return Err(Error::InvalidModel(format!("disturbance `{}` drives no variable", e.id)));
            }
        }
        let mut placed = HashSet::new();
        for b in &self.blocks {
            if b.members.is_empty() {
                return Err(Error::InvalidModel("empty disturbance block".into()));
            }
            if self.mode == SemMode::Independent && b.members.len() != 1 {
                return Err(Error::InvalidModel(format!(
                    "independent model groups {} disturbances in one block",
                    b.members.len()
                )));
            }
            let mut cards = Vec::new();
            for m in &b.members {
                let e = self
                    .disturbance(m)
                    .ok_or_else(|| Error::InvalidModel(format!("block names unknown disturbance `{m}`")))?;
                if !placed.insert(m.as_str()) {
                    return Err(Error::InvalidModel(format!("disturbance `{m}` is in two blocks")));
                }
                cards.push(e.instances.len());
            }
            let mut total = 0.0;
            for (k, &p) in &b.joint {
                if k.len() != cards.len() || k.iter().zip(&cards).any(|(&v, &c)| v >= c) {
                    return Err(Error::InvalidModel(format!("bad key {k:?} in block of `{}`", b.members[0])));
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidModel(format!("bad probability {p} in block of `{}`", b.members[0])));
                }
                total += p;
            }
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "block of `{}` sums to {total}, not 1",
                    b.members[0]
                )));
            }
        }
        if let Some(e) = self.disturbances.iter().find(|e| !placed.contains(e.id.as_str())) {
            return Err(Error::InvalidModel(format!("disturbance `{}` is in no block", e.id)));
        }
        // Kahn, lowest index first
        let n = self.variables.len();
        let mut indeg: Vec<usize> = self.variables.iter().map(|v| v.parents.len()).collect();
        let mut children = vec![Vec::new(); n];
        for (i, v) in self.variables.iter().enumerate() {
            for p in &v.parents {
                children[pos[p.as_str()]].push(i);
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &c in &children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidModel("structural equations are cyclic".into()));
        }
        Ok(order)
    }

    /// Total act over every intervention. Keys may be intervention ids or
    /// the ids of decisions in disguise; unnamed interventions are idle.
    pub fn intervention_act(&self, act: &Act) -> Result<Act> {
        let mut out = Act::new();
        for (k, val) in act.iter() {
            let (hat, symbol) = if let Some(v) = self.variables.iter().find(|v| v.id == k && v.idle_forbidden) {
                if !v.instances.iter().any(|i| i == val) {
                    return Err(Error::UnknownInstance {
                        variable: k.to_owned(),
                        instance: val.to_owned(),
                    });
                }
                (v.intervention.as_str(), space::set_instance(val))
            } else if let Some(v) = self.variables.iter().find(|v| v.intervention == k) {
                if !v.intervention_instances().iter().any(|i| i == val) {
                    return Err(Error::UnknownInstance {
                        variable: k.to_owned(),
                        instance: val.to_owned(),
                    });
                }
                if v.idle_forbidden && val == IDLE {
                    return Err(Error::Input(format!("`{k}` cannot be idle")));
                }
                (k, val.to_owned())
            } else {
                return Err(Error::UnknownVariable(k.to_owned()));
            };
            if out.get(hat).is_some_and(|prev| prev != symbol) {
                return Err(Error::Input(format!("conflicting values for `{hat}`")));
            }
            out.insert(hat, symbol);
        }
        for v in &self.variables {
            if out.get(&v.intervention).is_none() {
                if v.idle_forbidden {
                    return Err(Error::Input(format!("act gives no value for decision `{}`", v.id)));
                }
                out.insert(v.intervention.clone(), IDLE);
            }
        }
        Ok(out)
    }

    /// The same act over the decisions of the equivalent canonical diagram.
    pub fn diagram_act(&self, act: &Act) -> Result<Act> {
        let full = self.intervention_act(act)?;
        Ok(self
            .variables
            .iter()
            .map(|v| {
                let sym = full.get(&v.intervention).expect("total");
                if v.idle_forbidden {
                    (v.id.clone(), space::parse_set(sym).expect("never idle").to_owned())
                } else {
                    (v.intervention.clone(), sym.to_owned())
                }
            })
            .collect())
    }

    /// Distribution of `query` under `act`, summing over every combination
    /// of block outcomes.
    pub fn distribution<S: AsRef<str>>(&self, act: &Act, query: &[S]) -> Result<Distribution> {
        let full = self.intervention_act(act)?;
        let pos: HashMap<&str, usize> = self.variables.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let q: Vec<usize> = query
            .iter()
            .map(|s| pos.get(s.as_ref()).copied().ok_or_else(|| Error::UnknownVariable(s.as_ref().to_owned())))
            .collect::<Result<_>>()?;
        let hat_vals: Vec<usize> = self
            .variables
            .iter()
            .map(|v| {
                let sym = full.get(&v.intervention).expect("total");
                v.intervention_instances().iter().position(|i| i == sym).expect("checked")
            })
            .collect();
        let parents: Vec<Vec<usize>> = self
            .variables
            .iter()
            .map(|v| v.parents.iter().map(|p| pos[p.as_str()]).collect())
            .collect();
        let cards: Vec<Vec<usize>> = self.variables.iter().map(|v| self.equation_cards(v)).collect();
        // disturbance id -> (block, member)
        let mut slot: HashMap<&str, (usize, usize)> = HashMap::new();
        for (b, blk) in self.blocks.iter().enumerate() {
            for (j, m) in blk.members.iter().enumerate() {
                slot.insert(m.as_str(), (b, j));
            }
        }
        let eps: Vec<Option<(usize, usize)>> = self
            .variables
            .iter()
            .map(|v| v.disturbance.as_deref().map(|e| slot[e]))
            .collect();
        let supports: Vec<Vec<(&Vec<usize>, f64)>> = self
            .blocks
            .iter()
            .map(|b| b.joint.iter().filter(|(_, &p)| p > 0.0).map(|(k, &p)| (k, p)).collect())
            .collect();
        let lens: Vec<usize> = supports.iter().map(Vec::len).collect();
        let mut masses: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut vals = vec![0usize; self.variables.len()];
        for pick in Configs::new(&lens) {
            let mass: f64 = pick.iter().enumerate().map(|(b, &k)| supports[b][k].1).product();
            for (i, v) in self.variables.iter().enumerate() {
                let mut cfg: Vec<usize> = parents[i].iter().map(|&p| vals[p]).collect();
                cfg.push(hat_vals[i]);
                if let Some((b, j)) = eps[i] {
                    cfg.push(supports[b][pick[b]].0[j]);
                }
                vals[i] = v.equation[space::encode(&cfg, &cards[i])];
            }
            *masses.entry(q.iter().map(|&i| vals[i]).collect()).or_insert(0.0) += mass;
        }
        Ok(Distribution::new(
            q.iter().map(|&i| self.variables[i].id.clone()).collect(),
            q.iter().map(|&i| self.variables[i].instances.clone()).collect(),
            masses,
        ))
    }
}

/// Per-node and total counts of independent probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamCount {
    pub per_node: Vec<(String, usize)>,
    pub total: usize,
}

impl ParamCount {
    fn from_parts(per_node: Vec<(String, usize)>) -> Self {
        let total = per_node.iter().fold(0usize, |a, (_, n)| a.saturating_add(*n));
        ParamCount { per_node, total }
    }
}

/// `(k - 1)` times the number of parent configurations, for every chance node.
pub fn parameter_count_diagram(d: &InfluenceDiagram) -> ParamCount {
    let per_node = d
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Chance)
        .map(|n| {
            let configs = d
                .parent_cards(&n.id)
                .and_then(|c| space::space_size(&c))
                .unwrap_or(usize::MAX);
            (n.id.clone(), n.card().saturating_sub(1).saturating_mul(configs))
        })
        .collect();
    ParamCount::from_parts(per_node)
}

/// One less than the size of each block's joint space.
pub fn parameter_count_sem(m: &StructuralEquationModel) -> ParamCount {
    let per_node = m
        .blocks
        .iter()
        .map(|b| {
            let size = b
                .members
                .iter()
                .map(|e| m.disturbance(e).map_or(0, |d| d.instances.len()))
                .fold(1usize, usize::saturating_mul);
            let ids: Vec<&str> = b.members.iter().map(String::as_str).collect();
            (space::joint_label(&ids), size.saturating_sub(1))
        })
        .collect();
    ParamCount::from_parts(per_node)
}

/// Equation table of a single-target mapping over (args, disturbance).
fn equation_from_mapping(mv: &MappingVariable) -> Result<Vec<usize>> {
    let mut cards: Vec<usize> = mv.args().iter().map(|a| a.instances.len()).collect();
    cards.push(mv.len());
    let tables: Vec<Vec<usize>> = (0..mv.len()).map(|i| mv.table(i)).collect::<Result<_>>()?;
    let mut eq = Vec::with_capacity(space::space_size(&cards).unwrap_or(0));
    for cfg in Configs::new(&cards) {
        let (args, e) = cfg.split_at(cfg.len() - 1);
        eq.push(match mv.locate(args) {
            Ok(p) => tables[e[0]][p],
            Err(forced) => forced,
        });
    }
    Ok(eq)
}

struct Hidden {
    id: String,
    members: Vec<String>,
    cards: Vec<usize>,
}

/// Shared state while converting a canonical diagram.
struct Builder<'a> {
    d: &'a InfluenceDiagram,
    topo: Vec<&'a Node>,
    below: BTreeSet<String>,
    /// Responsive node → decision registered as its atomic intervention.
    hat_of: BTreeMap<String, String>,
    hats: BTreeSet<String>,
    mapping: BTreeSet<String>,
    used: HashSet<String>,
    vars: Vec<SemVariable>,
    dists: Vec<Disturbance>,
}

impl<'a> Builder<'a> {
    fn new(cd: &'a CanonicalDiagram) -> Result<Self> {
        let d = &cd.diagram;
        let bad = verify_canonical(d, &cd.responsive);
        if !bad.is_empty() {
            return Err(Error::NotCanonical(bad));
        }
        let topo = d
            .topological_order()?
            .into_iter()
            .map(|i| &d.nodes()[i])
            .filter(|n| n.kind != NodeKind::Utility)
            .collect();
        let below = cd.decision_descendants();
        let mut hat_of = BTreeMap::new();
        for (dec, x) in &cd.interventions {
            let dn = d.node(dec).filter(|n| n.kind == NodeKind::Decision);
            let xn = d.node(x).filter(|n| n.kind == NodeKind::Deterministic && below.contains(x));
            let (Some(dn), Some(xn)) = (dn, xn) else {
                return Err(Error::Form(format!(
                    "`{dec}` is not a decision intervening on a responsive node `{x}`"
                )));
            };
            if dn.instances != space::intervention_instances(&xn.instances) {
                return Err(Error::Form(format!("`{dec}` does not have the instances of an intervention on `{x}`")));
            }
            let kids: Vec<&str> = d
                .children(dec)
                .into_iter()
                .filter(|n| n.kind != NodeKind::Utility)
                .map(|n| n.id.as_str())
                .collect();
            if kids != [x.as_str()] {
                return Err(Error::Form(format!("intervention `{dec}` has children other than `{x}`")));
            }
            let k = xn.parents.iter().position(|p| p == dec).expect("child");
            let mut cards = d.parent_cards(x).expect("validated");
            cards.push(1);
            let table = d.function(x).expect("validated");
            for (i, cfg) in Configs::new(&cards[..cards.len() - 1]).enumerate() {
                if cfg[k] > 0 && table[i] != cfg[k] - 1 {
                    return Err(Error::Form(format!("`{dec}` does not force `{x}`")));
                }
            }
            if hat_of.insert(x.clone(), dec.clone()).is_some() {
                return Err(Error::Form(format!("`{x}` has two registered interventions")));
            }
        }
        let hats = hat_of.values().cloned().collect();
        let mapping: BTreeSet<String> = cd
            .mappings
            .keys()
            .filter(|id| {
                d.node(id).is_some_and(|n| n.kind == NodeKind::Chance)
                    && !below.contains(*id)
                    && d.children(id).iter().any(|c| below.contains(&c.id))
            })
            .cloned()
            .collect();
        // mapping nodes are absorbed into disturbances, so their ids are free
        let used = d
            .nodes()
            .iter()
            .filter(|n| !mapping.contains(&n.id))
            .map(|n| n.id.clone())
            .collect();
        Ok(Builder {
            d,
            topo,
            below,
            hat_of,
            hats,
            mapping,
            used,
            vars: Vec::new(),
            dists: Vec::new(),
        })
    }

    fn node(&self, id: &str) -> &'a Node {
        self.d.node(id).expect("validated")
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut s = format!("{base}_hat");
        while self.used.contains(&s) {
            s.push_str("_hat");
        }
        self.used.insert(s.clone());
        s
    }

    fn claim(&mut self, id: &str) -> Result<()> {
        if self.used.insert(id.to_owned()) {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("generated id `{id}` collides with an existing one")))
        }
    }

    fn is_unresponsive(&self, n: &Node) -> bool {
        matches!(n.kind, NodeKind::Chance | NodeKind::Deterministic) && !self.below.contains(&n.id)
    }

    fn cond_prob(&self, n: &Node, cfg: usize, value: usize) -> Result<f64> {
        match n.kind {
            NodeKind::Chance => self
                .d
                .cpt(&n.id)
                .and_then(|c| c.row(cfg))
                .map(|r| r[value])
                .ok_or_else(|| Error::InvalidModel(format!("`{}` has no row {cfg}", n.id))),
            NodeKind::Deterministic => {
                let f = self.d.function(&n.id).expect("validated");
                Ok(if f[cfg] == value { 1.0 } else { 0.0 })
            }
            _ => Err(Error::InvalidModel(format!("`{}` has no distribution", n.id))),
        }
    }

    /// Joint over `nodes`, which must be closed under parents and in
    /// topological order.
    fn block_joint(&self, nodes: &[&Node]) -> Result<BTreeMap<Vec<usize>, f64>> {
        let pos: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut out = BTreeMap::new();
        let mut vals = vec![0usize; nodes.len()];
        self.dfs(nodes, &pos, 0, 1.0, &mut vals, &mut out)?;
        Ok(out)
    }

    fn dfs(
        &self,
        nodes: &[&Node],
        pos: &HashMap<&str, usize>,
        i: usize,
        mass: f64,
        vals: &mut Vec<usize>,
        out: &mut BTreeMap<Vec<usize>, f64>,
    ) -> Result<()> {
        if i == nodes.len() {
            *out.entry(vals.clone()).or_insert(0.0) += mass;
            return Ok(());
        }
        let n = nodes[i];
        let pv: Vec<usize> = n.parents.iter().map(|p| vals[pos[p.as_str()]]).collect();
        let cfg = space::encode(&pv, &self.d.parent_cards(&n.id).expect("validated"));
        for v in 0..n.card() {
            let p = self.cond_prob(n, cfg, v)?;
            if p > 0.0 {
                vals[i] = v;
                self.dfs(nodes, pos, i + 1, mass * p, vals, out)?;
            }
        }
        Ok(())
    }

    /// Connected components of the unresponsive nodes, in topological order.
    fn components(&self) -> Vec<Vec<&'a Node>> {
        let ub: Vec<&Node> = self.topo.iter().copied().filter(|n| self.is_unresponsive(n)).collect();
        let pos: HashMap<&str, usize> = ub.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut root: Vec<usize> = (0..ub.len()).collect();
        fn find(root: &mut [usize], mut i: usize) -> usize {
            while root[i] != i {
                root[i] = root[root[i]];
                i = root[i];
            }
            i
        }
        for (i, n) in ub.iter().enumerate() {
            for p in &n.parents {
                if let Some(&j) = pos.get(p.as_str()) {
                    let (a, b) = (find(&mut root, i), find(&mut root, j));
                    root[a.max(b)] = a.min(b);
                }
            }
        }
        let mut comps: BTreeMap<usize, Vec<&Node>> = BTreeMap::new();
        for (i, n) in ub.iter().enumerate() {
            let r = find(&mut root, i);
            comps.entry(r).or_default().push(n);
        }
        comps.into_values().collect()
    }

    fn responsive_children(&self, id: &str) -> Vec<&'a Node> {
        self.d
            .children(id)
            .into_iter()
            .filter(|n| self.below.contains(&n.id))
            .collect()
    }

    /// Whether every mapping node in `comp` is a sink of the block feeding a
    /// single responsive node that has no other mapping parent.
    fn separable(&self, comp: &[&Node]) -> bool {
        comp.iter().filter(|n| self.mapping.contains(&n.id)).all(|m| {
            let kids: Vec<&Node> = self
                .d
                .children(&m.id)
                .into_iter()
                .filter(|n| n.kind != NodeKind::Utility)
                .collect();
            kids.len() == 1
                && self.below.contains(&kids[0].id)
                && kids[0].parents.iter().filter(|p| self.mapping.contains(*p)).count() == 1
        })
    }

    fn add_disturbance(&mut self, mv: &MappingVariable) -> Result<String> {
        let id = mv.id().to_owned();
        self.claim(&id)?;
        self.dists.push(Disturbance {
            id: id.clone(),
            instances: mv.instance_names(),
        });
        Ok(id)
    }

    fn decision_pair(&mut self, n: &Node) {
        let hat = self.fresh(&n.id);
        let mut equation = vec![0];
        equation.extend(0..n.card());
        self.vars.push(SemVariable {
            id: n.id.clone(),
            instances: n.instances.clone(),
            parents: Vec::new(),
            intervention: hat,
            idle_forbidden: true,
            disturbance: None,
            equation,
            hidden: false,
        });
    }

    /// Intervention id for a responsive node and whether it is a node of the diagram.
    fn hat_for(&mut self, n: &Node) -> (String, bool) {
        match self.hat_of.get(&n.id) {
            Some(h) => (h.clone(), true),
            None => (self.fresh(&n.id), false),
        }
    }

    /// Value of deterministic `n` with parents drawn from `lookup`; the
    /// registered intervention, if any, is idle.
    fn eval(&self, n: &Node, lookup: impl Fn(&str) -> usize) -> usize {
        let cards = self.d.parent_cards(&n.id).expect("validated");
        let vals: Vec<usize> = n
            .parents
            .iter()
            .map(|p| if self.hats.contains(p) { 0 } else { lookup(p) })
            .collect();
        self.d.function(&n.id).expect("validated")[space::encode(&vals, &cards)]
    }

    fn arg(&self, id: &str) -> MappedVar {
        MappedVar::new(id, self.node(id).instances.clone())
    }

    /// Equation over `(parents, hat)`: the intervention when set, otherwise
    /// `value` of the parent configuration.
    fn plain_equation(&self, n: &Node, parents: &[String], value: impl Fn(&[usize]) -> usize) -> Vec<usize> {
        let mut cards: Vec<usize> = parents.iter().map(|p| self.var_card(p)).collect();
        cards.push(n.card() + 1);
        Configs::new(&cards)
            .map(|cfg| {
                let (pv, h) = cfg.split_at(cfg.len() - 1);
                if h[0] > 0 {
                    h[0] - 1
                } else {
                    value(pv)
                }
            })
            .collect()
    }

    fn var_card(&self, id: &str) -> usize {
        self.vars
            .iter()
            .find(|v| v.id == id)
            .map(|v| v.instances.len())
            .or_else(|| self.d.node(id).map(Node::card))
            .expect("known parent")
    }

    fn push_var(
        &mut self,
        n: &Node,
        parents: Vec<String>,
        intervention: String,
        disturbance: Option<String>,
        equation: Vec<usize>,
    ) {
        self.vars.push(SemVariable {
            id: n.id.clone(),
            instances: n.instances.clone(),
            parents,
            intervention,
            idle_forbidden: false,
            disturbance,
            equation,
            hidden: false,
        });
    }

    /// Parents of responsive `n` other than mapping nodes and its intervention.
    fn domain_parents(&self, n: &Node) -> Vec<String> {
        n.parents
            .iter()
            .filter(|p| !self.mapping.contains(*p) && !self.hats.contains(*p))
            .cloned()
            .collect()
    }

    fn deterministic_response(&mut self, n: &Node) {
        let (hat, _) = self.hat_for(n);
        let parents = self.domain_parents(n);
        let eq = self.plain_equation(n, &parents, |pv| {
            self.eval(n, |p| pv[parents.iter().position(|q| q == p).expect("parent")])
        });
        self.push_var(n, parents, hat, None, eq);
    }
}

/// Structural equation model with independent disturbances, equivalent to a
/// canonical diagram. Components of the unresponsive block whose mapping
/// nodes each feed a single responsive node get one disturbance per
/// variable; any other component is replaced by a hidden common cause.
pub fn from_canonical(cd: &CanonicalDiagram) -> Result<StructuralEquationModel> {
    let mut b = Builder::new(cd)?;
    let mut blocks: Vec<DisturbanceBlock> = Vec::new();
    let mut hidden_of: HashMap<String, usize> = HashMap::new();
    let mut hidden: Vec<Hidden> = Vec::new();
    let mut separable: HashSet<String> = HashSet::new();
    for comp in b.components() {
        if b.separable(&comp) {
            separable.extend(comp.iter().map(|n| n.id.clone()));
            continue;
        }
        let cards: Vec<usize> = comp.iter().map(|n| n.card()).collect();
        if space::space_size(&cards).is_none_or(|s| s > MAX_MAPPING_INSTANCES) {
            return Err(Error::TooLarge(format!(
                "hidden common cause of `{}` would have more than {MAX_MAPPING_INSTANCES} instances",
                comp[0].id
            )));
        }
        let names: Vec<String> = Configs::new(&cards)
            .map(|cfg| {
                let syms: Vec<&str> = cfg.iter().zip(&comp).map(|(&v, n)| n.instances[v].as_str()).collect();
                space::joint_label(&syms)
            })
            .collect();
        let mut k = hidden.len() + 1;
        while b.used.contains(&format!("hidden{k}")) {
            k += 1;
        }
        let id = format!("hidden{k}");
        b.claim(&id)?;
        let hat = b.fresh(&id);
        let mv = MappingVariable::enumerate(
            vec![MappedVar::new(&id, names.clone())],
            vec![MappedVar::new(&hat, space::intervention_instances(&names))],
            Some(0),
        )?;
        let joint: BTreeMap<Vec<usize>, f64> = b
            .block_joint(&comp)?
            .into_iter()
            .map(|(cfg, p)| (vec![space::encode(&cfg, &cards)], p))
            .collect();
        let eps = b.add_disturbance(&mv)?;
        blocks.push(DisturbanceBlock {
            members: vec![eps.clone()],
            joint,
        });
        b.vars.push(SemVariable {
            id: id.clone(),
            instances: names,
            parents: Vec::new(),
            intervention: hat,
            idle_forbidden: false,
            disturbance: Some(eps),
            equation: equation_from_mapping(&mv)?,
            hidden: true,
        });
        for n in &comp {
            hidden_of.insert(n.id.clone(), hidden.len());
        }
        hidden.push(Hidden {
            id,
            members: comp.iter().map(|n| n.id.clone()).collect(),
            cards,
        });
    }

    for n in b.topo.clone() {
        match n.kind {
            NodeKind::Decision if !b.hats.contains(&n.id) => b.decision_pair(n),
            NodeKind::Decision | NodeKind::Utility => {}
            _ if b.mapping.contains(&n.id) => {}
            _ if b.is_unresponsive(n) && separable.contains(&n.id) => {
                let hat = b.fresh(&n.id);
                let mut args: Vec<MappedVar> = n.parents.iter().map(|p| b.arg(p)).collect();
                args.push(MappedVar::new(&hat, space::intervention_instances(&n.instances)));
                let k = args.len() - 1;
                let mv = MappingVariable::enumerate(vec![b.arg(&n.id)], args, Some(k))?;
                let mut joint = BTreeMap::new();
                for f in 0..mv.len() {
                    let mut p = 1.0;
                    for (c, &val) in mv.table(f)?.iter().enumerate() {
                        p *= b.cond_prob(n, c, val)?;
                        if p == 0.0 {
                            break;
                        }
                    }
                    if p > 0.0 {
                        joint.insert(vec![f], p);
                    }
                }
                let eps = b.add_disturbance(&mv)?;
                blocks.push(DisturbanceBlock {
                    members: vec![eps.clone()],
                    joint,
                });
                let eq = equation_from_mapping(&mv)?;
                b.push_var(n, n.parents.clone(), hat, Some(eps), eq);
            }
            _ if b.is_unresponsive(n) => {
                let h = &hidden[hidden_of[&n.id]];
                let at = h.members.iter().position(|m| m == &n.id).expect("member");
                let hat = b.fresh(&n.id);
                let cards = h.cards.clone();
                let hid = h.id.clone();
                let eq = b.plain_equation(n, std::slice::from_ref(&hid), |pv| space::decode(pv[0], &cards)[at]);
                b.push_var(n, vec![hid], hat, None, eq);
            }
            _ => {
                let ms: Vec<&str> = n.parents.iter().filter(|p| b.mapping.contains(*p)).map(String::as_str).collect();
                if ms.is_empty() {
                    b.deterministic_response(n);
                } else if separable.contains(ms[0]) {
                    blocks.push(separable_response(&mut b, n, ms[0])?);
                } else {
                    let mut hs: Vec<usize> = ms.iter().map(|m| hidden_of[*m]).collect();
                    hs.dedup();
                    let hs: Vec<usize> = hs.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
                    let (hat, _) = b.hat_for(n);
                    let mut parents = b.domain_parents(n);
                    let nd = parents.len();
                    parents.extend(hs.iter().map(|&h| hidden[h].id.clone()));
                    let eq = b.plain_equation(n, &parents, |pv| {
                        b.eval(n, |p| {
                            if let Some(&h) = hidden_of.get(p).filter(|_| b.mapping.contains(p)) {
                                let hv = &hidden[h];
                                let slot = nd + hs.iter().position(|&x| x == h).expect("hidden parent");
                                let at = hv.members.iter().position(|m| m == p).expect("member");
                                space::decode(pv[slot], &hv.cards)[at]
                            } else {
                                pv[parents.iter().position(|q| q == p).expect("parent")]
                            }
                        })
                    });
                    b.push_var(n, parents, hat, None, eq);
                }
            }
        }
    }
    StructuralEquationModel::new(SemMode::Independent, b.vars, b.dists, blocks)
}

/// Disturbance `x(S, E, x_hat)` for responsive `n` with mapping parent `m`:
/// `S` are its other parents, `E` the parents of `m` not already in `S`.
/// Its prior makes the slices at distinct `E` configurations independent.
fn separable_response(b: &mut Builder<'_>, n: &Node, m: &str) -> Result<DisturbanceBlock> {
    let mnode = b.node(m);
    let (hat, _) = b.hat_for(n);
    let sp = b.domain_parents(n);
    let extra: Vec<String> = mnode.parents.iter().filter(|p| !sp.contains(p)).cloned().collect();
    let mut parents = sp.clone();
    parents.extend(extra.iter().cloned());
    let mut args: Vec<MappedVar> = parents.iter().map(|p| MappedVar::new(p.as_str(), b.node(p).instances.clone())).collect();
    args.push(MappedVar::new(&hat, space::intervention_instances(&n.instances)));
    let k = args.len() - 1;
    let mv = MappingVariable::enumerate(vec![b.arg(&n.id)], args, Some(k))?;
    let free_cards: Vec<usize> = parents.iter().map(|p| b.node(p).card()).collect();
    let e_cards = b.d.parent_cards(m).expect("validated");
    // group free configurations by the configuration of m's parents
    let mut groups: BTreeMap<usize, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
    for (ci, cfg) in Configs::new(&free_cards).enumerate() {
        let ev: Vec<usize> = mnode
            .parents
            .iter()
            .map(|p| cfg[parents.iter().position(|q| q == p).expect("parent")])
            .collect();
        groups.entry(space::encode(&ev, &e_cards)).or_default().push((ci, cfg));
    }
    let mut slice_probs: Vec<(Vec<usize>, Joint)> = Vec::new();
    for (e, members) in &groups {
        let mut probs: HashMap<Vec<usize>, f64> = HashMap::new();
        for i in 0..mnode.card() {
            let p = b.cond_prob(mnode, *e, i)?;
            if p == 0.0 {
                continue;
            }
            let slice: Vec<usize> = members
                .iter()
                .map(|(_, cfg)| {
                    b.eval(n, |q| {
                        if q == m {
                            i
                        } else {
                            cfg[parents.iter().position(|x| x == q).expect("parent")]
                        }
                    })
                })
                .collect();
            *probs.entry(slice).or_insert(0.0) += p;
        }
        slice_probs.push((members.iter().map(|(ci, _)| *ci).collect(), probs));
    }
    let mut joint = BTreeMap::new();
    for f in 0..mv.len() {
        let table = mv.table(f)?;
        let mut p = 1.0;
        for (cis, probs) in &slice_probs {
            let key: Vec<usize> = cis.iter().map(|&c| table[c]).collect();
            p *= probs.get(&key).copied().unwrap_or(0.0);
            if p == 0.0 {
                break;
            }
        }
        if p > 0.0 {
            joint.insert(vec![f], p);
        }
    }
    let eps = b.add_disturbance(&mv)?;
    let eq = equation_from_mapping(&mv)?;
    b.push_var(n, parents, hat, Some(eps.clone()), eq);
    Ok(DisturbanceBlock {
        members: vec![eps],
        joint,
    })
}

/// Functional model: one disturbance per unresponsive variable and per
/// responsive node with mapping parents, grouped into blocks along the
/// connected components of the unresponsive block. Variables in `drop` are
/// marginalized out; they may not feed a responsive node.
pub fn from_canonical_functional(cd: &CanonicalDiagram, drop: &[String]) -> Result<StructuralEquationModel> {
    let mut b = Builder::new(cd)?;
    let comps = b.components();
    let ub: Vec<&Node> = comps.iter().flatten().copied().collect();
    let ub_pos: HashMap<&str, usize> = ub.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let dropped: HashSet<&str> = drop.iter().map(String::as_str).collect();
    for id in drop {
        let ok = ub_pos.contains_key(id.as_str()) && !b.mapping.contains(id);
        if !ok {
            return Err(Error::Form(format!("`{id}` is not an unresponsive non-mapping variable")));
        }
        if let Some(x) = b.responsive_children(id).first() {
            return Err(Error::Form(format!("`{id}` cannot be dropped: it is a parent of `{}`", x.id)));
        }
    }
    // component of every unresponsive node
    let mut comp_of: Vec<usize> = vec![0; ub.len()];
    {
        let mut i = 0;
        for (c, comp) in comps.iter().enumerate() {
            for _ in comp {
                comp_of[i] = c;
                i += 1;
            }
        }
    }
    // the topological order of ub matters for sampling the joint
    let ub_topo: Vec<&Node> = b.topo.iter().copied().filter(|n| ub_pos.contains_key(n.id.as_str())).collect();
    let topo_joint = b.block_joint(&ub_topo)?;
    let reorder: Vec<usize> = ub.iter().map(|n| ub_topo.iter().position(|m| m.id == n.id).expect("same set")).collect();
    let joint: Vec<(Vec<usize>, f64)> = topo_joint
        .into_iter()
        .map(|(cfg, p)| (reorder.iter().map(|&j| cfg[j]).collect(), p))
        .collect();

    #[allow(clippy::large_enum_variant)]
    enum Source {
        Plain(usize),
        Response {
            node: String,
            ms: Vec<usize>,
            parents: Vec<String>,
            mv: MappingVariable,
        },
    }
    let mut sources: Vec<(String, usize, Source)> = Vec::new();
    let mut merge: Vec<Vec<usize>> = Vec::new();
    for n in b.topo.clone() {
        match n.kind {
            NodeKind::Decision if !b.hats.contains(&n.id) => b.decision_pair(n),
            NodeKind::Decision | NodeKind::Utility => {}
            _ if b.mapping.contains(&n.id) || dropped.contains(n.id.as_str()) => {}
            _ if b.is_unresponsive(n) => {
                let hat = b.fresh(&n.id);
                let mv = MappingVariable::enumerate(
                    vec![b.arg(&n.id)],
                    vec![MappedVar::new(&hat, space::intervention_instances(&n.instances))],
                    Some(0),
                )?;
                let eps = b.add_disturbance(&mv)?;
                let eq = equation_from_mapping(&mv)?;
                b.push_var(n, Vec::new(), hat, Some(eps.clone()), eq);
                let i = ub_pos[n.id.as_str()];
                sources.push((eps, comp_of[i], Source::Plain(i)));
            }
            _ => {
                let ms: Vec<usize> = n
                    .parents
                    .iter()
                    .filter(|p| b.mapping.contains(*p))
                    .map(|p| ub_pos[p.as_str()])
                    .collect();
                if ms.is_empty() {
                    b.deterministic_response(n);
                    continue;
                }
                let (hat, _) = b.hat_for(n);
                let parents = b.domain_parents(n);
                let mut args: Vec<MappedVar> = parents.iter().map(|p| MappedVar::new(p.as_str(), b.node(p).instances.clone())).collect();
                args.push(MappedVar::new(&hat, space::intervention_instances(&n.instances)));
                let k = args.len() - 1;
                let mv = MappingVariable::enumerate(vec![b.arg(&n.id)], args, Some(k))?;
                let eps = b.add_disturbance(&mv)?;
                let eq = equation_from_mapping(&mv)?;
                b.push_var(n, parents.clone(), hat, Some(eps.clone()), eq);
                merge.push(ms.iter().map(|&i| comp_of[i]).collect());
                sources.push((
                    eps,
                    comp_of[ms[0]],
                    Source::Response {
                        node: n.id.clone(),
                        ms,
                        parents,
                        mv,
                    },
                ));
            }
        }
    }
    // components joined by a node with mapping parents in several of them
    let mut root: Vec<usize> = (0..comps.len()).collect();
    fn find(root: &mut [usize], mut i: usize) -> usize {
        while root[i] != i {
            i = root[i];
        }
        i
    }
    for group in &merge {
        for w in group.windows(2) {
            let (a, c) = (find(&mut root, w[0]), find(&mut root, w[1]));
            root[a.max(c)] = a.min(c);
        }
    }
    let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, (_, c, _)) in sources.iter().enumerate() {
        by_block.entry(find(&mut root, *c)).or_default().push(k);
    }
    let mut blocks = Vec::new();
    let mut cache: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for members in by_block.values() {
        let mut bj: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (cfg, p) in &joint {
            let mut key = Vec::with_capacity(members.len());
            for &k in members {
                key.push(match &sources[k].2 {
                    Source::Plain(i) => cfg[*i],
                    Source::Response { node, ms, parents, mv } => {
                        let mvals: Vec<usize> = ms.iter().map(|&i| cfg[i]).collect();
                        if let Some(&v) = cache.get(&(k, mvals.clone())) {
                            v
                        } else {
                            let n = b.node(node);
                            let cards: Vec<usize> = parents.iter().map(|p| b.node(p).card()).collect();
                            let table: Vec<usize> = Configs::new(&cards)
                                .map(|pv| {
                                    b.eval(n, |q| match parents.iter().position(|x| x == q) {
                                        Some(j) => pv[j],
                                        None => cfg[ub_pos[q]],
                                    })
                                })
                                .collect();
                            let v = mv
                                .index_of_table(&table)
                                .ok_or_else(|| Error::InvalidModel(format!("no instance of `{}` matches", mv.id())))?;
                            cache.insert((k, mvals), v);
                            v
                        }
                    }
                });
            }
            *bj.entry(key).or_insert(0.0) += p;
        }
        blocks.push(DisturbanceBlock {
            members: members.iter().map(|&k| sources[k].0.clone()).collect(),
            joint: bj,
        });
    }
    // blocks follow the order of their first disturbance
    blocks.sort_by_key(|blk| b.dists.iter().position(|d| d.id == blk.members[0]));
    StructuralEquationModel::new(SemMode::Functional, b.vars, b.dists, blocks)
}

/// Canonical diagram of a model: decisions in disguise and interventions
/// become decision nodes, disturbances chance nodes, and every other variable
/// a deterministic node over its parents, intervention and disturbance.
pub fn to_canonical_from_sem(m: &StructuralEquationModel) -> Result<CanonicalDiagram> {
    m.check()?;
    let mut d = InfluenceDiagram::new();
    let mut interventions = BTreeMap::new();
    for v in &m.variables {
        if v.idle_forbidden {
            d.add_decision(&v.id, v.instances.clone());
        } else {
            d.add_decision(&v.intervention, v.intervention_instances());
            interventions.insert(v.intervention.clone(), v.id.clone());
        }
    }
    for blk in &m.blocks {
        let bvs: Vec<BlockVar> = blk
            .members
            .iter()
            .map(|e| BlockVar {
                id: e.clone(),
                instances: m.disturbance(e).expect("checked").instances.clone(),
            })
            .collect();
        for (k, (parents, cpt)) in cpt_chain(&bvs, &blk.joint).into_iter().enumerate() {
            let ps: Vec<&str> = parents.iter().map(|&p| bvs[p].id.as_str()).collect();
            d.add_chance(&bvs[k].id, bvs[k].instances.clone(), &ps, cpt);
        }
    }
    let mut mappings = BTreeMap::new();
    let mut responsive = BTreeSet::new();
    for v in m.variables.iter().filter(|v| !v.idle_forbidden) {
        let mut parents: Vec<&str> = v.parents.iter().map(String::as_str).collect();
        parents.push(&v.intervention);
        if let Some(e) = &v.disturbance {
            parents.push(e);
            if let Some(mv) = registered_mapping(m, v)? {
                mappings.insert(e.clone(), mv);
            }
        }
        d.add_deterministic(&v.id, v.instances.clone(), &parents, v.equation.clone());
        responsive.insert(v.id.clone());
    }
    CanonicalDiagram::new(d, responsive, mappings, interventions)
}

/// The mapping variable a disturbance encodes, when its equation is exactly
/// "apply the disturbance to the parents".
fn registered_mapping(m: &StructuralEquationModel, v: &SemVariable) -> Result<Option<MappingVariable>> {
    let e = m.disturbance(v.disturbance.as_deref().expect("has disturbance")).expect("checked");
    let mut args: Vec<MappedVar> = v
        .parents
        .iter()
        .map(|p| MappedVar::new(p.as_str(), m.variable(p).expect("checked").instances.clone()))
        .collect();
    args.push(MappedVar::new(v.intervention.as_str(), v.intervention_instances()));
    let k = args.len() - 1;
    let mv = match MappingVariable::enumerate(vec![MappedVar::new(v.id.as_str(), v.instances.clone())], args, Some(k)) {
        Ok(mv) if mv.len() == e.instances.len() => mv,
        Ok(_) | Err(Error::TooLarge(_)) | Err(Error::Input(_)) => return Ok(None),
        Err(err) => return Err(err),
    };
    Ok((equation_from_mapping(&mv)? == v.equation).then_some(mv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::to_canonical;
    use crate::fixtures;
    use crate::space::Assignment;

    fn acts(cd: &CanonicalDiagram) -> Vec<Act> {
        let decs: Vec<&Node> = cd.diagram.decisions().collect();
        let cards: Vec<usize> = decs.iter().map(|n| n.card()).collect();
        Configs::new(&cards)
            .map(|cfg| decs.iter().zip(cfg).map(|(n, v)| (n.id.clone(), n.instances[v].clone())).collect())
            .collect()
    }

    fn assert_agrees(cd: &CanonicalDiagram, sem: &StructuralEquationModel, query: &[&str]) {
        for act in acts(cd) {
            let a = cd.diagram.infer(&act, &Assignment::new(), query).unwrap();
            let b = sem.distribution(&act, query).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-9, "act {act}");
        }
    }

    #[test]
    fn genotype_model_counts() {
        let cd = to_canonical(&fixtures::medical_g(), None).unwrap();
        assert_eq!(parameter_count_diagram(&cd.diagram).total, 13);
        let sem = from_canonical(&cd).unwrap();
        let ids: Vec<&str> = sem.disturbances().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["g(g_hat)", "t(r,g,t_hat)", "c(t,g,c_hat)"]);
        let counts = parameter_count_sem(&sem);
        assert_eq!(counts.per_node.iter().map(|p| p.1).collect::<Vec<_>>(), [1, 15, 15]);
        assert_eq!(counts.total, 31);
        assert_agrees(&cd, &sem, &["g", "t", "c"]);

        let f = from_canonical_functional(&cd, &["g".to_owned()]).unwrap();
        let ids: Vec<&str> = f.disturbances().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["t(r,t_hat)", "c(t,c_hat)"]);
        assert_eq!(parameter_count_sem(&f).total, 15);
        assert_agrees(&cd, &f, &["t", "c"]);

        let full = from_canonical_functional(&cd, &[]).unwrap();
        assert_eq!(parameter_count_sem(&full).total, 31);
        assert_agrees(&cd, &full, &["g", "t", "c"]);
    }

    #[test]
    fn dependent_block_gets_hidden_cause() {
        let cd = to_canonical(&fixtures::medical(), None).unwrap();
        let sem = from_canonical(&cd).unwrap();
        let h = sem.variables().iter().find(|v| v.hidden).unwrap();
        assert_eq!(h.id, "hidden1");
        assert_eq!(h.instances.len(), 16);
        assert_eq!(sem.variable("t").unwrap().parents, ["r", "hidden1"]);
        assert!(sem.variable("r").unwrap().idle_forbidden);
        assert_agrees(&cd, &sem, &["t", "c"]);
        assert!(parameter_count_diagram(&cd.diagram).total <= parameter_count_sem(&sem).total);
    }

    #[test]
    fn round_trip_through_diagram() {
        for table in [fixtures::medical_g(), fixtures::medical(), fixtures::coin()] {
            let cd = to_canonical(&table, None).unwrap();
            let sem = from_canonical(&cd).unwrap();
            let back = to_canonical_from_sem(&sem).unwrap();
            let u: Vec<&str> = table.chances().iter().map(|v| v.id.as_str()).collect();
            for act in acts(&cd) {
                let a = cd.diagram.infer(&act, &Assignment::new(), &u).unwrap();
                let b = back.diagram.infer(&sem.diagram_act(&act).unwrap(), &Assignment::new(), &u).unwrap();
                assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
            }
            let again = from_canonical(&back).unwrap();
            for act in acts(&back) {
                let a = sem.distribution(&act, &u).unwrap();
                let b = again.distribution(&act, &u).unwrap();
                assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn set_override_is_enforced() {
        let cd = to_canonical(&fixtures::coin(), None).unwrap();
        let sem = from_canonical(&cd).unwrap();
        let mut vars = sem.variables().to_vec();
        let w = vars.iter_mut().find(|v| v.id == "w").unwrap();
        let last = w.equation.len() - 1;
        w.equation[last] = 1 - w.equation[last];
        let err = StructuralEquationModel::new(
            sem.mode(),
            vars,
            sem.disturbances().to_vec(),
            sem.blocks().to_vec(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("not overridden"), "{err}");
    }

    #[test]
    fn dropping_a_cause_of_a_responsive_node_fails() {
        let cd = to_canonical(&fixtures::medical_g(), None).unwrap();
        assert!(from_canonical_functional(&cd, &["t".to_owned()]).is_err());
        assert!(from_canonical_functional(&cd, &["t(r,t_hat)".to_owned()]).is_err());
    }
}
