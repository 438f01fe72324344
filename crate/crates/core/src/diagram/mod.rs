//! Influence diagrams: chance, deterministic, decision and utility nodes with
//! explicit tables, plus exact inference over the product factorization.

mod infer;

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Violation, ViolationKind as VK};
use crate::space;

pub use infer::{InferenceMethod, ENUMERATION_THRESHOLD};

const ROW_TOLERANCE: f64 = 1e-9;

/// Largest parent-configuration space a single table may span.
pub const MAX_TABLE_CONFIGS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Chance,
    Deterministic,
    Decision,
    Utility,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::Chance => "chance",
            NodeKind::Deterministic => "deterministic",
            NodeKind::Decision => "decision",
            NodeKind::Utility => "utility",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Empty for the utility node.
    pub instances: Vec<String>,
    /// For decisions these are information arcs, which carry no semantics here.
    pub parents: Vec<String>,
}

impl Node {
    pub fn card(&self) -> usize {
        self.instances.len()
    }

    pub fn index_of(&self, instance: &str) -> Option<usize> {
        self.instances.iter().position(|i| i == instance)
    }
}

/// Conditional table `P(x | parents)`, rows keyed by parent configuration in
/// mixed-radix order. Rows not listed fall back to `default`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    rows: BTreeMap<usize, Vec<f64>>,
    default: Option<Vec<f64>>,
}

impl Cpt {
    /// One row per parent configuration.
    pub fn dense(rows: Vec<Vec<f64>>) -> Self {
        Cpt {
            rows: rows.into_iter().enumerate().collect(),
            default: None,
        }
    }

    pub fn sparse(rows: BTreeMap<usize, Vec<f64>>, default: Option<Vec<f64>>) -> Self {
        Cpt { rows, default }
    }

    /// A root prior.
    pub fn prior(p: Vec<f64>) -> Self {
        Self::dense(vec![p])
    }

    pub fn row(&self, config: usize) -> Option<&[f64]> {
        self.rows.get(&config).or(self.default.as_ref()).map(Vec::as_slice)
    }

    pub fn explicit_rows(&self) -> &BTreeMap<usize, Vec<f64>> {
        &self.rows
    }

    pub fn default_row(&self) -> Option<&[f64]> {
        self.default.as_deref()
    }

    /// Whether every configuration of a `configs`-sized parent space has an
    /// explicit row and there is no default.
    pub fn is_dense(&self, configs: usize) -> bool {
        self.default.is_none() && self.rows.len() == configs && self.rows.keys().enumerate().all(|(i, &k)| i == k)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InfluenceDiagram {
    nodes: Vec<Node>,
    cpts: BTreeMap<String, Cpt>,
    functions: BTreeMap<String, Vec<usize>>,
    utility: Option<Vec<f64>>,
}

impl InfluenceDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, id: &str, kind: NodeKind, instances: Vec<String>, parents: &[&str]) {
        self.nodes.push(Node {
            id: id.to_owned(),
            kind,
            instances,
            parents: parents.iter().map(|p| p.to_string()).collect(),
        });
    }

    pub fn add_decision<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, id: &str, instances: I) -> &mut Self {
        self.push(id, NodeKind::Decision, instances.into_iter().map(Into::into).collect(), &[]);
        self
    }

    pub fn add_chance<I: IntoIterator<Item = S>, S: Into<String>>(
        &mut self,
        id: &str,
        instances: I,
        parents: &[&str],
        cpt: Cpt,
    ) -> &mut Self {
        self.push(id, NodeKind::Chance, instances.into_iter().map(Into::into).collect(), parents);
        self.cpts.insert(id.to_owned(), cpt);
        self
    }

    /// `table[k]` is the instance index taken at parent configuration `k`.
    pub fn add_deterministic<I: IntoIterator<Item = S>, S: Into<String>>(
        &mut self,
        id: &str,
        instances: I,
        parents: &[&str],
        table: Vec<usize>,
    ) -> &mut Self {
        self.push(id, NodeKind::Deterministic, instances.into_iter().map(Into::into).collect(), parents);
        self.functions.insert(id.to_owned(), table);
        self
    }

    pub fn add_utility(&mut self, id: &str, parents: &[&str], values: Vec<f64>) -> &mut Self {
        self.push(id, NodeKind::Utility, Vec::new(), parents);
        self.utility = Some(values);
        self
    }

    /// Adds a node with a raw parent list and no table; used by file loading.
    pub fn add_node(&mut self, node: Node) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn set_cpt(&mut self, id: &str, cpt: Cpt) {
        self.cpts.insert(id.to_owned(), cpt);
    }

    pub fn set_function(&mut self, id: &str, table: Vec<usize>) {
        self.functions.insert(id.to_owned(), table);
    }

    pub fn set_utility(&mut self, values: Vec<f64>) {
        self.utility = Some(values);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.cpts.get(id)
    }

    pub fn function(&self, id: &str) -> Option<&[usize]> {
        self.functions.get(id).map(Vec::as_slice)
    }

    pub fn utility_values(&self) -> Option<&[f64]> {
        self.utility.as_deref()
    }

    pub fn utility_node(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Utility)
    }

    pub fn decisions(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Decision)
    }

    /// Instance index of every parent configuration of `id`, as cards.
    pub fn parent_cards(&self, id: &str) -> Option<Vec<usize>> {
        let n = self.node(id)?;
        n.parents.iter().map(|p| self.node(p).map(Node::card)).collect()
    }

    /// Children of `id`, excluding information arcs into decisions.
    pub fn children(&self, id: &str) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Decision && n.parents.iter().any(|p| p == id))
            .collect()
    }

    /// Nodes reachable from `roots` along arcs, excluding information arcs
    /// into decisions. The roots themselves are not included.
    pub fn descendants<S: AsRef<str>>(&self, roots: &[S]) -> HashSet<String> {
        let mut out = HashSet::new();
        let mut stack: Vec<String> = roots.iter().map(|r| r.as_ref().to_owned()).collect();
        while let Some(id) = stack.pop() {
            for c in self.children(&id) {
                if out.insert(c.id.clone()) {
                    stack.push(c.id.clone());
                }
            }
        }
        out
    }

    /// Every structural problem in the diagram. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut by_id: HashMap<&str, &Node> = HashMap::new();
        for n in &self.nodes {
            if by_id.insert(n.id.as_str(), n).is_some() {
                v.push(Violation::new(VK::DuplicateId, Some(&n.id), "node id declared more than once"));
            }
        }
        let mut utilities = 0;
        for n in &self.nodes {
            let id = Some(n.id.as_str());
            if n.id.is_empty() {
                v.push(Violation::new(VK::DuplicateId, None, "empty node id"));
            }
            for p in &n.parents {
                match by_id.get(p.as_str()) {
                    None => v.push(Violation::new(VK::UnknownParent, id, format!("parent `{p}` does not exist"))),
                    Some(pn) if pn.kind == NodeKind::Utility => v.push(Violation::new(
                        VK::UtilityHasChildren,
                        Some(&pn.id),
                        format!("utility node is a parent of `{}`", n.id),
                    )),
                    Some(_) => {}
                }
            }
            let uniq: HashSet<&String> = n.parents.iter().collect();
            if uniq.len() != n.parents.len() {
                v.push(Violation::new(VK::DuplicateId, id, "parent listed twice"));
            }
            match n.kind {
                NodeKind::Utility => {
                    utilities += 1;
                    if utilities == 2 {
                        v.push(Violation::new(VK::MultipleUtilities, id, "more than one utility node"));
                    }
                    if !n.instances.is_empty() {
                        v.push(Violation::new(VK::TableShape, id, "utility node has instances"));
                    }
                }
                _ => {
                    if n.instances.is_empty() {
                        v.push(Violation::new(VK::EmptyInstances, id, "no instances"));
                    }
                    let uniq: HashSet<&String> = n.instances.iter().collect();
                    if uniq.len() != n.instances.len() {
                        v.push(Violation::new(VK::DuplicateInstance, id, "instance listed twice"));
                    }
                }
            }
        }
        if let Some(cycle) = self.find_cycle() {
            v.push(Violation::new(VK::Acyclicity, Some(&cycle), "node lies on a directed cycle"));
        }
        for n in &self.nodes {
            self.check_tables(n, &by_id, &mut v);
        }
        for id in self.cpts.keys().chain(self.functions.keys()) {
            if !by_id.contains_key(id.as_str()) {
                v.push(Violation::new(VK::UnknownNode, Some(id), "table for an undeclared node"));
            }
        }
        v
    }

    fn check_tables(&self, n: &Node, by_id: &HashMap<&str, &Node>, v: &mut Vec<Violation>) {
        let id = Some(n.id.as_str());
        let cards: Option<Vec<usize>> = n.parents.iter().map(|p| by_id.get(p.as_str()).map(|p| p.card())).collect();
        let configs = cards.as_ref().and_then(|c| space::space_size(c));
        let cpt = self.cpts.get(&n.id);
        let fun = self.functions.get(&n.id);
        match n.kind {
            NodeKind::Decision | NodeKind::Utility if cpt.is_some() || fun.is_some() => {
                v.push(Violation::new(VK::DecisionHasDistribution, id, "node carries a probability or function table"));
            }
            NodeKind::Chance if fun.is_some() => {
                v.push(Violation::new(VK::TableShape, id, "chance node carries a function table"));
            }
            NodeKind::Deterministic if cpt.is_some() => {
                v.push(Violation::new(VK::TableShape, id, "deterministic node carries a probability table"));
            }
            _ => {}
        }
        let Some(configs) = configs else {
            if cards.is_some() {
                v.push(Violation::new(VK::TableShape, id, "parent configuration space overflows"));
            }
            return;
        };
        if configs > MAX_TABLE_CONFIGS {
            v.push(Violation::new(VK::TableShape, id, format!("{configs} parent configurations exceed the table limit")));
            return;
        }
        match n.kind {
            NodeKind::Chance => match cpt {
                None => v.push(Violation::new(VK::MissingTable, id, "chance node without a probability table")),
                Some(cpt) => {
                    let check_row = |row: &[f64], at: String, v: &mut Vec<Violation>| {
                        if row.len() != n.card() {
                            v.push(Violation::new(
                                VK::TableShape,
                                id,
                                format!("{at}: {} entries for {} instances", row.len(), n.card()),
                            ));
                            return;
                        }
                        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                            v.push(Violation::new(VK::Normalization, id, format!("{at}: negative or non-finite entry")));
                        }
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > ROW_TOLERANCE {
                            v.push(Violation::new(VK::Normalization, id, format!("{at}: row sums to {sum}")));
                        }
                    };
                    for (&k, row) in &cpt.rows {
                        if k >= configs {
                            v.push(Violation::new(VK::TableShape, id, format!("row {k} beyond {configs} parent configurations")));
                        } else {
                            check_row(row, format!("row {k}"), v);
                        }
                    }
                    match &cpt.default {
                        Some(row) => check_row(row, "default row".into(), v),
                        None if cpt.rows.range(..configs).count() < configs => {
                            v.push(Violation::new(VK::TableShape, id, "probability table is not total"));
                        }
                        None => {}
                    }
                }
            },
            NodeKind::Deterministic => match fun {
                None => v.push(Violation::new(VK::MissingTable, id, "deterministic node without a function table")),
                Some(f) if f.len() != configs => v.push(Violation::new(
                    VK::TableShape,
                    id,
                    format!("function table has {} entries for {configs} parent configurations", f.len()),
                )),
                Some(f) if f.iter().any(|&x| x >= n.card()) => {
                    v.push(Violation::new(VK::TableShape, id, "function value out of range"))
                }
                Some(_) => {}
            },
            NodeKind::Utility => match &self.utility {
                None => v.push(Violation::new(VK::MissingTable, id, "utility node without values")),
                Some(u) if u.len() != configs => v.push(Violation::new(
                    VK::TableShape,
                    id,
                    format!("utility table has {} entries for {configs} parent configurations", u.len()),
                )),
                Some(u) if u.iter().any(|x| !x.is_finite()) => {
                    v.push(Violation::new(VK::TableShape, id, "non-finite utility"))
                }
                Some(_) => {}
            },
            NodeKind::Decision => {}
        }
    }

    fn find_cycle(&self) -> Option<String> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut indeg = vec![0usize; self.nodes.len()];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for p in &n.parents {
                if let Some(&j) = index.get(p.as_str()) {
                    indeg[i] += 1;
                    children[j].push(i);
                }
            }
        }
        let mut stack: Vec<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = stack.pop() {
            seen += 1;
            for &c in &children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        (seen < self.nodes.len()).then(|| {
            let i = (0..self.nodes.len()).find(|&i| indeg[i] > 0).expect("cycle member");
            self.nodes[i].id.clone()
        })
    }
}
