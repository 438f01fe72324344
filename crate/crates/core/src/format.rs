//! JSON model files. Every file carries `format_version` and a `model` tag;
//! probabilities are decimal strings and tables name instances rather than
//! index them. Writing then reading a model is the identity, and so is
//! reading then writing a file this module wrote.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::canonical::CanonicalDiagram;
use crate::diagram::{Cpt, InfluenceDiagram, Node, NodeKind};
use crate::error::{Error, Result};
use crate::mapping::{MappedVar, MappingVariable};
use crate::sem::{Disturbance, DisturbanceBlock, SemMode, SemVariable, StructuralEquationModel};
use crate::space::{self, Configs};
use crate::worlds::{Prior, VarKind, Variable, WorldState, WorldTable};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    WorldTable(WorldTable),
    InfluenceDiagram(InfluenceDiagram),
    Canonical(CanonicalDiagram),
    Sem(StructuralEquationModel),
}

impl Model {
    /// The file's `model` tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Model::WorldTable(_) => "world_table",
            Model::InfluenceDiagram(_) => "influence_diagram",
            Model::Canonical(_) => "canonical",
            Model::Sem(m) => m.mode().as_str(),
        }
    }
}

impl From<WorldTable> for Model {
    fn from(t: WorldTable) -> Self {
        Model::WorldTable(t)
    }
}

impl From<InfluenceDiagram> for Model {
    fn from(d: InfluenceDiagram) -> Self {
        Model::InfluenceDiagram(d)
    }
}

impl From<CanonicalDiagram> for Model {
    fn from(d: CanonicalDiagram) -> Self {
        Model::Canonical(d)
    }
}

impl From<StructuralEquationModel> for Model {
    fn from(m: StructuralEquationModel) -> Self {
        Model::Sem(m)
    }
}

#[derive(Deserialize)]
struct Header {
    format_version: u32,
    model: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarFile {
    id: String,
    instances: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    possible: Option<bool>,
    /// One row per act, acts in mixed-radix order over the decisions.
    outcomes: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    format_version: u32,
    model: String,
    decisions: Vec<VarFile>,
    chances: Vec<VarFile>,
    states: Vec<StateFile>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum KindFile {
    Decision,
    Chance,
    Deterministic,
    Utility,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseRowFile {
    parents: Vec<String>,
    p: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparse: Option<Vec<SparseRowFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    id: String,
    kind: KindFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    instances: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpt: Option<CptFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    function: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramFile {
    format_version: u32,
    model: String,
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    node: String,
    targets: Vec<String>,
    args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    collapsed: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterventionFile {
    decision: String,
    target: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalFile {
    format_version: u32,
    model: String,
    canonical: bool,
    nodes: Vec<NodeFile>,
    responsive: Vec<String>,
    #[serde(default)]
    mappings: Vec<MappingFile>,
    #[serde(default)]
    interventions: Vec<InterventionFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemVarFile {
    id: String,
    instances: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parents: Vec<String>,
    intervention: String,
    #[serde(default, skip_serializing_if = "is_false")]
    idle_forbidden: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    hidden: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disturbance: Option<String>,
    /// Instance at every configuration of (parents, intervention, disturbance).
    equation: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRowFile {
    values: Vec<String>,
    p: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFile {
    members: Vec<String>,
    joint: Vec<JointRowFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemFile {
    format_version: u32,
    model: String,
    variables: Vec<SemVarFile>,
    disturbances: Vec<VarFile>,
    blocks: Vec<BlockFile>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn prob(s: &str, at: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| fmt_err(format!("{at}: `{s}` is not a decimal probability")))
}

fn prob_string(p: f64) -> String {
    format!("{p}")
}

fn decode<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        fmt_err(format!("{path}: {inner}"))
    })
}

/// Reads a model file of any kind.
pub fn parse(text: &str) -> Result<Model> {
    let header: Header = serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(fmt_err(format!(
            "format_version {} is not supported (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    match header.model.as_str() {
        "world_table" => Ok(Model::WorldTable(world_from_file(decode(text)?)?)),
        "influence_diagram" => {
            let f: DiagramFile = decode(text)?;
            Ok(Model::InfluenceDiagram(diagram_from_nodes(&f.nodes)?))
        }
        "canonical" => Ok(Model::Canonical(canonical_from_file(decode(text)?)?)),
        "sem" | "functional" => Ok(Model::Sem(sem_from_file(decode(text)?)?)),
        other => Err(fmt_err(format!("unknown model kind `{other}`"))),
    }
}

pub fn read(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize(model: &Model) -> String {
    let mut s = match model {
        Model::WorldTable(t) => serde_json::to_string_pretty(&world_to_file(t)),
        Model::InfluenceDiagram(d) => serde_json::to_string_pretty(&DiagramFile {
            format_version: FORMAT_VERSION,
            model: "influence_diagram".into(),
            nodes: nodes_to_file(d),
        }),
        Model::Canonical(cd) => serde_json::to_string_pretty(&canonical_to_file(cd)),
        Model::Sem(m) => serde_json::to_string_pretty(&sem_to_file(m)),
    }
    .expect("model files always serialize");
    s.push('\n');
    s
}

pub fn write(path: &Path, model: &Model) -> Result<()> {
    std::fs::write(path, serialize(model)).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn var_index(v: &Variable, inst: &str, at: &str) -> Result<usize> {
    v.index_of(inst)
        .ok_or_else(|| fmt_err(format!("{at}: `{inst}` is not an instance of `{}`", v.id)))
}

fn world_from_file(f: WorldFile) -> Result<WorldTable> {
    let decisions: Vec<Variable> = f
        .decisions
        .into_iter()
        .map(|v| Variable::new(v.id, VarKind::Decision, v.instances))
        .collect();
    let chances: Vec<Variable> = f
        .chances
        .into_iter()
        .map(|v| Variable::new(v.id, VarKind::Chance, v.instances))
        .collect();
    let mut states = Vec::with_capacity(f.states.len());
    for s in f.states {
        let at = format!("state {}", s.id);
        let prior = match (s.prior, s.possible) {
            (Some(p), None) => Prior::Mass(prob(&p, &at)?),
            (None, Some(b)) => Prior::Possible(b),
            _ => return Err(fmt_err(format!("{at}: give exactly one of `prior` and `possible`"))),
        };
        let mut outcomes = Vec::with_capacity(s.outcomes.len());
        for row in &s.outcomes {
            if row.len() != chances.len() {
                return Err(fmt_err(format!(
                    "{at}: outcome row has {} entries for {} chance variables",
                    row.len(),
                    chances.len()
                )));
            }
            outcomes.push(
                row.iter()
                    .zip(&chances)
                    .map(|(inst, v)| var_index(v, inst, &at))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        states.push(WorldState {
            id: s.id,
            label: s.label,
            prior,
            outcomes,
        });
    }
    WorldTable::new(decisions, chances, states)
}

fn world_to_file(t: &WorldTable) -> WorldFile {
    let var = |v: &Variable| VarFile {
        id: v.id.clone(),
        instances: v.instances.clone(),
    };
    WorldFile {
        format_version: FORMAT_VERSION,
        model: "world_table".into(),
        decisions: t.decisions().iter().map(var).collect(),
        chances: t.chances().iter().map(var).collect(),
        states: t
            .states()
            .iter()
            .map(|s| {
                let (prior, possible) = match s.prior {
                    Prior::Mass(p) => (Some(prob_string(p)), None),
                    Prior::Possible(b) => (None, Some(b)),
                };
                StateFile {
                    id: s.id,
                    label: s.label.clone(),
                    prior,
                    possible,
                    outcomes: s
                        .outcomes
                        .iter()
                        .map(|row| {
                            row.iter()
                                .zip(t.chances())
                                .map(|(&i, v)| v.instances[i].clone())
                                .collect()
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

fn kind_file(k: NodeKind) -> KindFile {
    match k {
        NodeKind::Decision => KindFile::Decision,
        NodeKind::Chance => KindFile::Chance,
        NodeKind::Deterministic => KindFile::Deterministic,
        NodeKind::Utility => KindFile::Utility,
    }
}

fn probs(row: &[String], at: &str) -> Result<Vec<f64>> {
    row.iter().map(|s| prob(s, at)).collect()
}

fn diagram_from_nodes(nodes: &[NodeFile]) -> Result<InfluenceDiagram> {
    let instances: HashMap<&str, &[String]> = nodes.iter().map(|n| (n.id.as_str(), n.instances.as_slice())).collect();
    let mut d = InfluenceDiagram::new();
    for n in nodes {
        let kind = match n.kind {
            KindFile::Decision => NodeKind::Decision,
            KindFile::Chance => NodeKind::Chance,
            KindFile::Deterministic => NodeKind::Deterministic,
            KindFile::Utility => NodeKind::Utility,
        };
        let at = format!("node `{}`", n.id);
        let allowed = match kind {
            NodeKind::Decision => n.cpt.is_none() && n.function.is_none() && n.values.is_none(),
            NodeKind::Chance => n.function.is_none() && n.values.is_none(),
            NodeKind::Deterministic => n.cpt.is_none() && n.values.is_none(),
            NodeKind::Utility => n.cpt.is_none() && n.function.is_none() && n.instances.is_empty(),
        };
        if !allowed {
            return Err(fmt_err(format!("{at}: table fields do not match kind `{}`", kind.as_str())));
        }
        d.add_node(Node {
            id: n.id.clone(),
            kind,
            instances: n.instances.clone(),
            parents: n.parents.clone(),
        });
        if let Some(c) = &n.cpt {
            let cpt = match (&c.rows, &c.sparse) {
                (Some(rows), None) if c.default.is_none() => {
                    Cpt::dense(rows.iter().map(|r| probs(r, &at)).collect::<Result<_>>()?)
                }
                (None, Some(sparse)) => {
                    let mut cards = Vec::new();
                    let mut lists = Vec::new();
                    for p in &n.parents {
                        let inst = instances
                            .get(p.as_str())
                            .ok_or_else(|| fmt_err(format!("{at}: unknown parent `{p}`")))?;
                        cards.push(inst.len());
                        lists.push(*inst);
                    }
                    let mut rows = BTreeMap::new();
                    for r in sparse {
                        if r.parents.len() != lists.len() {
                            return Err(fmt_err(format!("{at}: sparse row names {} parents", r.parents.len())));
                        }
                        let vals = r
                            .parents
                            .iter()
                            .zip(&lists)
                            .map(|(v, list)| {
                                list.iter()
                                    .position(|x| x == v)
                                    .ok_or_else(|| fmt_err(format!("{at}: unknown parent instance `{v}`")))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        if rows.insert(space::encode(&vals, &cards), probs(&r.p, &at)?).is_some() {
                            return Err(fmt_err(format!("{at}: parent configuration listed twice")));
                        }
                    }
                    let default = c.default.as_ref().map(|r| probs(r, &at)).transpose()?;
                    Cpt::sparse(rows, default)
                }
                _ => return Err(fmt_err(format!("{at}: give `rows`, or `sparse` with an optional `default`"))),
            };
            d.set_cpt(&n.id, cpt);
        }
        if let Some(f) = &n.function {
            let table = f
                .iter()
                .map(|v| {
                    n.instances
                        .iter()
                        .position(|x| x == v)
                        .ok_or_else(|| fmt_err(format!("{at}: `{v}` is not an instance")))
                })
                .collect::<Result<Vec<_>>>()?;
            d.set_function(&n.id, table);
        }
        if let Some(v) = &n.values {
            d.set_utility(probs(v, &at)?);
        }
    }
    Ok(d)
}

fn nodes_to_file(d: &InfluenceDiagram) -> Vec<NodeFile> {
    d.nodes()
        .iter()
        .map(|n| {
            let cards = d.parent_cards(&n.id).unwrap_or_default();
            let configs = space::space_size(&cards).unwrap_or(usize::MAX);
            let row = |r: &[f64]| r.iter().map(|&p| prob_string(p)).collect::<Vec<_>>();
            let cpt = d.cpt(&n.id).map(|c| {
                if c.is_dense(configs) {
                    CptFile {
                        rows: Some(c.explicit_rows().values().map(|r| row(r)).collect()),
                        sparse: None,
                        default: None,
                    }
                } else {
                    CptFile {
                        rows: None,
                        sparse: Some(
                            c.explicit_rows()
                                .iter()
                                .map(|(&k, r)| SparseRowFile {
                                    parents: space::decode(k, &cards)
                                        .iter()
                                        .zip(&n.parents)
                                        .map(|(&v, p)| d.node(p).expect("known parent").instances[v].clone())
                                        .collect(),
                                    p: row(r),
                                })
                                .collect(),
                        ),
                        default: c.default_row().map(row),
                    }
                }
            });
            NodeFile {
                id: n.id.clone(),
                kind: kind_file(n.kind),
                instances: n.instances.clone(),
                parents: n.parents.clone(),
                cpt,
                function: d
                    .function(&n.id)
                    .map(|f| f.iter().map(|&i| n.instances[i].clone()).collect()),
                values: if n.kind == NodeKind::Utility {
                    d.utility_values().map(|v| v.iter().map(|&p| prob_string(p)).collect())
                } else {
                    None
                },
            }
        })
        .collect()
}

fn canonical_from_file(f: CanonicalFile) -> Result<CanonicalDiagram> {
    if !f.canonical {
        return Err(fmt_err("canonical model files must set `canonical: true`"));
    }
    let d = diagram_from_nodes(&f.nodes)?;
    let mapped = |id: &str, at: &str| -> Result<MappedVar> {
        let n = d
            .node(id)
            .ok_or_else(|| fmt_err(format!("{at}: unknown node `{id}`")))?;
        if id == at {
            return Err(fmt_err(format!("mapping `{at}` refers to itself")));
        }
        Ok(MappedVar::new(id, n.instances.clone()))
    };
    let mut mappings = BTreeMap::new();
    for m in &f.mappings {
        let targets = m.targets.iter().map(|t| mapped(t, &m.node)).collect::<Result<Vec<_>>>()?;
        let args = m.args.iter().map(|a| mapped(a, &m.node)).collect::<Result<Vec<_>>>()?;
        let mv = MappingVariable::from_parts(targets, args, m.collapsed.as_deref())?;
        let node = d
            .node(&m.node)
            .ok_or_else(|| fmt_err(format!("mapping names unknown node `{}`", m.node)))?;
        if node.instances != mv.instance_names() {
            return Err(fmt_err(format!(
                "node `{}` does not list the instances of its mapping in canonical order",
                m.node
            )));
        }
        if mappings.insert(m.node.clone(), mv).is_some() {
            return Err(fmt_err(format!("mapping `{}` listed twice", m.node)));
        }
    }
    let mut interventions = BTreeMap::new();
    for i in &f.interventions {
        if interventions.insert(i.decision.clone(), i.target.clone()).is_some() {
            return Err(fmt_err(format!("intervention `{}` listed twice", i.decision)));
        }
    }
    let responsive: BTreeSet<String> = f.responsive.into_iter().collect();
    CanonicalDiagram::new(d, responsive, mappings, interventions)
}

fn canonical_to_file(cd: &CanonicalDiagram) -> CanonicalFile {
    CanonicalFile {
        format_version: FORMAT_VERSION,
        model: "canonical".into(),
        canonical: true,
        nodes: nodes_to_file(&cd.diagram),
        responsive: cd.responsive.iter().cloned().collect(),
        mappings: cd
            .mappings
            .iter()
            .map(|(node, mv)| MappingFile {
                node: node.clone(),
                targets: mv.targets().iter().map(|t| t.id.clone()).collect(),
                args: mv.args().iter().map(|a| a.id.clone()).collect(),
                collapsed: mv.collapsed().map(str::to_owned),
            })
            .collect(),
        interventions: cd
            .interventions
            .iter()
            .map(|(d, t)| InterventionFile {
                decision: d.clone(),
                target: t.clone(),
            })
            .collect(),
    }
}

fn sem_from_file(f: SemFile) -> Result<StructuralEquationModel> {
    let mode = if f.model == "sem" {
        SemMode::Independent
    } else {
        SemMode::Functional
    };
    let var_inst: HashMap<&str, &[String]> = f.variables.iter().map(|v| (v.id.as_str(), v.instances.as_slice())).collect();
    let dist_inst: HashMap<&str, &[String]> =
        f.disturbances.iter().map(|e| (e.id.as_str(), e.instances.as_slice())).collect();
    let index = |list: &[String], v: &str, at: &str| -> Result<usize> {
        list.iter()
            .position(|x| x == v)
            .ok_or_else(|| fmt_err(format!("{at}: `{v}` is not an instance")))
    };
    let mut variables = Vec::with_capacity(f.variables.len());
    for v in &f.variables {
        let at = format!("variable `{}`", v.id);
        let equation = v
            .equation
            .iter()
            .map(|x| index(&v.instances, x, &at))
            .collect::<Result<Vec<_>>>()?;
        variables.push(SemVariable {
            id: v.id.clone(),
            instances: v.instances.clone(),
            parents: v.parents.clone(),
            intervention: v.intervention.clone(),
            idle_forbidden: v.idle_forbidden,
            disturbance: v.disturbance.clone(),
            equation,
            hidden: v.hidden,
        });
    }
    let _ = var_inst;
    let disturbances = f
        .disturbances
        .iter()
        .map(|e| Disturbance {
            id: e.id.clone(),
            instances: e.instances.clone(),
        })
        .collect();
    let mut blocks = Vec::with_capacity(f.blocks.len());
    for b in &f.blocks {
        let at = format!("block of `{}`", b.members.first().map_or("", String::as_str));
        let lists: Vec<&[String]> = b
            .members
            .iter()
            .map(|m| {
                dist_inst
                    .get(m.as_str())
                    .copied()
                    .ok_or_else(|| fmt_err(format!("{at}: unknown disturbance `{m}`")))
            })
            .collect::<Result<_>>()?;
        let mut joint = BTreeMap::new();
        for row in &b.joint {
            if row.values.len() != lists.len() {
                return Err(fmt_err(format!("{at}: joint row has {} values", row.values.len())));
            }
            let key = row
                .values
                .iter()
                .zip(&lists)
                .map(|(v, list)| index(list, v, &at))
                .collect::<Result<Vec<_>>>()?;
            if joint.insert(key, prob(&row.p, &at)?).is_some() {
                return Err(fmt_err(format!("{at}: joint row listed twice")));
            }
        }
        blocks.push(DisturbanceBlock {
            members: b.members.clone(),
            joint,
        });
    }
    StructuralEquationModel::new(mode, variables, disturbances, blocks)
}

fn sem_to_file(m: &StructuralEquationModel) -> SemFile {
    SemFile {
        format_version: FORMAT_VERSION,
        model: m.mode().as_str().into(),
        variables: m
            .variables()
            .iter()
            .map(|v| SemVarFile {
                id: v.id.clone(),
                instances: v.instances.clone(),
                parents: v.parents.clone(),
                intervention: v.intervention.clone(),
                idle_forbidden: v.idle_forbidden,
                hidden: v.hidden,
                disturbance: v.disturbance.clone(),
                equation: v.equation.iter().map(|&i| v.instances[i].clone()).collect(),
            })
            .collect(),
        disturbances: m
            .disturbances()
            .iter()
            .map(|e| VarFile {
                id: e.id.clone(),
                instances: e.instances.clone(),
            })
            .collect(),
        blocks: m
            .blocks()
            .iter()
            .map(|b| {
                let lists: Vec<&[String]> = b
                    .members
                    .iter()
                    .map(|e| m.disturbance(e).expect("checked").instances.as_slice())
                    .collect();
                BlockFile {
                    members: b.members.clone(),
                    joint: b
                        .joint
                        .iter()
                        .map(|(k, &p)| JointRowFile {
                            values: k.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect(),
                            p: prob_string(p),
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

/// The configurations of a set of variables, for callers that want to
/// enumerate a table in file order.
pub fn configs(cards: &[usize]) -> Configs {
    Configs::new(cards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::to_canonical;
    use crate::fixtures;
    use crate::sem::{from_canonical, from_canonical_functional};

    fn round_trip(m: Model) {
        let text = serialize(&m);
        let back = parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn every_kind_round_trips() {
        round_trip(fixtures::omelet().into());
        round_trip(fixtures::medical().into());
        round_trip(fixtures::medical_flags().into());
        let cd = to_canonical(&fixtures::medical_g(), None).unwrap();
        round_trip(cd.diagram.clone().into());
        round_trip(from_canonical(&cd).unwrap().into());
        round_trip(from_canonical_functional(&cd, &["g".to_owned()]).unwrap().into());
        round_trip(cd.into());
        round_trip(to_canonical(&fixtures::medical(), None).unwrap().into());
    }

    #[test]
    fn bad_files_are_rejected_with_locations() {
        let text = serialize(&fixtures::omelet().into());
        let extra = text.replacen("\"id\": \"a\"", "\"id\": \"a\", \"colour\": 1", 1);
        let err = parse(&extra).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("decisions[0]"), "{err}");
        let v2 = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(parse(&v2).unwrap_err().to_string().contains("format_version 2"));
        let bad_inst = text.replacen("\"six\"", "\"seven\"", 1);
        assert!(parse(&bad_inst).is_err());
        assert!(parse("{\"format_version\": 1, \"model\": \"graph\"}").is_err());
    }
}
