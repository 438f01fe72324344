//! Decision-theoretic causal reasoning over explicit world tables and
//! influence diagrams.

pub mod canonical;
pub mod cli;
pub mod counterfactual;
pub mod decide;
pub mod diagram;
pub mod dist;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod mapping;
pub mod sem;
pub mod space;
pub mod worlds;

pub use canonical::{to_canonical, CanonicalDiagram};
pub use counterfactual::{CounterfactualQuery, CounterfactualWorld, TwinDiagram, TwinMode};
pub use decide::{Policy, Rule};
pub use diagram::{Cpt, InferenceMethod, InfluenceDiagram, Node, NodeKind};
pub use dist::Distribution;
pub use error::{Error, ErrorKind, Result, Violation, ViolationKind};
pub use format::Model;
pub use mapping::{MappedVar, MappingVariable, WorldMapping};
pub use sem::{Disturbance, DisturbanceBlock, ParamCount, SemMode, SemVariable, StructuralEquationModel};
pub use space::{Act, Assignment};
pub use worlds::{CauseSearch, InstanceCause, Prior, VarKind, Variable, WorldState, WorldTable};
