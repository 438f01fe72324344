//! Crate-wide error type.

use std::fmt;

use thiserror::Error;

/// Broad classification used for CLI exit codes and FFI status codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// Malformed request: unknown ids, wrong instance names, bad shapes.
    Input,
    /// A model file or in-memory model breaks a structural rule.
    Model,
    /// Evidence with zero probability.
    ImpossibleEvidence,
    /// A mapping variable is not uniquely identified or is not a function.
    Definedness,
    /// An operation needs a canonical-form diagram and did not get one.
    Form,
    /// A desk-scale guard was exceeded.
    Limit,
    /// File-format problems (syntax, schema, version).
    Format,
}

/// A single problem found while validating a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending node or variable, when there is one.
    pub node: Option<String>,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    DuplicateId,
    UnknownParent,
    EmptyInstances,
    DuplicateInstance,
    Acyclicity,
    MissingTable,
    TableShape,
    Normalization,
    UtilityHasChildren,
    MultipleUtilities,
    DecisionHasDistribution,
    /// A responsive chance node is not a descendant of any decision.
    ResponsiveNotDescendant,
    /// A chance node below a decision is not deterministic.
    DescendantNotDeterministic,
    UnknownNode,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(node) => write!(f, "{:?}({}): {}", self.kind, node, self.detail),
            None => write!(f, "{:?}: {}", self.kind, self.detail),
        }
    }
}

impl Violation {
    pub(crate) fn new(kind: ViolationKind, node: Option<&str>, detail: impl Into<String>) -> Self {
        Violation {
            kind,
            node: node.map(str::to_owned),
            detail: detail.into(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown instance `{instance}` of `{variable}`")]
    UnknownInstance { variable: String, instance: String },

    #[error("unknown state {0}")]
    UnknownState(u32),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("diagram failed validation: {}", join_violations(.0))]
    InvalidDiagram(Vec<Violation>),

    #[error("diagram is not in canonical form: {}", join_violations(.0))]
    NotCanonical(Vec<Violation>),

    #[error("{0}")]
    Form(String),

    #[error("exhaustive search over {count} variables exceeds the limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },

    #[error("desk-scale limit exceeded: {0}")]
    TooLarge(String),

    #[error("world table carries possible-flags only, no priors")]
    Unquantified,

    #[error("mapping {mapping} is not uniquely identified{}: {reason}", state_suffix(.state))]
    Definedness {
        mapping: String,
        state: Option<u32>,
        reason: String,
    },

    #[error("mapping {mapping} is not a function{}: {reason}", state_suffix(.state))]
    NotAFunction {
        mapping: String,
        state: Option<u32>,
        reason: String,
    },

    #[error("evidence has zero probability")]
    ImpossibleEvidence,

    #[error("diagram has no utility node")]
    MissingUtility,

    #[error("`{0}` is responsive to the decisions; its value of information is undefined")]
    Responsive(String),

    #[error("{0}")]
    Format(String),
}

fn state_suffix(state: &Option<u32>) -> String {
    match state {
        Some(s) => format!(" in state {s}"),
        None => String::new(),
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnknownVariable(_)
            | Error::UnknownInstance { .. }
            | Error::UnknownState(_)
            | Error::Input(_)
            | Error::Unquantified
            | Error::MissingUtility
            | Error::Responsive(_) => ErrorKind::Input,
            Error::InvalidModel(_) | Error::InvalidDiagram(_) => ErrorKind::Model,
            Error::NotCanonical(_) | Error::Form(_) => ErrorKind::Form,
            Error::TooManyVariables { .. } | Error::TooLarge(_) => ErrorKind::Limit,
            Error::Definedness { .. } | Error::NotAFunction { .. } => ErrorKind::Definedness,
            Error::ImpossibleEvidence => ErrorKind::ImpossibleEvidence,
            Error::Format(_) => ErrorKind::Format,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
