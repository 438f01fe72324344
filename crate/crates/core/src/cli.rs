//! Command-line surface. Each command wraps one library operation; exit
//! codes are 0 for success, 1 for a violation or a negative answer, and 2
//! for an input error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::canonical::{to_canonical, CanonicalDiagram};
use crate::counterfactual::{evaluate_with, CounterfactualQuery, CounterfactualWorld, TwinMode};
use crate::decide::{solve_observing, value_of_information};
use crate::diagram::{InferenceMethod, InfluenceDiagram};
use crate::dist::Distribution;
use crate::error::{Error, ErrorKind, Result};
use crate::format::{self, Model};
use crate::mapping::mapping_report;
use crate::sem::{
    from_canonical, from_canonical_functional, parameter_count_diagram, parameter_count_sem, to_canonical_from_sem,
    ParamCount,
};
use crate::space::{self, Act, Assignment, Configs};
use crate::worlds::{CauseSearch, WorldTable, DEFAULT_CAUSE_SEARCH_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dcause", version, about = "Decision-theoretic causal reasoning over world tables and influence diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Enumeration,
    Elimination,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a model file against its structural rules.
    Validate { file: PathBuf },
    /// Values of chance variables in one state under one act.
    Outcome {
        file: PathBuf,
        #[arg(long)]
        state: u32,
        /// Complete act, `d=x,e=y`.
        #[arg(long)]
        act: String,
        /// Chance variables to report; all of them by default.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Responsiveness of chance variables to the decisions.
    Responsive {
        file: PathBuf,
        /// Variables to test; without it the responsive set is listed.
        #[arg(long)]
        var: Option<String>,
        #[arg(long)]
        limited_by: Option<String>,
        /// Restrict to this subset of the decisions.
        #[arg(long)]
        decisions: Option<String>,
        /// Restrict the limiting variables to these joint instances, `t=yes;t=no`.
        #[arg(long)]
        instances: Option<String>,
    },
    /// Minimal cause sets of a chance variable.
    Causes {
        file: PathBuf,
        #[arg(long)]
        var: String,
        /// Report instance-level causes with their instance sets.
        #[arg(long)]
        instances: bool,
        #[arg(long, default_value_t = DEFAULT_CAUSE_SEARCH_LIMIT)]
        max_vars: usize,
    },
    /// Direct and atomic intervention checks.
    Intervene {
        file: PathBuf,
        /// Intervening decisions; without them the atomic interventions are listed.
        #[arg(long)]
        decisions: Option<String>,
        #[arg(long)]
        var: Option<String>,
        /// Check for an atomic intervention instead of a direct one.
        #[arg(long)]
        atomic: bool,
    },
    /// Instances of a mapping variable and its value in each state.
    Mapping {
        file: PathBuf,
        #[arg(long)]
        targets: String,
        #[arg(long)]
        args: String,
    },
    /// Canonical-form influence diagram of a priced world table.
    Canonicalize {
        file: PathBuf,
        /// Chance-variable order, unresponsive ones first.
        #[arg(long)]
        order: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Canonical diagram to structural equations, or back.
    SemConvert {
        file: PathBuf,
        /// Produce a functional model.
        #[arg(long)]
        functional: bool,
        /// Unresponsive variables to contract away in a functional model.
        #[arg(long)]
        drop: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Number of free probabilities in a model.
    CountParams {
        file: PathBuf,
        /// Count the structural equation model of a canonical diagram.
        #[arg(long, conflicts_with = "functional")]
        sem: bool,
        /// Count the functional model of a canonical diagram.
        #[arg(long)]
        functional: bool,
        #[arg(long, requires = "functional")]
        drop: Option<String>,
        /// Also list the count of every node or block.
        #[arg(long)]
        per_node: bool,
    },
    /// Posterior under an act. Bare query ids print a distribution, `id=x`
    /// items print the probability of that event.
    Infer {
        file: PathBuf,
        #[arg(long, default_value = "")]
        act: String,
        #[arg(long, default_value = "")]
        evidence: String,
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Elimination order for `--method elimination`.
        #[arg(long)]
        order: Option<String>,
    },
    /// Counterfactual query over a canonical diagram.
    Cf {
        file: PathBuf,
        /// Factual decisions and observations, `r=take,c=yes`.
        #[arg(long)]
        factual: String,
        /// Counterfactual decisions and observations; repeat for more worlds.
        #[arg(long = "cf", required = true)]
        worlds: Vec<String>,
        #[arg(long)]
        query: String,
        /// Duplicate every decision and responsive node.
        #[arg(long)]
        full: bool,
    },
    /// Value of perfect information about an unresponsive variable.
    Voi {
        file: PathBuf,
        #[arg(long)]
        var: String,
        /// Also print the best act for each observed value.
        #[arg(long)]
        policy: bool,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut buf = String::new();
    let result = execute(&cli.command, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs one command, appending its output to `out`. Returns the exit code
/// of a completed command.
pub fn execute(cmd: &Command, out: &mut String) -> Result<i32> {
    match cmd {
        Command::Validate { file } => validate(file, out),
        Command::Outcome { file, state, act, vars } => {
            let t = world(file)?;
            let act = Act::from(space::parse_assignment(act)?);
            let vars = match vars {
                Some(v) => space::split_top_level(v),
                None => t.chances().iter().map(|v| v.id.clone()).collect(),
            };
            line(out, space::format_assignment(&t.outcome(*state, &act, &vars)?));
            Ok(EXIT_OK)
        }
        Command::Responsive {
            file,
            var,
            limited_by,
            decisions,
            instances,
        } => {
            let t = world(file)?;
            let Some(var) = var else {
                line(out, space::format_set(t.responsive_set()));
                return Ok(EXIT_OK);
            };
            let x = space::split_top_level(var);
            let y = list(limited_by);
            let unresponsive = match (decisions, instances) {
                (Some(_), Some(_)) => return Err(Error::Input("give at most one of --decisions and --instances".into())),
                (Some(d), None) => t.is_unresponsive_to_subset(&x, space::split_top_level(d), &y)?,
                (None, Some(i)) => {
                    let set = i
                        .split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(space::parse_assignment)
                        .collect::<Result<Vec<_>>>()?;
                    t.is_unresponsive_in_instance_set(&x, &y, &set)?
                }
                (None, None) => t.is_unresponsive_limited(&x, &y)?,
            };
            Ok(verdict(out, !unresponsive, "responsive", "unresponsive"))
        }
        Command::Causes {
            file,
            var,
            instances,
            max_vars,
        } => {
            let t = world(file)?;
            let search = CauseSearch::new(*max_vars);
            if *instances {
                for c in search.find_instance_causes(&t, var)? {
                    let insts: Vec<String> = c.instances.iter().map(space::format_assignment).collect();
                    line(out, format!("{} {}", space::format_set(&c.variables), insts.join(" ")));
                }
            } else {
                for c in search.find_causes(&t, var)? {
                    line(out, space::format_set(&c));
                }
            }
            Ok(EXIT_OK)
        }
        Command::Intervene {
            file,
            decisions,
            var,
            atomic,
        } => {
            let t = world(file)?;
            match (decisions, var) {
                (None, None) => {
                    for (x, d) in t.atomic_interventions() {
                        line(out, format!("{d} {x}"));
                    }
                    Ok(EXIT_OK)
                }
                (Some(d), Some(x)) if *atomic => {
                    let yes = t.is_atomic_intervention(d, x)?;
                    Ok(verdict(out, yes, "atomic", "not atomic"))
                }
                (Some(d), Some(x)) => {
                    let yes = t.is_direct_intervention(space::split_top_level(d), space::split_top_level(x))?;
                    Ok(verdict(out, yes, "direct", "not direct"))
                }
                _ => Err(Error::Input("give both --decisions and --var, or neither".into())),
            }
        }
        Command::Mapping { file, targets, args } => mapping(&world(file)?, targets, args, out),
        Command::Canonicalize { file, order, output } => {
            let t = world(file)?;
            let order = order.as_deref().map(space::split_top_level);
            let cd = to_canonical(&t, order.as_deref())?;
            emit(&cd.into(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::SemConvert {
            file,
            functional,
            drop,
            output,
        } => {
            let converted: Model = match format::read(file)? {
                Model::Canonical(cd) if *functional => from_canonical_functional(&cd, &list(drop))?.into(),
                Model::Canonical(cd) if drop.is_none() => from_canonical(&cd)?.into(),
                Model::Canonical(_) => return Err(Error::Input("--drop needs --functional".into())),
                Model::Sem(m) if !*functional && drop.is_none() => to_canonical_from_sem(&m)?.into(),
                Model::Sem(_) => return Err(Error::Input("a structural model converts only to a canonical diagram".into())),
                other => return Err(wrong_kind(file, &other, "a canonical diagram or structural model")),
            };
            emit(&converted, output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::CountParams {
            file,
            sem,
            functional,
            drop,
            per_node,
        } => {
            let count = match format::read(file)? {
                Model::Canonical(cd) if *functional => parameter_count_sem(&from_canonical_functional(&cd, &list(drop))?),
                Model::Canonical(cd) if *sem => parameter_count_sem(&from_canonical(&cd)?),
                Model::Canonical(cd) => parameter_count_diagram(&cd.diagram),
                Model::InfluenceDiagram(d) if !*sem && !*functional => parameter_count_diagram(&d),
                Model::Sem(m) if !*sem && !*functional => parameter_count_sem(&m),
                other if *sem || *functional => return Err(wrong_kind(file, &other, "a canonical diagram")),
                other => return Err(wrong_kind(file, &other, "a diagram or structural model")),
            };
            print_count(&count, *per_node, out);
            Ok(EXIT_OK)
        }
        Command::Infer {
            file,
            act,
            evidence,
            query,
            method,
            order,
        } => {
            let act = Act::from(space::parse_assignment(act)?);
            let evidence = space::parse_assignment(evidence)?;
            let q = Query::parse(query)?;
            let method = match method {
                MethodArg::Auto => InferenceMethod::Auto,
                MethodArg::Enumeration => InferenceMethod::Enumeration,
                MethodArg::Elimination => InferenceMethod::Elimination(order.as_deref().map(space::split_top_level)),
            };
            let dist = match format::read(file)? {
                Model::InfluenceDiagram(d) => d.infer_with(&act, &evidence, &q.vars, &method)?,
                Model::Canonical(cd) => cd.diagram.infer_with(&act, &evidence, &q.vars, &method)?,
                Model::WorldTable(t) => posterior(&q.vars, &evidence, |vars| t.induced_distribution(&act, vars))?,
                Model::Sem(m) => posterior(&q.vars, &evidence, |vars| m.distribution(&act, vars))?,
            };
            q.print(&dist, out)?;
            Ok(EXIT_OK)
        }
        Command::Cf {
            file,
            factual,
            worlds,
            query,
            full,
        } => {
            let cd = canonical(file)?;
            let (factual_act, factual_evidence) = split_act(&cd, factual)?;
            let worlds = worlds
                .iter()
                .map(|w| split_act(&cd, w).map(|(act, evidence)| CounterfactualWorld { act, evidence }))
                .collect::<Result<Vec<_>>>()?;
            let q = Query::parse(query)?;
            let cq = CounterfactualQuery {
                factual_act,
                factual_evidence,
                worlds,
                query: q.vars.clone(),
            };
            let mode = if *full { TwinMode::Full } else { TwinMode::Minimal };
            q.print(&evaluate_with(&cd, &cq, mode)?, out)?;
            Ok(EXIT_OK)
        }
        Command::Voi { file, var, policy } => {
            let (d, responsive) = decision_model(file)?;
            let voi = value_of_information(&d, var, &responsive)?;
            line(out, format!("{voi:.9}"));
            if *policy {
                for r in solve_observing(&d, var, &responsive)?.rules {
                    line(
                        out,
                        format!(
                            "{} {:.9} {} {:.9}",
                            space::format_assignment(&r.context),
                            r.probability,
                            r.act,
                            r.expected_utility
                        ),
                    );
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn line(out: &mut String, s: impl AsRef<str>) {
    out.push_str(s.as_ref());
    out.push('\n');
}

fn verdict(out: &mut String, yes: bool, pos: &str, neg: &str) -> i32 {
    line(out, if yes { pos } else { neg });
    if yes {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn list(arg: &Option<String>) -> Vec<String> {
    arg.as_deref().map(space::split_top_level).unwrap_or_default()
}

fn wrong_kind(path: &Path, m: &Model, want: &str) -> Error {
    Error::Input(format!("{} holds a {} model; this command needs {want}", path.display(), m.tag()))
}

fn world(path: &Path) -> Result<WorldTable> {
    match format::read(path)? {
        Model::WorldTable(t) => Ok(t),
        other => Err(wrong_kind(path, &other, "a world table")),
    }
}

/// A canonical diagram, building one when given a priced world table.
fn canonical(path: &Path) -> Result<CanonicalDiagram> {
    match format::read(path)? {
        Model::Canonical(cd) => Ok(cd),
        Model::WorldTable(t) => to_canonical(&t, None),
        Model::Sem(m) => to_canonical_from_sem(&m),
        other => Err(wrong_kind(path, &other, "a canonical diagram")),
    }
}

/// A diagram with a utility node, plus the variables known to be responsive.
fn decision_model(path: &Path) -> Result<(InfluenceDiagram, BTreeSet<String>)> {
    match format::read(path)? {
        Model::Canonical(cd) => Ok((cd.diagram, cd.responsive)),
        Model::InfluenceDiagram(d) => Ok((d, BTreeSet::new())),
        other => Err(wrong_kind(path, &other, "an influence diagram")),
    }
}

fn emit(model: &Model, output: Option<&Path>, out: &mut String) -> Result<()> {
    match output {
        Some(p) => format::write(p, model),
        None => {
            out.push_str(&format::serialize(model));
            Ok(())
        }
    }
}

fn print_count(count: &ParamCount, per_node: bool, out: &mut String) {
    line(out, count.total.to_string());
    if per_node {
        for (id, n) in &count.per_node {
            line(out, format!("{id} {n}"));
        }
    }
}

/// Decision keys of an assignment form the act; the rest is evidence.
fn split_act(cd: &CanonicalDiagram, text: &str) -> Result<(Act, Assignment)> {
    let decisions = cd.decision_ids();
    let mut act = Act::new();
    let mut evidence = Assignment::new();
    for (k, v) in space::parse_assignment(text)? {
        if decisions.contains(&k) {
            act.insert(k, v);
        } else {
            evidence.insert(k, v);
        }
    }
    Ok((act, evidence))
}

/// Conditions a distribution read over query plus evidence variables.
fn posterior<F>(query: &[String], evidence: &Assignment, dist: F) -> Result<Distribution>
where
    F: FnOnce(&[String]) -> Result<Distribution>,
{
    let mut vars: Vec<String> = query.to_vec();
    for k in evidence.keys() {
        if !vars.contains(k) {
            vars.push(k.clone());
        }
    }
    dist(&vars)?.condition(evidence)?.marginal(query)
}

/// Either bare variable ids or a conjunction of `id=x` events.
struct Query {
    vars: Vec<String>,
    event: Option<Assignment>,
}

impl Query {
    fn parse(text: &str) -> Result<Self> {
        let items = space::split_top_level(text);
        if items.is_empty() {
            return Err(Error::Input("empty query".into()));
        }
        let events = items.iter().filter(|i| i.contains('=')).count();
        if events == 0 {
            return Ok(Query { vars: items, event: None });
        }
        if events != items.len() {
            return Err(Error::Input("query mixes bare ids with `id=x` events".into()));
        }
        let event = space::parse_assignment(text)?;
        Ok(Query {
            vars: event.keys().cloned().collect(),
            event: Some(event),
        })
    }

    fn print(&self, dist: &Distribution, out: &mut String) -> Result<()> {
        match &self.event {
            Some(e) => {
                // results may name query variables by their world, as in `c'`
                let renamed: Assignment = self
                    .vars
                    .iter()
                    .zip(dist.variables())
                    .map(|(q, d)| (d.clone(), e[q].clone()))
                    .collect();
                line(out, format!("{:.9}", dist.prob(&renamed)?))
            }
            None => out.push_str(&dist.render()),
        }
        Ok(())
    }
}

fn mapping(t: &WorldTable, targets: &str, args: &str, out: &mut String) -> Result<i32> {
    let (mv, report) = mapping_report(t, space::split_top_level(targets), space::split_top_level(args))?;
    let arg_cards: Vec<usize> = mv.args().iter().map(|a| a.instances.len()).collect();
    let out_cards: Vec<usize> = mv.targets().iter().map(|x| x.instances.len()).collect();
    line(out, format!("{} {}", mv.id(), mv.len()));
    for i in 0..mv.len() {
        let mut cells = Vec::new();
        for cfg in Configs::new(&arg_cards) {
            let y: Vec<String> = mv
                .args()
                .iter()
                .zip(&cfg)
                .map(|(a, &v)| a.instances[v].clone())
                .collect();
            let x = space::decode(mv.apply(i, &cfg)?, &out_cards);
            let x: Vec<String> = mv
                .targets()
                .iter()
                .zip(&x)
                .map(|(t, &v)| t.instances[v].clone())
                .collect();
            cells.push(format!("{}>{}", y.join(","), x.join(",")));
        }
        let label = mv.labels().map(|l| format!(" ({})", l[i])).unwrap_or_default();
        line(out, format!("{i} {}{label} {}", mv.instance_name(i)?, cells.join(" ")));
    }
    let mut code = EXIT_OK;
    for (state, r) in report {
        match r {
            Ok(i) => line(out, format!("state {state} {}", mv.instance_name(i)?)),
            Err(e) => {
                code = EXIT_NEGATIVE;
                line(out, format!("state {state} undefined: {e}"));
            }
        }
    }
    Ok(code)
}

fn validate(path: &Path, out: &mut String) -> Result<i32> {
    let model = match format::read(path) {
        Ok(m) => m,
        Err(Error::InvalidDiagram(v)) | Err(Error::NotCanonical(v)) => {
            for x in v {
                line(out, x.to_string());
            }
            return Ok(EXIT_NEGATIVE);
        }
        Err(e) if matches!(e.kind(), ErrorKind::Model | ErrorKind::Form | ErrorKind::Definedness) => {
            line(out, e.to_string());
            return Ok(EXIT_NEGATIVE);
        }
        Err(e) => return Err(e),
    };
    let violations = match &model {
        Model::InfluenceDiagram(d) => d.validate(),
        _ => Vec::new(),
    };
    if !violations.is_empty() {
        for x in violations {
            line(out, x.to_string());
        }
        return Ok(EXIT_NEGATIVE);
    }
    let summary = match &model {
        Model::WorldTable(t) => format!(
            "{} decisions, {} chance variables, {} states",
            t.decisions().len(),
            t.chances().len(),
            t.states().len()
        ),
        Model::InfluenceDiagram(d) => format!("{} nodes", d.nodes().len()),
        Model::Canonical(cd) => format!("{} nodes, {} responsive", cd.diagram.nodes().len(), cd.responsive.len()),
        Model::Sem(m) => format!("{} variables, {} disturbances", m.variables().len(), m.disturbances().len()),
    };
    line(out, format!("valid {}: {summary}", model.tag()));
    Ok(EXIT_OK)
}
