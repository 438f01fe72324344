//! Mapping variables `X(Y)`: chance variables whose instances are the total
//! functions from joint instances of `Y` to joint instances of `X`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::space::{self, parse_set, Assignment, Configs, IDLE};
use crate::worlds::WorldTable;

/// Largest mapping instance space that will be materialized.
pub const MAX_MAPPING_INSTANCES: usize = 4096;

/// Response-type names for a binary target of a binary argument, by
/// canonical index.
pub const RESPONSE_LABELS: [&str; 4] = ["always taker", "complier", "defier", "never taker"];

/// A target or argument of a mapping variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappedVar {
    pub id: String,
    pub instances: Vec<String>,
}

impl MappedVar {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(id: impl Into<String>, instances: I) -> Self {
        MappedVar {
            id: id.into(),
            instances: instances.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingVariable {
    id: String,
    targets: Vec<MappedVar>,
    args: Vec<MappedVar>,
    /// Argument that is the atomic intervention on the (single) target.
    collapsed: Option<usize>,
    /// For the collapsed argument: instance index → forced target index.
    forced: Vec<Option<usize>>,
    free_args: Vec<usize>,
    free_cards: Vec<usize>,
    out_card: usize,
    count: usize,
    labels: Option<Vec<String>>,
}

impl MappingVariable {
    /// All mappings from `args` to `targets`, in canonical order: output
    /// tuples compared lexicographically, first argument configuration most
    /// significant. `collapsed` names the argument that atomically intervenes
    /// on the single target; its `set:` columns are fixed, only `idle` is free.
    pub fn enumerate(targets: Vec<MappedVar>, args: Vec<MappedVar>, collapsed: Option<usize>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Input("mapping variable needs at least one target".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in targets.iter().chain(&args) {
            if !seen.insert(v.id.as_str()) {
                return Err(Error::Input(format!("`{}` appears twice in a mapping variable", v.id)));
            }
            if v.instances.is_empty() {
                return Err(Error::Input(format!("`{}` has no instances", v.id)));
            }
        }
        let mut forced = Vec::new();
        if let Some(k) = collapsed {
            if targets.len() != 1 || k >= args.len() {
                return Err(Error::Input("collapse needs a single target and a valid argument".into()));
            }
            let target = &targets[0];
            for inst in &args[k].instances {
                if inst == IDLE {
                    forced.push(None);
                    continue;
                }
                let t = parse_set(inst)
                    .and_then(|s| target.instances.iter().position(|x| x == s))
                    .ok_or_else(|| {
                        Error::Input(format!(
                            "`{}` is not an atomic intervention on `{}`: instance `{inst}`",
                            args[k].id, target.id
                        ))
                    })?;
                forced.push(Some(t));
            }
            if forced.iter().filter(|f| f.is_none()).count() != 1 {
                return Err(Error::Input(format!("`{}` must have exactly one idle instance", args[k].id)));
            }
        }
        let free_args: Vec<usize> = (0..args.len()).filter(|&i| Some(i) != collapsed).collect();
        let free_cards: Vec<usize> = free_args.iter().map(|&i| args[i].instances.len()).collect();
        let out_cards: Vec<usize> = targets.iter().map(|t| t.instances.len()).collect();
        let too_big = || {
            Error::TooLarge(format!(
                "mapping variable has more than {MAX_MAPPING_INSTANCES} instances"
            ))
        };
        let out_card = space::space_size(&out_cards).ok_or_else(too_big)?;
        let a = space::space_size(&free_cards).ok_or_else(too_big)?;
        let count = u32::try_from(a)
            .ok()
            .and_then(|a| out_card.checked_pow(a))
            .filter(|&n| n <= MAX_MAPPING_INSTANCES)
            .ok_or_else(too_big)?;
        let labels = (out_card == 2 && a == 2 && targets.len() == 1)
            .then(|| RESPONSE_LABELS.iter().map(|s| s.to_string()).collect());
        Ok(MappingVariable {
            id: mapping_id(&targets, &args),
            targets,
            args,
            collapsed,
            forced,
            free_args,
            free_cards,
            out_card,
            count,
            labels,
        })
    }

    /// `X(Y)` over a world table. Every chance argument needs an atomic
    /// intervention among the decisions.
    pub fn enumerate_for<I, S, J, T>(table: &WorldTable, x: I, y: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let (xs, ys) = resolve(table, x, y)?;
        let atomic = table.atomic_interventions();
        for &g in &ys {
            if !table.is_decision(g) && !atomic.contains_key(&table.var(g).id) {
                return Err(Error::Definedness {
                    mapping: id_of(table, &xs, &ys),
                    state: None,
                    reason: format!("argument `{}` has no atomic intervention", table.var(g).id),
                });
            }
        }
        Self::raw(table, &xs, &ys)
    }

    pub(crate) fn raw(table: &WorldTable, xs: &[usize], ys: &[usize]) -> Result<Self> {
        let mv = |g: usize| MappedVar::new(table.var(g).id.clone(), table.var(g).instances.clone());
        let collapsed = collapse_position(table, xs, ys);
        Self::enumerate(
            xs.iter().map(|&g| mv(g)).collect(),
            ys.iter().map(|&g| mv(g)).collect(),
            collapsed,
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn targets(&self) -> &[MappedVar] {
        &self.targets
    }

    pub fn args(&self) -> &[MappedVar] {
        &self.args
    }

    pub fn collapsed(&self) -> Option<&str> {
        self.collapsed.map(|k| self.args[k].id.as_str())
    }

    /// Number of instances.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Number of argument configurations a table is free to map.
    pub fn free_configs(&self) -> usize {
        space::space_size(&self.free_cards).unwrap_or(0)
    }

    /// Joint target instance count.
    pub fn output_card(&self) -> usize {
        self.out_card
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Function table of instance `index`: one joint target index per free
    /// argument configuration.
    pub fn table(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.count {
            return Err(Error::Input(format!(
                "mapping instance {index} out of range for {} ({} instances)",
                self.id, self.count
            )));
        }
        Ok(space::decode(index, &vec![self.out_card; self.free_configs()]))
    }

    pub fn index_of_table(&self, table: &[usize]) -> Option<usize> {
        if table.len() != self.free_configs() || table.iter().any(|&v| v >= self.out_card) {
            return None;
        }
        Some(space::encode(table, &vec![self.out_card; table.len()]))
    }

    /// Instance symbol: the output tuple, e.g. `[yes,no]`.
    pub fn instance_name(&self, index: usize) -> Result<String> {
        let table = self.table(index)?;
        let outs: Vec<String> = table.iter().map(|&o| self.output_label(o)).collect();
        Ok(format!("[{}]", outs.join(",")))
    }

    pub fn instance_names(&self) -> Vec<String> {
        (0..self.count).map(|i| self.instance_name(i).expect("in range")).collect()
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        (0..self.count).find(|&i| self.instance_name(i).ok().as_deref() == Some(name))
    }

    fn output_label(&self, joint: usize) -> String {
        let cards: Vec<usize> = self.targets.iter().map(|t| t.instances.len()).collect();
        let vals = space::decode(joint, &cards);
        let syms: Vec<&str> = self
            .targets
            .iter()
            .zip(&vals)
            .map(|(t, &v)| t.instances[v].as_str())
            .collect();
        space::joint_label(&syms)
    }

    /// Position of an argument configuration among the free ones, or the
    /// forced output when the collapsed argument is not idle.
    pub(crate) fn locate(&self, arg_values: &[usize]) -> std::result::Result<usize, usize> {
        if let Some(k) = self.collapsed {
            if let Some(t) = self.forced[arg_values[k]] {
                return Err(t);
            }
        }
        let free: Vec<usize> = self.free_args.iter().map(|&i| arg_values[i]).collect();
        Ok(space::encode(&free, &self.free_cards))
    }

    /// Joint target index for instance `index` at the argument configuration
    /// `arg_values` (instance indices in argument order).
    pub fn apply(&self, index: usize, arg_values: &[usize]) -> Result<usize> {
        if arg_values.len() != self.args.len()
            || arg_values.iter().zip(&self.args).any(|(&v, a)| v >= a.instances.len())
        {
            return Err(Error::Input(format!("bad argument configuration for {}", self.id)));
        }
        let table = self.table(index)?;
        Ok(match self.locate(arg_values) {
            Ok(pos) => table[pos],
            Err(forced) => forced,
        })
    }

    pub fn apply_named(&self, index: usize, args: &Assignment) -> Result<Assignment> {
        let mut values = Vec::with_capacity(self.args.len());
        for a in &self.args {
            let inst = args
                .get(&a.id)
                .ok_or_else(|| Error::Input(format!("argument `{}` not assigned", a.id)))?;
            values.push(a.instances.iter().position(|x| x == inst).ok_or_else(|| {
                Error::UnknownInstance {
                    variable: a.id.clone(),
                    instance: inst.clone(),
                }
            })?);
        }
        let out = self.apply(index, &values)?;
        let cards: Vec<usize> = self.targets.iter().map(|t| t.instances.len()).collect();
        Ok(self
            .targets
            .iter()
            .zip(space::decode(out, &cards))
            .map(|(t, v)| (t.id.clone(), t.instances[v].clone()))
            .collect())
    }

    /// Rebuilds from serialized parts.
    pub fn from_parts(targets: Vec<MappedVar>, args: Vec<MappedVar>, collapsed: Option<&str>) -> Result<Self> {
        let k = match collapsed {
            None => None,
            Some(id) => Some(
                args.iter()
                    .position(|a| a.id == id)
                    .ok_or_else(|| Error::Input(format!("collapsed argument `{id}` is not an argument")))?,
            ),
        };
        Self::enumerate(targets, args, k)
    }
}

/// Node id of `X(Y)`: `t(r,t_hat)`, or `(t,c)(r)` for joint targets.
pub fn mapping_id(targets: &[MappedVar], args: &[MappedVar]) -> String {
    let t: Vec<&str> = targets.iter().map(|v| v.id.as_str()).collect();
    let a: Vec<&str> = args.iter().map(|v| v.id.as_str()).collect();
    format!("{}({})", space::joint_label(&t), a.join(","))
}

fn resolve<I, S, J, T>(table: &WorldTable, x: I, y: J) -> Result<(Vec<usize>, Vec<usize>)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
    J: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let xs = table.chance_globals(x)?;
    let ys = table.globals(y)?;
    if let Some(&g) = xs.iter().find(|g| ys.contains(g)) {
        return Err(Error::Input(format!("`{}` is both target and argument", table.var(g).id)));
    }
    if xs.is_empty() {
        return Err(Error::Input("mapping variable needs at least one target".into()));
    }
    Ok((xs, ys))
}

fn id_of(table: &WorldTable, xs: &[usize], ys: &[usize]) -> String {
    let mv = |g: &usize| MappedVar::new(table.var(*g).id.clone(), Vec::<String>::new());
    mapping_id(&xs.iter().map(mv).collect::<Vec<_>>(), &ys.iter().map(mv).collect::<Vec<_>>())
}

fn collapse_position(table: &WorldTable, xs: &[usize], ys: &[usize]) -> Option<usize> {
    if xs.len() != 1 {
        return None;
    }
    let atomic = table.atomic_interventions();
    let hat = atomic.get(&table.var(xs[0]).id)?;
    ys.iter().position(|&g| &table.var(g).id == hat)
}

/// `X(Y)` adjoined to a world table: the instance it takes in each possible
/// state.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldMapping {
    pub variable: MappingVariable,
    pub by_state: BTreeMap<u32, usize>,
}

impl WorldMapping {
    pub fn for_state(&self, state: u32) -> Option<usize> {
        self.by_state.get(&state).copied()
    }
}

/// Per-state outcome of reading `X(Y)` off a table; impossible states are
/// omitted.
pub fn mapping_report<I, S, J, T>(
    table: &WorldTable,
    x: I,
    y: J,
) -> Result<(MappingVariable, BTreeMap<u32, Result<usize>>)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
    J: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let (xs, ys) = resolve(table, x, y)?;
    let mv = MappingVariable::raw(table, &xs, &ys)?;
    let out_cards: Vec<usize> = xs.iter().map(|&g| table.var(g).card()).collect();
    let mut report = BTreeMap::new();
    for &s in table.possible_states() {
        report.insert(table.states()[s].id, read_state(table, &mv, &xs, &ys, &out_cards, s));
    }
    Ok((mv, report))
}

pub(crate) fn read_state(
    table: &WorldTable,
    mv: &MappingVariable,
    xs: &[usize],
    ys: &[usize],
    out_cards: &[usize],
    s: usize,
) -> Result<usize> {
    let state = table.states()[s].id;
    let mut fun: Vec<Option<usize>> = vec![None; mv.free_configs()];
    let mut arg_values = vec![0; ys.len()];
    let mut out_values = vec![0; xs.len()];
    for a in 0..table.act_count() {
        for (slot, &g) in arg_values.iter_mut().zip(ys) {
            *slot = table.value(s, a, g);
        }
        for (slot, &g) in out_values.iter_mut().zip(xs) {
            *slot = table.value(s, a, g);
        }
        let out = space::encode(&out_values, out_cards);
        match mv.locate(&arg_values) {
            Ok(pos) => match fun[pos] {
                Some(prev) if prev != out => {
                    return Err(Error::NotAFunction {
                        mapping: mv.id().to_owned(),
                        state: Some(state),
                        reason: "two acts agree on the arguments but not on the targets".into(),
                    })
                }
                _ => fun[pos] = Some(out),
            },
            Err(forced) if forced != out => {
                return Err(Error::NotAFunction {
                    mapping: mv.id().to_owned(),
                    state: Some(state),
                    reason: format!("`{}` does not force its target", mv.collapsed().unwrap_or("?")),
                })
            }
            Err(_) => {}
        }
    }
    let table_row: Vec<usize> = fun
        .iter()
        .enumerate()
        .map(|(pos, v)| {
            v.ok_or_else(|| {
                let free: Vec<usize> = space::decode(pos, &mv.free_cards);
                let cfg: Vec<String> = mv
                    .free_args
                    .iter()
                    .zip(&free)
                    .map(|(&i, &v)| format!("{}={}", mv.args[i].id, mv.args[i].instances[v]))
                    .collect();
                Error::Definedness {
                    mapping: mv.id().to_owned(),
                    state: Some(state),
                    reason: format!("no act realizes {{{}}}", cfg.join(", ")),
                }
            })
        })
        .collect::<Result<_>>()?;
    Ok(mv.index_of_table(&table_row).expect("table in range"))
}

/// For each possible state, the instance of `X(Y)` induced by ranging over
/// the acts.
pub fn mapping_from_world<I, S, J, T>(table: &WorldTable, x: I, y: J) -> Result<WorldMapping>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
    J: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let (variable, report) = mapping_report(table, x, y)?;
    let mut by_state = BTreeMap::new();
    for (s, r) in report {
        by_state.insert(s, r?);
    }
    Ok(WorldMapping { variable, by_state })
}

/// Whether `X(Y)` is unresponsive to the decisions. The mapping in state `S`
/// under act `D` is read by substitution: decision arguments are replaced by
/// the configuration and chance arguments are forced through their atomic
/// interventions.
pub fn mapping_is_unresponsive<I, S, J, T>(table: &WorldTable, x: I, y: J) -> Result<bool>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
    J: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let (xs, ys) = resolve(table, x, y)?;
    let atomic = table.atomic_interventions();
    let mut hats = Vec::with_capacity(ys.len());
    for &g in &ys {
        if table.is_decision(g) {
            hats.push(None);
            continue;
        }
        let id = &table.var(g).id;
        let hat = atomic.get(id).ok_or_else(|| Error::Definedness {
            mapping: id_of(table, &xs, &ys),
            state: None,
            reason: format!("argument `{id}` has no atomic intervention"),
        })?;
        let hg = table.global(hat)?;
        // set:<k> has instance index given by name lookup
        let set_index: Vec<usize> = table
            .var(g)
            .instances
            .iter()
            .map(|i| table.var(hg).index_of(&space::set_instance(i)).expect("atomic shape"))
            .collect();
        hats.push(Some((hg, set_index)));
    }
    let idle_of = |hg: usize| table.var(hg).index_of(IDLE).expect("atomic shape");
    let cards: Vec<usize> = ys.iter().map(|&g| table.var(g).card()).collect();
    let configs: Vec<Vec<usize>> = Configs::new(&cards).collect();
    let nd = table.decisions().len();
    for &s in table.possible_states() {
        let mut reference: Option<Vec<Option<Vec<usize>>>> = None;
        for a in 0..table.act_count() {
            let mut fun = Vec::with_capacity(configs.len());
            for cfg in &configs {
                let mut act: Vec<usize> = table.act_values(a).to_vec();
                let mut ok = true;
                for (&g, &v) in ys.iter().zip(cfg) {
                    if table.is_decision(g) {
                        act[g] = v;
                    }
                }
                for ((&_g, &v), hat) in ys.iter().zip(cfg).zip(&hats) {
                    if let Some((hg, set_index)) = hat {
                        let pos = ys.iter().position(|&y| y == *hg);
                        match pos {
                            Some(p) if cfg[p] != idle_of(*hg) && cfg[p] != set_index[v] => ok = false,
                            _ => act[*hg] = set_index[v],
                        }
                    }
                }
                debug_assert!(act.len() == nd);
                fun.push(ok.then(|| {
                    let a2 = table.act_of_values(&act);
                    xs.iter().map(|&g| table.value(s, a2, g)).collect()
                }));
            }
            match &reference {
                None => reference = Some(fun),
                Some(r) if *r != fun => return Ok(false),
                Some(_) => {}
            }
        }
    }
    Ok(true)
}

/// Checks the equivalence `X ↛_Y D ⇔ X(Y) ↛ D` on one table.
pub fn verify_mapping_equivalence<I, S, J, T>(table: &WorldTable, x: I, y: J) -> Result<bool>
where
    I: IntoIterator<Item = S> + Clone,
    S: AsRef<str>,
    J: IntoIterator<Item = T> + Clone,
    T: AsRef<str>,
{
    let rhs = mapping_is_unresponsive(table, x.clone(), y.clone())?;
    let lhs = table.is_unresponsive_limited(x, y)?;
    Ok(lhs == rhs)
}
