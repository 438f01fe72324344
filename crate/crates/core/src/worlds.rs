//! Decision problems as explicit world tables.
//!
//! A table lists every state of the world and, for each act, the instance
//! every chance variable takes. Responsiveness, causes and interventions are
//! all decided by exhaustive quantification over possible states and act pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::space::{self, parse_set, Act, Assignment, Configs, IDLE};

/// Default cap on the number of variables a cause search may range over.
pub const DEFAULT_CAUSE_SEARCH_LIMIT: usize = 16;

const PRIOR_TOLERANCE: f64 = 1e-9;
const MAX_ACTS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Chance,
    Decision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub id: String,
    pub kind: VarKind,
    pub instances: Vec<String>,
}

impl Variable {
    pub fn new<I, S>(id: impl Into<String>, kind: VarKind, instances: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Variable {
            id: id.into(),
            kind,
            instances: instances.into_iter().map(Into::into).collect(),
        }
    }

    pub fn chance<I: IntoIterator<Item = S>, S: Into<String>>(id: impl Into<String>, instances: I) -> Self {
        Self::new(id, VarKind::Chance, instances)
    }

    pub fn decision<I: IntoIterator<Item = S>, S: Into<String>>(id: impl Into<String>, instances: I) -> Self {
        Self::new(id, VarKind::Decision, instances)
    }

    pub fn card(&self) -> usize {
        self.instances.len()
    }

    pub fn index_of(&self, instance: &str) -> Option<usize> {
        self.instances.iter().position(|i| i == instance)
    }

    fn instance_index(&self, instance: &str) -> Result<usize> {
        self.index_of(instance).ok_or_else(|| Error::UnknownInstance {
            variable: self.id.clone(),
            instance: instance.to_owned(),
        })
    }
}

/// Belief about a state: a probability, or just whether it is possible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prior {
    Mass(f64),
    Possible(bool),
}

impl Prior {
    pub fn is_possible(&self) -> bool {
        match *self {
            Prior::Mass(p) => p > 0.0,
            Prior::Possible(b) => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub id: u32,
    pub label: Option<String>,
    pub prior: Prior,
    /// `outcomes[act][chance]`: instance index of every chance variable under
    /// every act, acts in mixed-radix order over the decisions.
    pub outcomes: Vec<Vec<usize>>,
}

/// A minimal cause set together with the instances of it that limit `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceCause {
    pub variables: BTreeSet<String>,
    pub instances: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldTable {
    decisions: Vec<Variable>,
    chances: Vec<Variable>,
    states: Vec<WorldState>,
    act_cards: Vec<usize>,
    act_values: Vec<Vec<usize>>,
    possible: Vec<usize>,
    priced: bool,
    /// Flattened `[state][act][variable]`, decisions first.
    cells: Vec<usize>,
    index: HashMap<String, usize>,
    state_index: HashMap<u32, usize>,
}

impl WorldTable {
    pub fn new(decisions: Vec<Variable>, chances: Vec<Variable>, states: Vec<WorldState>) -> Result<Self> {
        let mut index = HashMap::new();
        for (g, v) in decisions.iter().chain(&chances).enumerate() {
            if v.id.is_empty() {
                return Err(Error::InvalidModel("empty variable id".into()));
            }
            if index.insert(v.id.clone(), g).is_some() {
                return Err(Error::InvalidModel(format!("duplicate variable id `{}`", v.id)));
            }
            if v.instances.is_empty() {
                return Err(Error::InvalidModel(format!("`{}` has no instances", v.id)));
            }
            let uniq: HashSet<&String> = v.instances.iter().collect();
            if uniq.len() != v.instances.len() {
                return Err(Error::InvalidModel(format!("`{}` repeats an instance", v.id)));
            }
        }
        if let Some(v) = decisions.iter().find(|v| v.kind != VarKind::Decision) {
            return Err(Error::InvalidModel(format!("`{}` listed as a decision", v.id)));
        }
        if let Some(v) = chances.iter().find(|v| v.kind != VarKind::Chance) {
            return Err(Error::InvalidModel(format!("`{}` listed as a chance variable", v.id)));
        }
        let all_cards: Vec<u128> = decisions.iter().chain(&chances).map(|v| v.card() as u128).collect();
        if all_cards.iter().try_fold(1u128, |a, &c| a.checked_mul(c)).is_none() {
            return Err(Error::TooLarge("joint variable space exceeds 128-bit keys".into()));
        }

        let act_cards: Vec<usize> = decisions.iter().map(Variable::card).collect();
        let n_acts = space::space_size(&act_cards)
            .filter(|&n| n <= MAX_ACTS)
            .ok_or_else(|| Error::TooLarge(format!("more than {MAX_ACTS} acts")))?;
        let act_values: Vec<Vec<usize>> = Configs::new(&act_cards).collect();

        if states.is_empty() {
            return Err(Error::InvalidModel("world table has no states".into()));
        }
        let priced = matches!(states[0].prior, Prior::Mass(_));
        let mut state_index = HashMap::new();
        let mut total = 0.0;
        for (k, s) in states.iter().enumerate() {
            if state_index.insert(s.id, k).is_some() {
                return Err(Error::InvalidModel(format!("duplicate state id {}", s.id)));
            }
            match s.prior {
                Prior::Mass(p) => {
                    if !priced {
                        return Err(Error::InvalidModel("states mix priors and possible-flags".into()));
                    }
                    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                        return Err(Error::InvalidModel(format!("state {}: prior {p} outside [0,1]", s.id)));
                    }
                    total += p;
                }
                Prior::Possible(_) if priced => {
                    return Err(Error::InvalidModel("states mix priors and possible-flags".into()));
                }
                Prior::Possible(_) => {}
            }
            if s.outcomes.len() != n_acts {
                return Err(Error::InvalidModel(format!(
                    "state {}: {} outcome rows for {} acts",
                    s.id,
                    s.outcomes.len(),
                    n_acts
                )));
            }
            for row in &s.outcomes {
                if row.len() != chances.len() {
                    return Err(Error::InvalidModel(format!(
                        "state {}: outcome row has {} entries for {} chance variables",
                        s.id,
                        row.len(),
                        chances.len()
                    )));
                }
                for (v, &x) in chances.iter().zip(row) {
                    if x >= v.card() {
                        return Err(Error::InvalidModel(format!(
                            "state {}: instance index {x} out of range for `{}`",
                            s.id, v.id
                        )));
                    }
                }
            }
        }
        if priced && (total - 1.0).abs() > PRIOR_TOLERANCE {
            return Err(Error::InvalidModel(format!("state priors sum to {total}, not 1")));
        }
        let possible: Vec<usize> = (0..states.len()).filter(|&k| states[k].prior.is_possible()).collect();
        if possible.is_empty() {
            return Err(Error::InvalidModel("no state is possible".into()));
        }

        let nv = decisions.len() + chances.len();
        let mut cells = Vec::with_capacity(states.len() * n_acts * nv);
        for s in &states {
            for (a, row) in s.outcomes.iter().enumerate() {
                cells.extend_from_slice(&act_values[a]);
                cells.extend_from_slice(row);
            }
        }

        Ok(WorldTable {
            decisions,
            chances,
            states,
            act_cards,
            act_values,
            possible,
            priced,
            cells,
            index,
            state_index,
        })
    }

    pub fn builder() -> WorldTableBuilder {
        WorldTableBuilder::default()
    }

    pub fn decisions(&self) -> &[Variable] {
        &self.decisions
    }

    pub fn chances(&self) -> &[Variable] {
        &self.chances
    }

    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    pub fn is_priced(&self) -> bool {
        self.priced
    }

    pub fn act_count(&self) -> usize {
        self.act_values.len()
    }

    pub fn variable(&self, id: &str) -> Option<&Variable> {
        self.index.get(id).map(|&g| self.var(g))
    }

    /// Every act, in mixed-radix order over the decisions.
    pub fn acts(&self) -> impl Iterator<Item = Act> + '_ {
        (0..self.act_count()).map(move |a| self.act_at(a))
    }

    pub fn act_at(&self, a: usize) -> Act {
        self.decisions
            .iter()
            .zip(&self.act_values[a])
            .map(|(d, &i)| (d.id.clone(), d.instances[i].clone()))
            .collect()
    }

    pub fn act_index(&self, act: &Act) -> Result<usize> {
        if let Some((k, _)) = act.iter().find(|(k, _)| {
            self.index
                .get(*k)
                .is_none_or(|&g| self.var(g).kind != VarKind::Decision)
        }) {
            return Err(Error::Input(format!("`{k}` is not a decision of this table")));
        }
        let mut values = Vec::with_capacity(self.decisions.len());
        for d in &self.decisions {
            let inst = act
                .get(&d.id)
                .ok_or_else(|| Error::Input(format!("act does not assign decision `{}`", d.id)))?;
            values.push(d.instance_index(inst)?);
        }
        Ok(space::encode(&values, &self.act_cards))
    }

    pub fn outcome<I, S>(&self, state: u32, act: &Act, vars: I) -> Result<Assignment>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let s = self.state_pos(state)?;
        let a = self.act_index(act)?;
        let vars = self.globals(vars)?;
        Ok(vars
            .iter()
            .map(|&g| (self.var(g).id.clone(), self.var(g).instances[self.value(s, a, g)].clone()))
            .collect())
    }

    /// `X` is unresponsive to the decisions in states limited by `Y`.
    pub fn is_unresponsive_limited<I, S, J, T>(&self, x: I, y: J) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let x = self.chance_globals(x)?;
        let y = self.globals(y)?;
        Ok(self.unresponsive_idx(&x, &y))
    }

    pub fn is_responsive(&self, x: &str) -> Result<bool> {
        Ok(!self.is_unresponsive_limited([x], std::iter::empty::<&str>())?)
    }

    /// Chance variables responsive to the decisions, in declared order.
    pub fn responsive_set(&self) -> Vec<String> {
        let nd = self.decisions.len();
        (0..self.chances.len())
            .filter(|&i| !self.unresponsive_idx(&[nd + i], &[]))
            .map(|i| self.chances[i].id.clone())
            .collect()
    }

    /// Unresponsiveness limited to a set of joint instances of `Y`.
    pub fn is_unresponsive_in_instance_set<I, S, J, T>(&self, x: I, y: J, instances: &[Assignment]) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let x = self.chance_globals(x)?;
        let y = self.globals(y)?;
        let ky = Projection::new(self, &y);
        let mut keys = HashSet::new();
        for assignment in instances {
            if assignment.len() != y.len() || y.iter().any(|&g| !assignment.contains_key(&self.var(g).id)) {
                return Err(Error::Input(format!(
                    "instance {} is not an assignment over {}",
                    space::format_assignment(assignment),
                    space::format_set(y.iter().map(|&g| &self.var(g).id))
                )));
            }
            let values: Vec<usize> = y
                .iter()
                .map(|&g| self.var(g).instance_index(&assignment[&self.var(g).id]))
                .collect::<Result<_>>()?;
            keys.insert(ky.key_of(&values));
        }
        let bad = self.violating_keys(&x, &y);
        Ok(keys.iter().all(|k| !bad.contains(k)))
    }

    /// `X` unresponsive to the decision subset `Dsub` in states limited by `Y`.
    pub fn is_unresponsive_to_subset<I, S, J, T, K, U>(&self, x: I, dsub: J, y: K) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
        K: IntoIterator<Item = U>,
        U: AsRef<str>,
    {
        let x = self.chance_globals(x)?;
        let dsub = self.decision_globals(dsub)?;
        let mut y = self.globals(y)?;
        y.extend(self.decisions_outside(&dsub));
        Ok(self.unresponsive_idx(&x, &y))
    }

    pub fn find_causes(&self, x: &str) -> Result<Vec<BTreeSet<String>>> {
        CauseSearch::default().find_causes(self, x)
    }

    pub fn find_instance_causes(&self, x: &str) -> Result<Vec<InstanceCause>> {
        CauseSearch::default().find_instance_causes(self, x)
    }

    /// Decisions `I` act on the rest of the domain only through `X`.
    pub fn is_direct_intervention<I, S, J, T>(&self, i: I, x: J) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let i = self.decision_globals(i)?;
        let x = self.chance_globals(x)?;
        Ok(self.direct_idx(&i, &x))
    }

    /// `d` is an atomic intervention on `x`: a direct intervention with
    /// instances exactly `idle` and `set:<x̄>` where `set:<x̄>` forces `x = x̄`.
    pub fn is_atomic_intervention(&self, d: &str, x: &str) -> Result<bool> {
        let dg = self.decision_globals([d])?[0];
        let xg = self.chance_globals([x])?[0];
        Ok(self.atomic_idx(dg, xg))
    }

    /// Chance id → decision id of its atomic intervention. When several
    /// decisions qualify the first declared one wins.
    pub fn atomic_interventions(&self) -> BTreeMap<String, String> {
        let nd = self.decisions.len();
        let mut out = BTreeMap::new();
        for xi in 0..self.chances.len() {
            if let Some(d) = (0..nd).find(|&d| self.atomic_idx(d, nd + xi)) {
                out.insert(self.chances[xi].id.clone(), self.decisions[d].id.clone());
            }
        }
        out
    }

    /// Distribution over `vars` induced by the state prior under one act.
    pub fn induced_distribution<I, S>(&self, act: &Act, vars: I) -> Result<Distribution>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if !self.priced {
            return Err(Error::Unquantified);
        }
        let a = self.act_index(act)?;
        let vars = self.globals(vars)?;
        let mut masses = BTreeMap::new();
        for &s in &self.possible {
            let key: Vec<usize> = vars.iter().map(|&g| self.value(s, a, g)).collect();
            *masses.entry(key).or_insert(0.0) += self.mass(s);
        }
        Ok(Distribution::new(
            vars.iter().map(|&g| self.var(g).id.clone()).collect(),
            vars.iter().map(|&g| self.var(g).instances.clone()).collect(),
            masses,
        ))
    }

    // ---- crate-internal index API ----

    pub(crate) fn var(&self, g: usize) -> &Variable {
        let nd = self.decisions.len();
        if g < nd {
            &self.decisions[g]
        } else {
            &self.chances[g - nd]
        }
    }

    pub(crate) fn var_count(&self) -> usize {
        self.decisions.len() + self.chances.len()
    }

    pub(crate) fn is_decision(&self, g: usize) -> bool {
        g < self.decisions.len()
    }

    pub(crate) fn global(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(id.to_owned()))
    }

    pub(crate) fn globals<I, S>(&self, ids: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<usize> = Vec::new();
        for id in ids {
            let g = self.global(id.as_ref())?;
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(out)
    }

    pub(crate) fn chance_globals<I, S>(&self, ids: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let out = self.globals(ids)?;
        if let Some(&g) = out.iter().find(|&&g| self.is_decision(g)) {
            return Err(Error::Input(format!("`{}` is a decision, expected a chance variable", self.var(g).id)));
        }
        Ok(out)
    }

    pub(crate) fn decision_globals<I, S>(&self, ids: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let out = self.globals(ids)?;
        if let Some(&g) = out.iter().find(|&&g| !self.is_decision(g)) {
            return Err(Error::Input(format!("`{}` is not a decision", self.var(g).id)));
        }
        Ok(out)
    }

    fn decisions_outside(&self, dsub: &[usize]) -> Vec<usize> {
        (0..self.decisions.len()).filter(|d| !dsub.contains(d)).collect()
    }

    pub(crate) fn state_pos(&self, id: u32) -> Result<usize> {
        self.state_index.get(&id).copied().ok_or(Error::UnknownState(id))
    }

    pub(crate) fn possible_states(&self) -> &[usize] {
        &self.possible
    }

    pub(crate) fn mass(&self, s: usize) -> f64 {
        match self.states[s].prior {
            Prior::Mass(p) => p,
            Prior::Possible(_) => 0.0,
        }
    }

    pub(crate) fn act_values(&self, a: usize) -> &[usize] {
        &self.act_values[a]
    }

    pub(crate) fn act_of_values(&self, values: &[usize]) -> usize {
        space::encode(values, &self.act_cards)
    }

    #[inline]
    pub(crate) fn value(&self, s: usize, a: usize, g: usize) -> usize {
        let nv = self.var_count();
        self.cells[(s * self.act_count() + a) * nv + g]
    }

    pub(crate) fn unresponsive_idx(&self, x: &[usize], y: &[usize]) -> bool {
        let kx = Projection::new(self, x);
        let ky = Projection::new(self, y);
        let n_acts = self.act_count();
        if n_acts > 32 {
            let mut seen: HashMap<u128, u128> = HashMap::with_capacity(n_acts);
            for &s in &self.possible {
                seen.clear();
                for a in 0..n_acts {
                    let xv = kx.key(self, s, a);
                    if *seen.entry(ky.key(self, s, a)).or_insert(xv) != xv {
                        return false;
                    }
                }
            }
            return true;
        }
        let mut seen: Vec<(u128, u128)> = Vec::with_capacity(n_acts);
        for &s in &self.possible {
            seen.clear();
            for a in 0..n_acts {
                let (yk, xk) = (ky.key(self, s, a), kx.key(self, s, a));
                match seen.iter().find(|(k, _)| *k == yk) {
                    Some(&(_, v)) if v != xk => return false,
                    Some(_) => {}
                    None => seen.push((yk, xk)),
                }
            }
        }
        true
    }

    /// Keys of the `Y`-instances at which some possible state has two acts
    /// agreeing on `Y` but disagreeing on `X`.
    fn violating_keys(&self, x: &[usize], y: &[usize]) -> HashSet<u128> {
        let kx = Projection::new(self, x);
        let ky = Projection::new(self, y);
        let mut bad = HashSet::new();
        let mut seen: HashMap<u128, u128> = HashMap::new();
        for &s in &self.possible {
            seen.clear();
            for a in 0..self.act_count() {
                let (yk, xk) = (ky.key(self, s, a), kx.key(self, s, a));
                if *seen.entry(yk).or_insert(xk) != xk {
                    bad.insert(yk);
                }
            }
        }
        bad
    }

    pub(crate) fn direct_idx(&self, i: &[usize], x: &[usize]) -> bool {
        let rest = self.decisions_outside(i);
        let responsive = x.iter().all(|&xg| !self.unresponsive_idx(&[xg], &rest));
        if !responsive {
            return false;
        }
        let mut limit = x.to_vec();
        limit.extend(&rest);
        let nd = self.decisions.len();
        (0..self.chances.len()).all(|yi| self.unresponsive_idx(&[nd + yi], &limit))
    }

    pub(crate) fn atomic_idx(&self, d: usize, x: usize) -> bool {
        let (dv, xv) = (self.var(d), self.var(x));
        if dv.card() != xv.card() + 1 {
            return false;
        }
        // instance index of d -> forced instance index of x (None for idle)
        let mut forced: Vec<Option<usize>> = Vec::with_capacity(dv.card());
        let mut seen_idle = false;
        let mut seen_set = vec![false; xv.card()];
        for inst in &dv.instances {
            if inst == IDLE {
                if seen_idle {
                    return false;
                }
                seen_idle = true;
                forced.push(None);
            } else if let Some(k) = parse_set(inst).and_then(|t| xv.index_of(t)) {
                if seen_set[k] {
                    return false;
                }
                seen_set[k] = true;
                forced.push(Some(k));
            } else {
                return false;
            }
        }
        if !seen_idle || seen_set.iter().any(|&b| !b) {
            return false;
        }
        for &s in &self.possible {
            for a in 0..self.act_count() {
                if let Some(k) = forced[self.act_values[a][d]] {
                    if self.value(s, a, x) != k {
                        return false;
                    }
                }
            }
        }
        self.direct_idx(&[d], &[x])
    }

    /// Every inclusion-minimal `C ⊆ pool` with `x` unresponsive in states
    /// limited by `C`, by increasing size then lexicographic id order.
    pub(crate) fn minimal_limiting_sets(&self, x: usize, pool: &[usize], limit: usize) -> Result<Vec<Vec<usize>>> {
        let mut cands: Vec<usize> = pool.iter().copied().filter(|&g| g != x).collect();
        cands.sort_by(|&a, &b| self.var(a).id.cmp(&self.var(b).id));
        cands.dedup();
        if cands.len() > limit || cands.len() > 63 {
            return Err(Error::TooManyVariables {
                count: cands.len(),
                limit: limit.min(63),
            });
        }
        let mut found: Vec<u64> = Vec::new();
        let mut out = Vec::new();
        for k in 0..=cands.len() {
            for combo in Combinations::new(cands.len(), k) {
                let mask = combo.iter().fold(0u64, |m, &i| m | (1 << i));
                if found.iter().any(|&f| f & !mask == 0) {
                    continue;
                }
                let set: Vec<usize> = combo.iter().map(|&i| cands[i]).collect();
                if self.unresponsive_idx(&[x], &set) {
                    found.push(mask);
                    out.push(set);
                }
            }
        }
        Ok(out)
    }

    fn names(&self, set: &[usize]) -> BTreeSet<String> {
        set.iter().map(|&g| self.var(g).id.clone()).collect()
    }
}

/// Configurable exhaustive search for causes.
#[derive(Clone, Copy, Debug)]
pub struct CauseSearch {
    pub max_variables: usize,
}

impl Default for CauseSearch {
    fn default() -> Self {
        CauseSearch {
            max_variables: DEFAULT_CAUSE_SEARCH_LIMIT,
        }
    }
}

impl CauseSearch {
    pub fn new(max_variables: usize) -> Self {
        CauseSearch { max_variables }
    }

    /// All minimal cause sets of `x` with respect to the table's decisions.
    /// An unresponsive `x` yields exactly the empty set.
    pub fn find_causes(&self, table: &WorldTable, x: &str) -> Result<Vec<BTreeSet<String>>> {
        let xg = table.chance_globals([x])?[0];
        let pool: Vec<usize> = (0..table.var_count()).collect();
        let sets = table.minimal_limiting_sets(xg, &pool, self.max_variables)?;
        Ok(sets.iter().map(|s| table.names(s)).collect())
    }

    /// Variable sets `C` whose maximal set of instances limiting `x` is
    /// non-empty and is not the refinement of one already found for a
    /// subset of `C`. Each comes with that maximal instance set.
    pub fn find_instance_causes(&self, table: &WorldTable, x: &str) -> Result<Vec<InstanceCause>> {
        let xg = table.chance_globals([x])?[0];
        let mut cands: Vec<usize> = (0..table.var_count()).filter(|&g| g != xg).collect();
        cands.sort_by(|&a, &b| table.var(a).id.cmp(&table.var(b).id));
        if cands.len() > self.max_variables || cands.len() > 63 {
            return Err(Error::TooManyVariables {
                count: cands.len(),
                limit: self.max_variables.min(63),
            });
        }
        // limiting instances of every subset of the previous size, by mask
        let mut prev: HashMap<u64, HashSet<Vec<usize>>> = HashMap::new();
        let mut out = Vec::new();
        for k in 0..=cands.len() {
            let mut layer = HashMap::new();
            for combo in Combinations::new(cands.len(), k) {
                let mask = combo.iter().fold(0u64, |m, &i| m | (1 << i));
                let set: Vec<usize> = combo.iter().map(|&i| cands[i]).collect();
                let bad = table.violating_keys(&[xg], &set);
                let proj = Projection::new(table, &set);
                let cards: Vec<usize> = set.iter().map(|&g| table.var(g).card()).collect();
                let good: Vec<Vec<usize>> = Configs::new(&cards)
                    .filter(|cfg| !bad.contains(&proj.key_of(cfg)))
                    .collect();
                // a subset one smaller already limits x on the projections
                let covered = (0..combo.len()).any(|drop| {
                    let sub = &prev[&(mask & !(1 << combo[drop]))];
                    good.iter().all(|cfg| {
                        let mut c = cfg.clone();
                        c.remove(drop);
                        sub.contains(&c)
                    })
                });
                let keep = !good.is_empty() && !covered;
                layer.insert(mask, good.iter().cloned().collect::<HashSet<_>>());
                if !keep {
                    continue;
                }
                out.push(InstanceCause {
                    variables: table.names(&set),
                    instances: good
                        .iter()
                        .map(|cfg| {
                            set.iter()
                                .zip(cfg)
                                .map(|(&g, &v)| (table.var(g).id.clone(), table.var(g).instances[v].clone()))
                                .collect()
                        })
                        .collect(),
                });
            }
            prev = layer;
        }
        Ok(out)
    }
}

/// Packs the values of a variable subset into one integer key.
struct Projection {
    vars: Vec<usize>,
    strides: Vec<u128>,
}

impl Projection {
    fn new(table: &WorldTable, vars: &[usize]) -> Self {
        let mut strides = vec![1u128; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * table.var(vars[i + 1]).card() as u128;
        }
        Projection {
            vars: vars.to_vec(),
            strides,
        }
    }

    #[inline]
    fn key(&self, table: &WorldTable, s: usize, a: usize) -> u128 {
        self.vars
            .iter()
            .zip(&self.strides)
            .map(|(&g, &st)| table.value(s, a, g) as u128 * st)
            .sum()
    }

    fn key_of(&self, values: &[usize]) -> u128 {
        values.iter().zip(&self.strides).map(|(&v, &st)| v as u128 * st).sum()
    }
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            cur: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - k + i {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Builds a table from instance names.
#[derive(Debug, Default)]
pub struct WorldTableBuilder {
    decisions: Vec<Variable>,
    chances: Vec<Variable>,
    states: Vec<StateRow>,
}

/// Id, label, prior and outcome rows of a state being built.
type StateRow = (u32, Option<String>, Prior, Vec<Vec<String>>);

impl WorldTableBuilder {
    pub fn decision<I: IntoIterator<Item = S>, S: Into<String>>(mut self, id: &str, instances: I) -> Self {
        self.decisions.push(Variable::decision(id, instances));
        self
    }

    pub fn chance<I: IntoIterator<Item = S>, S: Into<String>>(mut self, id: &str, instances: I) -> Self {
        self.chances.push(Variable::chance(id, instances));
        self
    }

    /// `outcomes[act]` lists the chance instances in declared order.
    pub fn state<R, S>(mut self, id: u32, label: Option<&str>, prior: Prior, outcomes: impl IntoIterator<Item = R>) -> Self
    where
        R: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let rows = outcomes
            .into_iter()
            .map(|r| r.into_iter().map(Into::into).collect())
            .collect();
        self.states.push((id, label.map(str::to_owned), prior, rows));
        self
    }

    pub fn build(self) -> Result<WorldTable> {
        let mut states = Vec::with_capacity(self.states.len());
        for (id, label, prior, rows) in self.states {
            let mut outcomes = Vec::with_capacity(rows.len());
            for row in rows {
                if row.len() != self.chances.len() {
                    return Err(Error::InvalidModel(format!(
                        "state {id}: outcome row has {} entries for {} chance variables",
                        row.len(),
                        self.chances.len()
                    )));
                }
                outcomes.push(
                    self.chances
                        .iter()
                        .zip(&row)
                        .map(|(v, i)| v.instance_index(i))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            states.push(WorldState {
                id,
                label,
                prior,
                outcomes,
            });
        }
        WorldTable::new(self.decisions, self.chances, states)
    }
}
