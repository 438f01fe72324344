//! Exact inference: sparse enumeration and variable elimination.

use std::collections::{BTreeMap, HashMap};

use super::{InfluenceDiagram, NodeKind};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::space::{Act, Assignment, Configs};

/// Auto mode falls back to enumeration when the largest elimination factor
/// would exceed this many entries.
pub const ENUMERATION_THRESHOLD: usize = 1 << 20;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum InferenceMethod {
    /// Variable elimination unless its factors would be too large.
    #[default]
    Auto,
    /// Depth-first summation over the support, in topological order.
    Enumeration,
    /// Variable elimination, optionally with an explicit order. Variables
    /// missing from the order are eliminated afterwards, greedily.
    Elimination(Option<Vec<String>>),
}

/// Index form of a validated diagram.
pub(crate) struct Network<'a> {
    d: &'a InfluenceDiagram,
    kinds: Vec<NodeKind>,
    cards: Vec<usize>,
    parents: Vec<Vec<usize>>,
    strides: Vec<Vec<usize>>,
    topo: Vec<usize>,
    index: HashMap<&'a str, usize>,
}

impl InfluenceDiagram {
    pub(crate) fn compile(&self) -> Result<Network<'_>> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidDiagram(violations));
        }
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let kinds: Vec<NodeKind> = self.nodes.iter().map(|n| n.kind).collect();
        let cards: Vec<usize> = self.nodes.iter().map(|n| n.card()).collect();
        let parents: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|n| n.parents.iter().map(|p| index[p.as_str()]).collect())
            .collect();
        let strides = parents
            .iter()
            .map(|ps: &Vec<usize>| {
                let mut s = vec![1usize; ps.len()];
                for i in (0..ps.len().saturating_sub(1)).rev() {
                    s[i] = s[i + 1] * cards[ps[i + 1]];
                }
                s
            })
            .collect();
        // Kahn's algorithm, lowest declared index first.
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (i, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(i);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            topo.push(i);
            for &c in &children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        Ok(Network {
            d: self,
            kinds,
            cards,
            parents,
            strides,
            topo,
            index,
        })
    }

    /// Node indices in topological order, lowest declared index first.
    pub(crate) fn topological_order(&self) -> Result<Vec<usize>> {
        Ok(self.compile()?.topo)
    }

    /// Joint distribution over every chance and deterministic node, in
    /// declared order, under a total act.
    pub fn joint(&self, act: &Act) -> Result<Distribution> {
        let net = self.compile()?;
        let fixed = net.fix_act(act)?;
        let query: Vec<usize> = (0..net.kinds.len())
            .filter(|&i| matches!(net.kinds[i], NodeKind::Chance | NodeKind::Deterministic))
            .collect();
        let relevant: Vec<bool> = net.kinds.iter().map(|k| *k != NodeKind::Utility).collect();
        let masses = net.enumerate(&fixed, &query, &relevant);
        Ok(net.distribution(&query, masses))
    }

    /// `P(query | evidence, act)`.
    pub fn infer<S: AsRef<str>>(&self, act: &Act, evidence: &Assignment, query: &[S]) -> Result<Distribution> {
        self.infer_with(act, evidence, query, &InferenceMethod::Auto)
    }

    pub fn infer_with<S: AsRef<str>>(
        &self,
        act: &Act,
        evidence: &Assignment,
        query: &[S],
        method: &InferenceMethod,
    ) -> Result<Distribution> {
        let net = self.compile()?;
        let mut fixed = net.fix_act(act)?;
        for (k, v) in evidence {
            let i = net.lookup(k)?;
            let x = net.instance(i, v)?;
            match fixed[i] {
                Some(prev) if prev != x => return Err(Error::ImpossibleEvidence),
                _ => fixed[i] = Some(x),
            }
        }
        if query.is_empty() {
            return Err(Error::Input("query is empty".into()));
        }
        let mut q = Vec::with_capacity(query.len());
        for id in query {
            let i = net.lookup(id.as_ref())?;
            if q.contains(&i) {
                return Err(Error::Input(format!("`{}` queried twice", id.as_ref())));
            }
            q.push(i);
        }
        let mut targets = q.clone();
        targets.extend(evidence.keys().map(|k| net.index[k.as_str()]));
        let relevant = net.ancestors(&targets);
        let masses = match method {
            InferenceMethod::Enumeration => net.enumerate(&fixed, &q, &relevant),
            InferenceMethod::Elimination(order) => net.eliminate(&fixed, &q, &relevant, order.as_deref())?,
            InferenceMethod::Auto => {
                if net.estimate(&fixed, &q, &relevant) > ENUMERATION_THRESHOLD {
                    net.enumerate(&fixed, &q, &relevant)
                } else {
                    net.eliminate(&fixed, &q, &relevant, None)?
                }
            }
        };
        let total: f64 = masses.values().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        let masses = masses.into_iter().map(|(k, p)| (k, p / total)).collect();
        Ok(net.distribution(&q, masses))
    }
}

struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.cards[i + 1];
        }
        s
    }
}

impl<'a> Network<'a> {
    fn lookup(&self, id: &str) -> Result<usize> {
        let i = *self.index.get(id).ok_or_else(|| Error::UnknownVariable(id.to_owned()))?;
        if self.kinds[i] == NodeKind::Utility {
            return Err(Error::Input(format!("`{id}` is the utility node")));
        }
        Ok(i)
    }

    fn instance(&self, i: usize, inst: &str) -> Result<usize> {
        let n = &self.d.nodes[i];
        n.index_of(inst).ok_or_else(|| Error::UnknownInstance {
            variable: n.id.clone(),
            instance: inst.to_owned(),
        })
    }

    pub(crate) fn fix_act(&self, act: &Act) -> Result<Vec<Option<usize>>> {
        let mut fixed = vec![None; self.kinds.len()];
        for (k, v) in act.iter() {
            let i = *self.index.get(k).ok_or_else(|| Error::UnknownVariable(k.to_owned()))?;
            if self.kinds[i] != NodeKind::Decision {
                return Err(Error::Input(format!("`{k}` is not a decision node")));
            }
            fixed[i] = Some(self.instance(i, v)?);
        }
        if let Some(i) = (0..self.kinds.len()).find(|&i| self.kinds[i] == NodeKind::Decision && fixed[i].is_none()) {
            return Err(Error::Input(format!("act does not assign decision `{}`", self.d.nodes[i].id)));
        }
        Ok(fixed)
    }

    fn ancestors(&self, targets: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; self.kinds.len()];
        let mut stack = targets.to_vec();
        while let Some(i) = stack.pop() {
            if keep[i] {
                continue;
            }
            keep[i] = true;
            if self.kinds[i] != NodeKind::Decision {
                stack.extend(&self.parents[i]);
            }
        }
        keep
    }

    #[inline]
    fn config(&self, i: usize, vals: &[usize]) -> usize {
        self.parents[i].iter().zip(&self.strides[i]).map(|(&p, &s)| vals[p] * s).sum()
    }

    fn distribution(&self, q: &[usize], masses: BTreeMap<Vec<usize>, f64>) -> Distribution {
        Distribution::new(
            q.iter().map(|&i| self.d.nodes[i].id.clone()).collect(),
            q.iter().map(|&i| self.d.nodes[i].instances.clone()).collect(),
            masses,
        )
    }

    fn enumerate(&self, fixed: &[Option<usize>], q: &[usize], relevant: &[bool]) -> BTreeMap<Vec<usize>, f64> {
        let order: Vec<usize> = self.topo.iter().copied().filter(|&i| relevant[i]).collect();
        let mut vals = vec![0usize; self.kinds.len()];
        let mut out = BTreeMap::new();
        self.dfs(&order, 0, 1.0, fixed, q, &mut vals, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        order: &[usize],
        pos: usize,
        w: f64,
        fixed: &[Option<usize>],
        q: &[usize],
        vals: &mut Vec<usize>,
        out: &mut BTreeMap<Vec<usize>, f64>,
    ) {
        let Some(&i) = order.get(pos) else {
            *out.entry(q.iter().map(|&i| vals[i]).collect()).or_insert(0.0) += w;
            return;
        };
        match self.kinds[i] {
            NodeKind::Decision => {
                vals[i] = fixed[i].expect("decisions are fixed");
                self.dfs(order, pos + 1, w, fixed, q, vals, out);
            }
            NodeKind::Deterministic => {
                let x = self.d.functions[&self.d.nodes[i].id][self.config(i, vals)];
                if fixed[i].is_none_or(|f| f == x) {
                    vals[i] = x;
                    self.dfs(order, pos + 1, w, fixed, q, vals, out);
                }
            }
            NodeKind::Chance => {
                let row = self.d.cpts[&self.d.nodes[i].id]
                    .row(self.config(i, vals))
                    .expect("validated table");
                for (x, &p) in row.iter().enumerate() {
                    if p > 0.0 && fixed[i].is_none_or(|f| f == x) {
                        vals[i] = x;
                        self.dfs(order, pos + 1, w * p, fixed, q, vals, out);
                    }
                }
            }
            NodeKind::Utility => self.dfs(order, pos + 1, w, fixed, q, vals, out),
        }
    }

    /// Scope of the factor contributed by node `i`: free variables only.
    fn scope(&self, i: usize, fixed: &[Option<usize>]) -> Vec<usize> {
        let mut s: Vec<usize> = std::iter::once(i)
            .chain(self.parents[i].iter().copied())
            .filter(|&v| fixed[v].is_none())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    fn factor_nodes(&self, relevant: &[bool]) -> Vec<usize> {
        (0..self.kinds.len())
            .filter(|&i| relevant[i] && matches!(self.kinds[i], NodeKind::Chance | NodeKind::Deterministic))
            .collect()
    }

    fn size(&self, scope: &[usize]) -> usize {
        scope.iter().fold(1usize, |a, &v| a.saturating_mul(self.cards[v]))
    }

    /// Largest factor a greedy elimination would build.
    fn estimate(&self, fixed: &[Option<usize>], q: &[usize], relevant: &[bool]) -> usize {
        let mut scopes: Vec<Vec<usize>> = self.factor_nodes(relevant).iter().map(|&i| self.scope(i, fixed)).collect();
        let mut worst = scopes.iter().map(|s| self.size(s)).max().unwrap_or(1);
        let mut elim: Vec<usize> = self.eliminable(fixed, q, relevant);
        while !elim.is_empty() {
            let (k, merged) = self.pick(&scopes, &elim);
            worst = worst.max(self.size(&merged));
            let v = elim.remove(k);
            scopes.retain(|s| !s.contains(&v));
            scopes.push(merged.into_iter().filter(|&x| x != v).collect());
        }
        let mut rest: Vec<usize> = scopes.concat();
        rest.sort_unstable();
        rest.dedup();
        worst.max(self.size(&rest))
    }

    fn eliminable(&self, fixed: &[Option<usize>], q: &[usize], relevant: &[bool]) -> Vec<usize> {
        self.factor_nodes(relevant)
            .into_iter()
            .filter(|&i| fixed[i].is_none() && !q.contains(&i))
            .collect()
    }

    /// Greedy choice: the variable whose merged scope is smallest.
    fn pick(&self, scopes: &[Vec<usize>], elim: &[usize]) -> (usize, Vec<usize>) {
        let merged_for = |v: usize| {
            let mut m: Vec<usize> = scopes.iter().filter(|s| s.contains(&v)).flatten().copied().collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        let mut best = (0, merged_for(elim[0]));
        let mut best_size = self.size(&best.1);
        for (k, &v) in elim.iter().enumerate().skip(1) {
            let m = merged_for(v);
            let s = self.size(&m);
            if s < best_size {
                best_size = s;
                best = (k, m);
            }
        }
        best
    }

    fn build_factor(&self, i: usize, fixed: &[Option<usize>]) -> Result<Factor> {
        let vars = self.scope(i, fixed);
        let cards: Vec<usize> = vars.iter().map(|&v| self.cards[v]).collect();
        let size = self.size(&vars);
        if size > ENUMERATION_THRESHOLD * 16 {
            return Err(Error::TooLarge(format!("elimination factor of {size} entries")));
        }
        let mut vals: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        let mut values = Vec::with_capacity(size);
        let id = &self.d.nodes[i].id;
        for cfg in Configs::new(&cards) {
            for (&v, &x) in vars.iter().zip(&cfg) {
                vals[v] = x;
            }
            let c = self.config(i, &vals);
            values.push(match self.kinds[i] {
                NodeKind::Chance => self.d.cpts[id].row(c).expect("validated table")[vals[i]],
                _ => f64::from(u8::from(self.d.functions[id][c] == vals[i])),
            });
        }
        Ok(Factor { vars, cards, values })
    }

    /// Multiplies `factors` and sums out `drop`.
    fn combine(&self, factors: &[Factor], drop: Option<usize>) -> Result<Factor> {
        let mut vars: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars.iter().map(|&v| self.cards[v]).collect();
        let size = self.size(&vars);
        if size > ENUMERATION_THRESHOLD * 16 {
            return Err(Error::TooLarge(format!("elimination factor of {size} entries")));
        }
        let keep: Vec<usize> = vars.iter().copied().filter(|&v| Some(v) != drop).collect();
        let keep_cards: Vec<usize> = keep.iter().map(|&v| self.cards[v]).collect();
        let keep_size = self.size(&keep);
        // position of each union variable in each factor, as a stride
        let maps: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| {
                let st = f.strides();
                vars.iter()
                    .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |p| st[p]))
                    .collect()
            })
            .collect();
        let keep_strides: Vec<usize> = {
            let mut s = vec![1usize; keep.len()];
            for i in (0..keep.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * keep_cards[i + 1];
            }
            vars.iter()
                .map(|v| keep.iter().position(|x| x == v).map_or(0, |p| s[p]))
                .collect()
        };
        let mut values = vec![0.0; keep_size];
        for cfg in Configs::new(&cards) {
            let mut p = 1.0;
            for (f, m) in factors.iter().zip(&maps) {
                let idx: usize = cfg.iter().zip(m).map(|(&x, &s)| x * s).sum();
                p *= f.values[idx];
                if p == 0.0 {
                    break;
                }
            }
            if p != 0.0 {
                let k: usize = cfg.iter().zip(&keep_strides).map(|(&x, &s)| x * s).sum();
                values[k] += p;
            }
        }
        Ok(Factor {
            vars: keep,
            cards: keep_cards,
            values,
        })
    }

    fn eliminate(
        &self,
        fixed: &[Option<usize>],
        q: &[usize],
        relevant: &[bool],
        order: Option<&[String]>,
    ) -> Result<BTreeMap<Vec<usize>, f64>> {
        let mut factors: Vec<Factor> = self
            .factor_nodes(relevant)
            .iter()
            .map(|&i| self.build_factor(i, fixed))
            .collect::<Result<_>>()?;
        let mut elim = self.eliminable(fixed, q, relevant);
        let mut explicit: Vec<usize> = Vec::new();
        if let Some(order) = order {
            for id in order {
                let i = *self.index.get(id.as_str()).ok_or_else(|| Error::UnknownVariable(id.clone()))?;
                if let Some(k) = elim.iter().position(|&v| v == i) {
                    explicit.push(elim.remove(k));
                }
            }
        }
        let mut explicit = explicit.into_iter();
        loop {
            let v = match explicit.next() {
                Some(v) => v,
                None if elim.is_empty() => break,
                None => {
                    let scopes: Vec<Vec<usize>> = factors.iter().map(|f| f.vars.clone()).collect();
                    let (k, _) = self.pick(&scopes, &elim);
                    elim.remove(k)
                }
            };
            let (with, without): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&v));
            factors = without;
            if !with.is_empty() {
                factors.push(self.combine(&with, Some(v))?);
            }
        }
        let last = self.combine(&factors, None)?;
        let mut out = BTreeMap::new();
        let mut vals: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        for (k, cfg) in Configs::new(&last.cards).enumerate() {
            let p = last.values[k];
            if p == 0.0 {
                continue;
            }
            for (&v, &x) in last.vars.iter().zip(&cfg) {
                vals[v] = x;
            }
            *out.entry(q.iter().map(|&i| vals[i]).collect()).or_insert(0.0) += p;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Cpt;
    use super::*;

    fn chain() -> InfluenceDiagram {
        let mut d = InfluenceDiagram::new();
        d.add_decision("r", ["take", "dont_take"])
            .add_chance("g", ["a", "b"], &[], Cpt::prior(vec![0.3, 0.7]))
            .add_chance("t", ["yes", "no"], &["r", "g"], Cpt::dense(vec![
                vec![0.9, 0.1],
                vec![0.6, 0.4],
                vec![0.2, 0.8],
                vec![0.05, 0.95],
            ]))
            .add_deterministic("c", ["yes", "no"], &["t", "g"], vec![0, 1, 1, 1])
            .add_chance("z", ["0", "1"], &["c"], Cpt::dense(vec![vec![0.25, 0.75], vec![0.5, 0.5]]));
        d
    }

    fn take() -> Act {
        Act::new().with("r", "take")
    }

    #[test]
    fn joint_sums_to_one_and_respects_functions() {
        let d = chain();
        let j = d.joint(&take()).unwrap();
        assert!((j.total() - 1.0).abs() < 1e-12);
        for (a, p) in j.entries() {
            if p > 0.0 {
                let expect = if a["t"] == "yes" && a["g"] == "a" { "yes" } else { "no" };
                assert_eq!(a["c"], expect);
            }
        }
        assert!(matches!(d.joint(&Act::new()), Err(Error::Input(_))));
    }

    #[test]
    fn methods_agree() {
        let d = chain();
        let ev: Assignment = [("z".to_string(), "0".to_string())].into();
        let a = d.infer_with(&take(), &ev, &["g", "t"], &InferenceMethod::Enumeration).unwrap();
        let b = d.infer_with(&take(), &ev, &["g", "t"], &InferenceMethod::Elimination(None)).unwrap();
        let c = d
            .infer_with(
                &take(),
                &ev,
                &["g", "t"],
                &InferenceMethod::Elimination(Some(vec!["c".into(), "z".into()])),
            )
            .unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!(a.max_abs_diff(&c).unwrap() < 1e-12);
        // oracle: restrict the joint and renormalize
        let j = d.joint(&take()).unwrap();
        let pz = j.prob(&ev).unwrap();
        let mut e = ev.clone();
        e.insert("g".into(), "a".into());
        e.insert("t".into(), "yes".into());
        let want = j.prob(&e).unwrap() / pz;
        let got = a.prob(&[("g".to_string(), "a".to_string()), ("t".to_string(), "yes".to_string())].into()).unwrap();
        assert!((want - got).abs() < 1e-12);
    }

    #[test]
    fn empty_evidence_is_marginal() {
        let d = chain();
        let m = d.infer(&take(), &Assignment::new(), &["c"]).unwrap();
        let j = d.joint(&take()).unwrap().marginal(&["c"]).unwrap();
        assert!(m.max_abs_diff(&j).unwrap() < 1e-12);
    }

    #[test]
    fn impossible_and_bad_queries() {
        let d = chain();
        let ev: Assignment = [("c".to_string(), "yes".to_string()), ("t".to_string(), "no".to_string())].into();
        assert_eq!(d.infer(&take(), &ev, &["g"]), Err(Error::ImpossibleEvidence));
        let ev: Assignment = [("r".to_string(), "dont_take".to_string())].into();
        assert_eq!(d.infer(&take(), &ev, &["g"]), Err(Error::ImpossibleEvidence));
        assert!(d.infer::<&str>(&take(), &Assignment::new(), &[]).is_err());
        assert!(matches!(d.infer(&take(), &Assignment::new(), &["nope"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn full_evidence_gives_point_posterior() {
        let d = chain();
        let ev: Assignment = [("g", "a"), ("t", "yes"), ("c", "yes"), ("z", "1")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let p = d.infer(&take(), &ev, &["t", "z"]).unwrap();
        assert_eq!(p.masses().len(), 1);
        assert!((p.total() - 1.0).abs() < 1e-12);
    }
}
