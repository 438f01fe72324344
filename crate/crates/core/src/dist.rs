//! Discrete distributions over named variables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::space::Assignment;

/// Sparse distribution: only configurations with non-zero mass are stored,
/// keyed by instance indices in `variables` order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    variables: Vec<String>,
    instances: Vec<Vec<String>>,
    masses: BTreeMap<Vec<usize>, f64>,
}

impl Distribution {
    pub fn new(
        variables: Vec<String>,
        instances: Vec<Vec<String>>,
        masses: BTreeMap<Vec<usize>, f64>,
    ) -> Self {
        debug_assert_eq!(variables.len(), instances.len());
        let masses = masses.into_iter().filter(|(_, p)| *p != 0.0).collect();
        Distribution {
            variables,
            instances,
            masses,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn instances(&self, variable: &str) -> Option<&[String]> {
        let i = self.variables.iter().position(|v| v == variable)?;
        Some(&self.instances[i])
    }

    pub fn masses(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Entries with instance names, in configuration order.
    pub fn entries(&self) -> impl Iterator<Item = (Assignment, f64)> + '_ {
        self.masses.iter().map(|(cfg, &p)| (self.name(cfg), p))
    }

    fn name(&self, cfg: &[usize]) -> Assignment {
        self.variables
            .iter()
            .zip(cfg)
            .enumerate()
            .map(|(i, (v, &c))| (v.clone(), self.instances[i][c].clone()))
            .collect()
    }

    /// Mass of every configuration consistent with a partial assignment.
    pub fn prob(&self, event: &Assignment) -> Result<f64> {
        let mut fixed = Vec::with_capacity(event.len());
        for (var, inst) in event {
            let i = self
                .variables
                .iter()
                .position(|v| v == var)
                .ok_or_else(|| Error::UnknownVariable(var.clone()))?;
            let k = self.instances[i]
                .iter()
                .position(|x| x == inst)
                .ok_or_else(|| Error::UnknownInstance {
                    variable: var.clone(),
                    instance: inst.clone(),
                })?;
            fixed.push((i, k));
        }
        Ok(self
            .masses
            .iter()
            .filter(|(cfg, _)| fixed.iter().all(|&(i, k)| cfg[i] == k))
            .map(|(_, p)| p)
            .sum())
    }

    /// Renormalized restriction to the configurations consistent with `event`.
    pub fn condition(&self, event: &Assignment) -> Result<Distribution> {
        let z = self.prob(event)?;
        if z <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        let keep = |cfg: &[usize]| {
            event.iter().all(|(var, inst)| {
                let i = self.variables.iter().position(|v| v == var).expect("checked by prob");
                &self.instances[i][cfg[i]] == inst
            })
        };
        let masses = self
            .masses
            .iter()
            .filter(|(cfg, _)| keep(cfg))
            .map(|(cfg, p)| (cfg.clone(), p / z))
            .collect();
        Ok(Distribution::new(self.variables.clone(), self.instances.clone(), masses))
    }

    /// Marginal over a subset of the variables, in the order given.
    pub fn marginal<S: AsRef<str>>(&self, vars: &[S]) -> Result<Distribution> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.variables
                    .iter()
                    .position(|x| x == v.as_ref())
                    .ok_or_else(|| Error::UnknownVariable(v.as_ref().to_owned()))
            })
            .collect::<Result<_>>()?;
        let mut masses = BTreeMap::new();
        for (cfg, &p) in &self.masses {
            let key: Vec<usize> = idx.iter().map(|&i| cfg[i]).collect();
            *masses.entry(key).or_insert(0.0) += p;
        }
        Ok(Distribution::new(
            idx.iter().map(|&i| self.variables[i].clone()).collect(),
            idx.iter().map(|&i| self.instances[i].clone()).collect(),
            masses,
        ))
    }

    /// Largest absolute difference in mass over the union of both supports.
    /// Variables are matched by name, so their order may differ.
    pub fn max_abs_diff(&self, other: &Distribution) -> Result<f64> {
        let mut a: Vec<&String> = self.variables.iter().collect();
        let mut b: Vec<&String> = other.variables.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Input(format!(
                "distributions over different variables: {:?} vs {:?}",
                self.variables, other.variables
            )));
        }
        let named = |d: &Distribution| -> BTreeMap<Assignment, f64> { d.entries().collect() };
        let (x, y) = (named(self), named(other));
        let mut worst = 0.0f64;
        for (k, p) in &x {
            worst = worst.max((p - y.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, q) in &y {
            if !x.contains_key(k) {
                worst = worst.max(q.abs());
            }
        }
        Ok(worst)
    }

    /// One line per configuration, `a=x b=y 0.123456789`, in configuration order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (cfg, p) in &self.masses {
            let parts: Vec<String> = self
                .variables
                .iter()
                .zip(cfg)
                .enumerate()
                .map(|(i, (v, &c))| format!("{v}={}", self.instances[i][c]))
                .collect();
            out.push_str(&format!("{} {:.9}\n", parts.join(" "), p));
        }
        out
    }
}
