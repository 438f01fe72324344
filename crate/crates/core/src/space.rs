//! Finite variable spaces, acts and mixed-radix indexing.
//!
//! Every joint configuration in this crate is indexed the same way: variables
//! in declared order, first variable most significant.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Partial or total assignment of instance symbols to variable ids.
pub type Assignment = BTreeMap<String, String>;

/// Instance symbol of an atomic intervention that leaves its target alone.
pub const IDLE: &str = "idle";

/// Prefix of the instance symbols of an atomic intervention that force a value.
pub const SET_PREFIX: &str = "set:";

pub fn set_instance(instance: &str) -> String {
    format!("{SET_PREFIX}{instance}")
}

/// Returns the forced instance for a `set:<x>` symbol.
pub fn parse_set(symbol: &str) -> Option<&str> {
    symbol.strip_prefix(SET_PREFIX)
}

/// Instance list of the atomic intervention on a variable with `instances`:
/// `idle` first, then one `set:` per target instance in declared order.
pub fn intervention_instances(instances: &[String]) -> Vec<String> {
    std::iter::once(IDLE.to_owned())
        .chain(instances.iter().map(|i| set_instance(i)))
        .collect()
}

/// A complete choice of instance for every decision variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Act(BTreeMap<String, String>);

impl Act {
    pub fn new() -> Self {
        Act(BTreeMap::new())
    }

    pub fn get(&self, decision: &str) -> Option<&str> {
        self.0.get(decision).map(String::as_str)
    }

    pub fn insert(&mut self, decision: impl Into<String>, instance: impl Into<String>) {
        self.0.insert(decision.into(), instance.into());
    }

    pub fn with(mut self, decision: impl Into<String>, instance: impl Into<String>) -> Self {
        self.insert(decision, instance);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_assignment(&self) -> &Assignment {
        &self.0
    }

    pub fn into_assignment(self) -> Assignment {
        self.0
    }
}

impl From<Assignment> for Act {
    fn from(map: Assignment) -> Self {
        Act(map)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Act {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Act(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_assignment(&self.0))
    }
}

/// `{a=x, b=y}` with keys sorted.
pub fn format_assignment(a: &Assignment) -> String {
    let body: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", body.join(", "))
}

/// `{a, b}` with members sorted.
pub fn format_set<I, S>(items: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut v: Vec<String> = items.into_iter().map(|s| s.as_ref().to_owned()).collect();
    v.sort();
    format!("{{{}}}", v.join(", "))
}

/// Splits on commas that are not nested inside `()` or `[]`, so mapping-node
/// ids such as `t(r,t_hat)` survive.
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    parts.push(cur);
    parts
        .into_iter()
        .map(|p| p.trim().to_owned())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Parses `a=x,b=y` into an assignment. The split is on the last `=` of each
/// item so ids may not contain `=`, but instance symbols may contain `:`.
pub fn parse_assignment(text: &str) -> Result<Assignment> {
    let mut out = Assignment::new();
    for item in split_top_level(text) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("expected `id=instance`, got `{item}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Input(format!("expected `id=instance`, got `{item}`")));
        }
        if out.insert(k.to_owned(), v.to_owned()).is_some() {
            return Err(Error::Input(format!("`{k}` assigned twice")));
        }
    }
    Ok(out)
}

/// Product of cardinalities, or `None` on overflow.
pub fn space_size(cards: &[usize]) -> Option<usize> {
    cards.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c))
}

pub fn encode(values: &[usize], cards: &[usize]) -> usize {
    debug_assert_eq!(values.len(), cards.len());
    values
        .iter()
        .zip(cards)
        .fold(0usize, |acc, (&v, &c)| acc * c + v)
}

pub fn decode(mut index: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = index % c;
        index /= c;
    }
    out
}

/// Odometer over every configuration of `cards`, in index order.
pub struct Configs {
    cards: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl Configs {
    pub fn new(cards: &[usize]) -> Self {
        Configs {
            cards: cards.to_vec(),
            cur: vec![0; cards.len()],
            done: cards.contains(&0),
        }
    }
}

impl Iterator for Configs {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.cards.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cur[i] += 1;
            if self.cur[i] < self.cards[i] {
                break;
            }
            self.cur[i] = 0;
        }
        Some(out)
    }
}

/// Label of a joint instance: the bare symbol for one variable, `(a,b)` for several.
pub fn joint_label(symbols: &[&str]) -> String {
    if symbols.len() == 1 {
        symbols[0].to_owned()
    } else {
        format!("({})", symbols.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_agree() {
        let cards = [2, 3, 4];
        for (i, cfg) in Configs::new(&cards).enumerate() {
            assert_eq!(encode(&cfg, &cards), i);
            assert_eq!(decode(i, &cards), cfg);
        }
        assert_eq!(Configs::new(&cards).count(), 24);
        assert_eq!(Configs::new(&[]).count(), 1);
    }

    #[test]
    fn assignment_parsing_keeps_mapping_ids_whole() {
        let a = parse_assignment("r=take, t(r,t_hat)=[yes,no],t_hat=set:yes").unwrap();
        assert_eq!(a["r"], "take");
        assert_eq!(a["t(r,t_hat)"], "[yes,no]");
        assert_eq!(a["t_hat"], "set:yes");
        assert!(parse_assignment("r").is_err());
        assert!(parse_assignment("r=a,r=b").is_err());
        assert!(parse_assignment("").unwrap().is_empty());
    }

    #[test]
    fn intervention_shape() {
        let inst = intervention_instances(&["yes".into(), "no".into()]);
        assert_eq!(inst, ["idle", "set:yes", "set:no"]);
        assert_eq!(parse_set("set:no"), Some("no"));
        assert_eq!(parse_set("idle"), None);
    }
}
