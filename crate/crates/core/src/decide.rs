//! Single-stage decisions: maximum expected utility and the value of
//! perfect information about unresponsive variables.

use std::collections::BTreeSet;

use crate::diagram::{InfluenceDiagram, Node, NodeKind};
use crate::error::{Error, Result};
use crate::space::{self, Act, Assignment, Configs};

/// Relative tolerance within which two expected utilities tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    /// Observed values this rule applies to; empty for an unconditional choice.
    pub context: Assignment,
    pub probability: f64,
    pub act: Act,
    pub expected_utility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub rules: Vec<Rule>,
    pub expected_utility: f64,
}

impl Policy {
    /// The act of an unconditional policy, or of its first rule.
    pub fn act(&self) -> &Act {
        &self.rules[0].act
    }
}

/// Every act in mixed-radix order over the declared decisions, first
/// decision most significant.
pub fn acts(d: &InfluenceDiagram) -> Vec<Act> {
    let decs: Vec<&Node> = d.decisions().collect();
    let cards: Vec<usize> = decs.iter().map(|n| n.card()).collect();
    Configs::new(&cards)
        .map(|cfg| decs.iter().zip(cfg).map(|(n, v)| (n.id.clone(), n.instances[v].clone())).collect())
        .collect()
}

/// `E[U | act, evidence]`.
pub fn expected_utility(d: &InfluenceDiagram, act: &Act, evidence: &Assignment) -> Result<f64> {
    let u = d.utility_node().ok_or(Error::MissingUtility)?;
    let values = d.utility_values().ok_or(Error::MissingUtility)?;
    if u.parents.is_empty() {
        return Ok(values[0]);
    }
    let cards = d.parent_cards(&u.id).ok_or_else(|| Error::InvalidModel("utility parents".into()))?;
    let dist = d.infer(act, evidence, &u.parents)?;
    Ok(dist
        .masses()
        .iter()
        .map(|(cfg, p)| p * values[space::encode(cfg, &cards)])
        .sum())
}

/// First act, in declared order, whose expected utility ties the best.
fn best(scores: &[(Act, f64)]) -> (Act, f64) {
    let top = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * top.abs().max(1.0);
    scores
        .iter()
        .find(|s| s.1 >= top - tol)
        .cloned()
        .expect("at least one act")
}

fn choose(d: &InfluenceDiagram, evidence: &Assignment) -> Result<(Act, f64)> {
    let scores: Vec<(Act, f64)> = acts(d)
        .into_iter()
        .map(|a| expected_utility(d, &a, evidence).map(|eu| (a, eu)))
        .collect::<Result<_>>()?;
    Ok(best(&scores))
}

/// The act maximizing expected utility.
pub fn solve(d: &InfluenceDiagram) -> Result<Policy> {
    let (act, eu) = choose(d, &Assignment::new())?;
    Ok(Policy {
        rules: vec![Rule {
            context: Assignment::new(),
            probability: 1.0,
            act,
            expected_utility: eu,
        }],
        expected_utility: eu,
    })
}

fn check_observable<'d>(d: &'d InfluenceDiagram, v: &str, responsive: &BTreeSet<String>) -> Result<&'d Node> {
    let n = d.node(v).ok_or_else(|| Error::UnknownVariable(v.to_owned()))?;
    if !matches!(n.kind, NodeKind::Chance | NodeKind::Deterministic) {
        return Err(Error::Input(format!("`{v}` is a {} node", n.kind.as_str())));
    }
    let roots: Vec<String> = d.decisions().map(|n| n.id.clone()).collect();
    if responsive.contains(v) || d.descendants(&roots).contains(v) {
        return Err(Error::Responsive(v.to_owned()));
    }
    Ok(n)
}

/// Best act for each value of `v`, observed before deciding.
pub fn solve_observing(d: &InfluenceDiagram, v: &str, responsive: &BTreeSet<String>) -> Result<Policy> {
    observing(d, v, responsive).map(|(p, _)| p)
}

/// The observing policy, with the unconditional score of every act.
fn observing(d: &InfluenceDiagram, v: &str, responsive: &BTreeSet<String>) -> Result<(Policy, Vec<(Act, f64)>)> {
    let u = d.utility_node().ok_or(Error::MissingUtility)?;
    let values = d.utility_values().ok_or(Error::MissingUtility)?;
    let n = check_observable(d, v, responsive)?;
    let cards = d.parent_cards(&u.id).ok_or_else(|| Error::InvalidModel("utility parents".into()))?;
    let mut query = vec![v.to_owned()];
    query.extend(u.parents.iter().filter(|p| p.as_str() != v).cloned());
    // position in the query of each utility parent
    let slots: Vec<usize> = u
        .parents
        .iter()
        .map(|p| query.iter().position(|q| q == p).expect("queried"))
        .collect();
    let all = acts(d);
    // weighted[a][i] = E[U; v = i | act a]
    let mut prior: Vec<f64> = vec![0.0; n.card()];
    let mut weighted: Vec<Vec<f64>> = Vec::with_capacity(all.len());
    for (k, act) in all.iter().enumerate() {
        let joint = d.infer(act, &Assignment::new(), &query)?;
        let mut row = vec![0.0; n.card()];
        for (cfg, &p) in joint.masses() {
            let ucfg: Vec<usize> = slots.iter().map(|&s| cfg[s]).collect();
            row[cfg[0]] += p * values[space::encode(&ucfg, &cards)];
            // v does not depend on the act, so any act gives its distribution
            if k == 0 {
                prior[cfg[0]] += p;
            }
        }
        weighted.push(row);
    }
    let mut rules = Vec::new();
    let mut total = 0.0;
    for (i, &p) in prior.iter().enumerate().filter(|(_, &p)| p > 0.0) {
        let context: Assignment = [(v.to_owned(), n.instances[i].clone())].into_iter().collect();
        let scores: Vec<(Act, f64)> = all.iter().zip(&weighted).map(|(a, w)| (a.clone(), w[i] / p)).collect();
        let (act, eu) = best(&scores);
        total += p * eu;
        rules.push(Rule {
            context,
            probability: p,
            act,
            expected_utility: eu,
        });
    }
    let blind = all.into_iter().zip(&weighted).map(|(a, w)| (a, w.iter().sum())).collect();
    Ok((
        Policy {
            rules,
            expected_utility: total,
        },
        blind,
    ))
}

/// Gain in expected utility from observing `v` before acting; never negative.
pub fn value_of_information(d: &InfluenceDiagram, v: &str, responsive: &BTreeSet<String>) -> Result<f64> {
    let (informed, blind) = observing(d, v, responsive)?;
    Ok((informed.expected_utility - best(&blind).1).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::to_canonical;
    use crate::diagram::Cpt;
    use crate::fixtures;

    fn smoking_diagram() -> (InfluenceDiagram, BTreeSet<String>) {
        let mut cd = to_canonical(&fixtures::smoking_priced([0.3, 0.4, 0.2, 0.1]), None).unwrap();
        // no_cancer is worth 10, quitting costs 2
        cd.diagram.add_utility("u", &["s", "l"], vec![0.0, 10.0, -2.0, 8.0]);
        (cd.diagram, cd.responsive)
    }

    #[test]
    fn mapping_node_has_value() {
        let (d, resp) = smoking_diagram();
        let eu = |s: &str| expected_utility(&d, &Act::new().with("s", s), &Assignment::new()).unwrap();
        // P(no cancer | continue) = 0.4 + 0.1, P(no cancer | quit) = 0.4 + 0.3
        assert!((eu("continue") - 5.0).abs() < 1e-12);
        assert!((eu("quit") - 5.0).abs() < 1e-12);
        assert_eq!(solve(&d).unwrap().act().get("s"), Some("continue"));
        let voi = value_of_information(&d, "l(s)", &resp).unwrap();
        // knowing the type: 0.3 quit(8), 0.4 continue(10), 0.2 either(0 vs -2), 0.1 continue(10)
        let informed = 0.3 * 8.0 + 0.4 * 10.0 + 0.2 * 0.0 + 0.1 * 10.0;
        assert!((voi - (informed - 5.0)).abs() < 1e-9);
        assert!(matches!(value_of_information(&d, "l", &resp), Err(Error::Responsive(_))));
    }

    #[test]
    fn irrelevant_variable_is_worthless() {
        let mut d = InfluenceDiagram::new();
        d.add_decision("a", ["x", "y"]);
        d.add_chance("n", ["p", "q"], &[], Cpt::prior(vec![0.3, 0.7]));
        d.add_utility("u", &["a"], vec![1.0, 0.0]);
        let voi = value_of_information(&d, "n", &BTreeSet::new()).unwrap();
        assert_eq!(voi, 0.0);
        assert_eq!(solve(&d).unwrap().act().get("a"), Some("x"));
        let mut flat = InfluenceDiagram::new();
        flat.add_decision("a", ["x", "y"]);
        flat.add_utility("u", &[], vec![3.0]);
        assert_eq!(solve(&flat).unwrap().act().get("a"), Some("x"));
        let mut none = InfluenceDiagram::new();
        none.add_decision("a", ["x"]);
        assert!(matches!(solve(&none), Err(Error::MissingUtility)));
    }
}
