use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{intersection_tensor, IntersectionTensor, TripleCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicalInit {
    Zero,
    Plus,
}

/// Initial logical states for the red and blue copies. The green register
/// always starts in all-|0⟩.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitPlan {
    pub red: Vec<LogicalInit>,
    pub blue: Vec<LogicalInit>,
    /// Red classes grouped by their H⁰ factor label.
    pub clusters: Vec<Vec<usize>>,
}

impl InitPlan {
    #[must_use]
    pub fn all_zero(tc: &TripleCode) -> Self {
        Self {
            red: vec![LogicalInit::Zero; tc.red_h1.dim()],
            blue: vec![LogicalInit::Zero; tc.blue_h1.dim()],
            clusters: clusters(tc),
        }
    }

    #[must_use]
    pub fn red_plus(&self) -> Vec<usize> {
        plus(&self.red)
    }

    #[must_use]
    pub fn blue_plus(&self) -> Vec<usize> {
        plus(&self.blue)
    }
}

fn plus(v: &[LogicalInit]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, s)| **s == LogicalInit::Plus).map(|(i, _)| i).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivePair {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub pairs: Vec<ActivePair>,
    pub conflicts: Vec<String>,
}

impl Certificate {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Red decomposable classes grouped by H⁰ factor label.
#[must_use]
pub fn clusters(tc: &TripleCode) -> Vec<Vec<usize>> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in tc.red_decomposable() {
        map.entry(tc.red_h1.tags[a].left_class).or_default().push(a);
    }
    map.into_values().collect()
}

/// Lists intersecting pairs among |+⟩ logicals and checks that every γ
/// has at most one, that pairs share no logical, and that no cluster holds
/// two |+⟩ classes.
#[must_use]
pub fn certify(plan: &InitPlan, t: &IntersectionTensor) -> Certificate {
    let mut cert = Certificate::default();
    for cl in &plan.clusters {
        let on: Vec<usize> = cl.iter().copied().filter(|&a| plan.red[a] == LogicalInit::Plus).collect();
        if on.len() > 1 {
            cert.conflicts.push(format!("cluster {cl:?} has |+> on {on:?}"));
        }
    }
    let mut per_gamma: BTreeMap<usize, Vec<ActivePair>> = BTreeMap::new();
    for &(alpha, beta, gamma) in &t.entries {
        if plan.red[alpha] == LogicalInit::Plus && plan.blue[beta] == LogicalInit::Plus {
            per_gamma.entry(gamma).or_default().push(ActivePair { alpha, beta, gamma });
        }
    }
    for (g, ps) in &per_gamma {
        if ps.len() > 1 {
            cert.conflicts.push(format!("gamma {g} meets {} active pairs", ps.len()));
        }
        cert.pairs.extend(ps.iter().copied());
    }
    for (i, p) in cert.pairs.iter().enumerate() {
        for q in &cert.pairs[i + 1..] {
            if p.alpha == q.alpha || p.beta == q.beta {
                cert.conflicts.push(format!("pairs {p:?} and {q:?} share a logical"));
            }
        }
    }
    cert
}

/// One |+⟩ red class per cluster, |+⟩ on every decomposable blue class,
/// |0⟩ elsewhere; red choices are made greedily so the certificate holds.
pub fn plan_fountain(tc: &TripleCode) -> Result<(InitPlan, Certificate)> {
    if tc.red_decomposable().is_empty() {
        return Err(Error::Planner("no decomposable red classes".into()));
    }
    let t = intersection_tensor(tc);
    let mut plan = InitPlan::all_zero(tc);
    for b in tc.blue_decomposable() {
        plan.blue[b] = LogicalInit::Plus;
    }
    for cl in plan.clusters.clone() {
        let mut placed = false;
        for &a in &cl {
            plan.red[a] = LogicalInit::Plus;
            if certify(&plan, &t).ok() {
                placed = true;
                break;
            }
            plan.red[a] = LogicalInit::Zero;
        }
        if !placed {
            return Err(Error::Planner(format!("no red class in cluster {cl:?} keeps the pairs disjoint")));
        }
    }
    let cert = certify(&plan, &t);
    Ok((plan, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_cyclic;
    use crate::skeleton::{triple_code, CupRules};

    #[test]
    fn rep2_fountain() {
        let h = repetition_cyclic(2);
        let tc = triple_code(&h, &h, CupRules::default()).unwrap();
        let (plan, cert) = plan_fountain(&tc).unwrap();
        assert!(cert.ok());
        assert_eq!(plan.clusters.len(), tc.red_decomposable().len().min(1));
        assert_eq!(cert.pairs.len(), 1);
        let zero = InitPlan::all_zero(&tc);
        assert!(certify(&zero, &intersection_tensor(&tc)).pairs.is_empty());
    }

    #[test]
    fn crowded_cluster_fails() {
        use LogicalInit::{Plus, Zero};
        let mut t = IntersectionTensor { dims: [2, 1, 2], entries: Vec::new() };
        t.toggle(0, 0, 0);
        t.toggle(1, 0, 1);
        let plan = InitPlan { red: vec![Plus, Plus], blue: vec![Plus], clusters: vec![vec![0, 1]] };
        let cert = certify(&plan, &t);
        assert!(!cert.ok());
        assert_eq!(cert.conflicts.len(), 2);
        let one = InitPlan { red: vec![Plus, Zero], ..plan };
        assert!(certify(&one, &t).ok());
    }
}
