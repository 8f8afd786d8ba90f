//! Scenario trees: probabilities, per-scenario capacity profiles, and the
//! branch intervals that drive nonanticipativity constraints.
//!
//! A branch is a maximal time interval over which a set of scenarios is
//! indistinguishable. Branch ends are inclusive; a branch point at period t
//! means the child branches start at t, so decisions taken at t already see
//! which child occurred.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Period};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub start: Period,
    pub end: Period,
    pub scenarios: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTree {
    pub probabilities: Vec<f64>,
    /// capacities[pca][scenario index as string] = per-period capacities,
    /// one entry per period 0..=horizon.
    pub capacities: BTreeMap<String, BTreeMap<String, Vec<u32>>>,
    pub branches: Vec<Branch>,
}

impl ScenarioTree {
    pub fn num_scenarios(&self) -> usize {
        self.probabilities.len()
    }

    /// Capacity of `pca` in period `t` under scenario `q`.
    pub fn capacity(&self, pca: &str, t: Period, q: usize) -> u32 {
        self.capacities[pca][&q.to_string()][t as usize]
    }

    /// The branch containing scenario `q` at period `t`, if the tree is
    /// well-formed (exactly one exists).
    pub fn branch_at(&self, q: usize, t: Period) -> Option<&Branch> {
        self.branches
            .iter()
            .find(|b| b.start <= t && t <= b.end && b.scenarios.contains(&q))
    }

    /// True when scenarios `a` and `b` are indistinguishable at period `t`.
    pub fn same_branch(&self, a: usize, b: usize, t: Period) -> bool {
        match self.branch_at(a, t) {
            Some(branch) => branch.scenarios.contains(&b),
            None => false,
        }
    }
}

/// Check every tree invariant; returns one message per violation, empty when
/// the tree is valid. `pca_ids` lists the capacity-constrained resources the
/// capacity table must cover.
pub fn validate_tree(tree: &ScenarioTree, horizon: Period, pca_ids: &[&str]) -> Vec<String> {
    let mut report = Vec::new();
    let nq = tree.num_scenarios();
    if nq == 0 {
        report.push("probabilities sum != 1: no scenarios".to_string());
        return report;
    }
    let total: f64 = tree.probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        report.push(format!("probabilities sum != 1 (got {total})"));
    }
    for (q, p) in tree.probabilities.iter().enumerate() {
        if p.is_nan() || *p < 0.0 {
            report.push(format!("probability of scenario {q} is negative"));
        }
    }

    for pca in pca_ids {
        match tree.capacities.get(*pca) {
            None => report.push(format!("capacities missing for PCA `{pca}`")),
            Some(rows) => {
                for q in 0..nq {
                    match rows.get(&q.to_string()) {
                        None => report.push(format!(
                            "capacities missing for PCA `{pca}` scenario {q}"
                        )),
                        Some(values) if values.len() != (horizon + 1) as usize => {
                            report.push(format!(
                                "capacities for PCA `{pca}` scenario {q} must cover periods 0..={horizon} (got {} entries)",
                                values.len()
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    for (pca, rows) in &tree.capacities {
        if !pca_ids.contains(&pca.as_str()) {
            report.push(format!("capacities given for unknown PCA `{pca}`"));
        }
        for key in rows.keys() {
            match key.parse::<usize>() {
                Ok(q) if q < nq => {}
                _ => report.push(format!(
                    "capacities for PCA `{pca}` reference unknown scenario `{key}`"
                )),
            }
        }
    }

    for (i, b) in tree.branches.iter().enumerate() {
        if b.start > b.end {
            report.push(format!("branch {i} has start > end"));
        }
        if b.scenarios.is_empty() {
            report.push(format!("branch {i} has an empty scenario set"));
        }
        for &q in &b.scenarios {
            if q >= nq {
                report.push(format!("branch {i} references unknown scenario {q}"));
            }
        }
    }

    // Branch cover: each (scenario, period) lies in exactly one branch.
    for q in 0..nq {
        for t in 0..=horizon {
            let n = tree
                .branches
                .iter()
                .filter(|b| b.start <= t && t <= b.end && b.scenarios.contains(&q))
                .count();
            if n != 1 {
                report.push(format!(
                    "scenario {q} period {t} is covered by {n} branches (expected 1)"
                ));
                // one message per scenario is enough
                break;
            }
        }
    }

    // Refinement: scenario sets can only shrink as time advances.
    for q in 0..nq {
        for t in 0..horizon {
            let (Some(now), Some(next)) = (tree.branch_at(q, t), tree.branch_at(q, t + 1)) else {
                continue;
            };
            if !next.scenarios.iter().all(|s| now.scenarios.contains(s)) {
                report.push(format!(
                    "branches of scenario {q} do not refine over time at period {t}"
                ));
                break;
            }
        }
    }

    // Tree property: scenarios sharing a branch at t share all capacities
    // up to t. It suffices to scan each branch interval.
    if report.is_empty() {
        'outer: for b in &tree.branches {
            let lead = b.scenarios[0];
            for &q in &b.scenarios[1..] {
                for pca in pca_ids {
                    for t in 0..=b.end.min(horizon) {
                        if tree.capacity(pca, t, lead) != tree.capacity(pca, t, q) {
                            report.push(format!(
                                "scenarios {lead} and {q} share a branch through period {} but differ on `{pca}` capacity at period {t}",
                                b.end
                            ));
                            continue 'outer;
                        }
                    }
                }
            }
        }
    }

    report
}

/// Branches active at period `t`. Each listed branch carries the scenario
/// set whose decisions must agree at `t`.
pub fn shared_branches_at(tree: &ScenarioTree, t: Period, horizon: Period) -> Result<Vec<&Branch>> {
    if t > horizon {
        return Err(Error::validation(format!(
            "period {t} out of range 0..={horizon}"
        )));
    }
    Ok(tree
        .branches
        .iter()
        .filter(|b| b.start <= t && t <= b.end)
        .collect())
}

/// Deterministic projection: the instance as seen under scenario `q` alone.
pub fn project_scenario(inst: &Instance, q: usize) -> Result<Instance> {
    if q >= inst.num_scenarios() {
        return Err(Error::validation(format!(
            "scenario {q} out of range (|Q| = {})",
            inst.num_scenarios()
        )));
    }
    let mut capacities = BTreeMap::new();
    for (pca, rows) in &inst.scenarios.capacities {
        let mut single = BTreeMap::new();
        single.insert("0".to_string(), rows[&q.to_string()].clone());
        capacities.insert(pca.clone(), single);
    }
    let mut out = inst.clone();
    out.scenarios = ScenarioTree {
        probabilities: vec![1.0],
        capacities,
        branches: vec![Branch {
            start: 0,
            end: inst.horizon,
            scenarios: vec![0],
        }],
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn single_scenario_tree(horizon: Period) -> ScenarioTree {
        let mut capacities = BTreeMap::new();
        let mut rows = BTreeMap::new();
        rows.insert("0".to_string(), vec![1; (horizon + 1) as usize]);
        capacities.insert("P".to_string(), rows);
        ScenarioTree {
            probabilities: vec![1.0],
            capacities,
            branches: vec![Branch {
                start: 0,
                end: horizon,
                scenarios: vec![0],
            }],
        }
    }

    #[test]
    fn single_scenario_tree_is_valid() {
        let tree = single_scenario_tree(7);
        assert!(validate_tree(&tree, 7, &["P"]).is_empty());
    }

    #[test]
    fn bad_probabilities_reported() {
        let mut tree = single_scenario_tree(7);
        tree.probabilities = vec![0.5, 0.6];
        let report = validate_tree(&tree, 7, &["P"]);
        assert!(
            report.iter().any(|m| m.contains("probabilities sum != 1")),
            "got: {report:?}"
        );
    }

    #[test]
    fn case_study_tree_is_valid() {
        let inst = gen::build_case_study(1);
        inst.validate().unwrap();
        assert_eq!(inst.num_scenarios(), 3);
    }

    #[test]
    fn case_study_branches_match_the_two_split_points() {
        let inst = gen::build_case_study(1);
        let tree = &inst.scenarios;
        // 20:00 -> period 0: all three scenarios indistinguishable
        let at_root = shared_branches_at(tree, 0, inst.horizon).unwrap();
        assert_eq!(at_root.len(), 1);
        assert_eq!(at_root[0].scenarios, vec![0, 1, 2]);
        // 22:00 -> period 8: scenario 0 split off at 21:00, {1,2} still joined
        let mid: Vec<Vec<usize>> = shared_branches_at(tree, 8, inst.horizon)
            .unwrap()
            .iter()
            .map(|b| b.scenarios.clone())
            .collect();
        assert!(mid.contains(&vec![0]));
        assert!(mid.contains(&vec![1, 2]));
        // after 22:30 (period 10) everything is separated
        let late = shared_branches_at(tree, 10, inst.horizon).unwrap();
        assert_eq!(late.len(), 3);
        assert!(late.iter().all(|b| b.scenarios.len() == 1));
    }

    #[test]
    fn single_scenario_any_period_one_branch() {
        let tree = single_scenario_tree(7);
        for t in 0..=7 {
            let got = shared_branches_at(&tree, t, 7).unwrap();
            assert_eq!(got.len(), 1);
            assert_eq!(got[0].scenarios, vec![0]);
        }
        assert!(shared_branches_at(&tree, 8, 7).is_err());
    }

    #[test]
    fn projection_of_case_study_scenarios() {
        let inst = gen::build_case_study(1);
        // scenario 3 (index 2): EWR stays at 8 through 23:45 (period 15),
        // back to 10 from 00:00 (period 16)
        let p2 = project_scenario(&inst, 2).unwrap();
        p2.validate().unwrap();
        assert_eq!(p2.num_scenarios(), 1);
        for t in 0..=15 {
            assert_eq!(p2.scenarios.capacity("EWR", t, 0), 8);
        }
        for t in 16..=23 {
            assert_eq!(p2.scenarios.capacity("EWR", t, 0), 10);
        }
        // scenario 1 (index 0): PCA1 jumps from 44 to 50 at 21:00 (period 4)
        let p0 = project_scenario(&inst, 0).unwrap();
        assert_eq!(p0.scenarios.capacity("PCA1", 3, 0), 44);
        assert_eq!(p0.scenarios.capacity("PCA1", 4, 0), 50);
    }

    #[test]
    fn projection_of_deterministic_instance_is_identity() {
        let inst = gen::tiny::single_flight();
        let proj = project_scenario(&inst, 0).unwrap();
        assert_eq!(inst, proj);
    }

    #[test]
    fn prefix_consistency_violation_reported() {
        let inst = gen::tiny::t1();
        let mut tree = inst.scenarios.clone();
        // make scenario capacities differ inside the shared root branch
        let rows = tree.capacities.get_mut("P").unwrap();
        rows.get_mut("1").unwrap()[0] = 9;
        let report = validate_tree(&tree, inst.horizon, &["P"]);
        assert!(
            report.iter().any(|m| m.contains("share a branch")),
            "got: {report:?}"
        );
    }
}
