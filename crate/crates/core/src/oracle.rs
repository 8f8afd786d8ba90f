//! Brute-force ground truth for tiny instances.
//!
//! Policies are enumerated exhaustively: per flight a (route, departure)
//! decision function over scenarios shaped by the policy class, then per
//! scenario the admission periods at every resource along the chosen route.
//! Costs follow the same accounting the optimization models use, so oracle
//! optima and model optima are directly comparable.

use crate::error::{Error, Result};
use crate::instance::{derive_time_windows, Instance, Period, ResourceKind, Windows};
use crate::modelgen::StagePolicy;

/// Admission tuples with their air-delay costs, keyed (flight, option, departure).
type AdmissionTable = std::collections::HashMap<(usize, usize, Period), Vec<(Vec<Period>, f64)>>;

/// Hard enumeration budget; larger searches are refused.
pub const CANDIDATE_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlightDecision {
    pub option: usize,
    pub depart: Period,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlightPolicy {
    /// One (route, departure) per scenario; equal across scenarios that are
    /// indistinguishable when the decision binds.
    pub decisions: Vec<FlightDecision>,
    /// admissions[q][k] = admission period at the route's (k+1)-th resource.
    pub admissions: Vec<Vec<Period>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub flights: Vec<FlightPolicy>,
}

#[derive(Debug, Clone)]
pub struct PolicyEvaluation {
    pub scenario_costs: Vec<f64>,
    pub expected: f64,
    /// False when some (resource, period, scenario) exceeds its capacity.
    pub capacity_feasible: bool,
}

/// Cost and feasibility of an explicit policy. Structural violations
/// (unknown option, departure before schedule, admissions out of order or
/// outside windows) are errors naming the invariant; capacity overruns are
/// reported through `capacity_feasible`.
pub fn evaluate_policy(inst: &Instance, policy: &Policy) -> Result<PolicyEvaluation> {
    let windows = derive_time_windows(inst)?;
    let nq = inst.num_scenarios();
    if policy.flights.len() != inst.flights.len() {
        return Err(Error::validation(
            "policy must cover exactly the instance's flights",
        ));
    }

    let ids = inst.resource_ids();
    let travel = inst.arc_travel();
    let kinds: Vec<ResourceKind> = inst.network.resources.iter().map(|r| r.kind).collect();
    let mut scenario_costs = vec![0.0; nq];
    let mut capacity_feasible = true;

    #[allow(clippy::needless_range_loop)] // q also names the scenario itself
    for q in 0..nq {
        let mut usage: std::collections::HashMap<(usize, Period), u32> =
            std::collections::HashMap::new();
        for (fi, (f, fp)) in inst.flights.iter().zip(&policy.flights).enumerate() {
            if fp.decisions.len() != nq || fp.admissions.len() != nq {
                return Err(Error::validation(format!(
                    "flight `{}`: policy must carry one decision and admission list per scenario",
                    f.id
                )));
            }
            let dec = fp.decisions[q];
            let route = f.options.get(dec.option).ok_or_else(|| {
                Error::validation(format!("flight `{}`: unknown option {}", f.id, dec.option))
            })?;
            let awin = windows.get(fi, dec.option, 0);
            if dec.depart < f.dep {
                return Err(Error::validation(format!(
                    "flight `{}`: departure {} before scheduled departure {}",
                    f.id, dec.depart, f.dep
                )));
            }
            if dec.depart > awin.hi {
                return Err(Error::validation(format!(
                    "flight `{}`: departure {} outside the window [{}, {}]",
                    f.id, dec.depart, awin.lo, awin.hi
                )));
            }
            let adms = &fp.admissions[q];
            if adms.len() != route.omega.len() - 1 {
                return Err(Error::validation(format!(
                    "flight `{}`: admission list must cover every resource after the airport",
                    f.id
                )));
            }
            let mut prev_time = dec.depart;
            let mut prev_res = ids[route.omega[0].as_str()];
            for (k, &at) in adms.iter().enumerate() {
                let rid = &route.omega[k + 1];
                let ri = ids[rid.as_str()];
                let win = windows.get(fi, dec.option, k + 1);
                let hop = travel[&(prev_res, ri)];
                if at < prev_time + hop {
                    return Err(Error::validation(format!(
                        "flight `{}`: admission at `{rid}` violates the travel time from `{}`",
                        f.id,
                        route.omega[k]
                    )));
                }
                if !win.contains(at) {
                    return Err(Error::validation(format!(
                        "flight `{}`: admission at `{rid}` in period {at} outside [{}, {}]",
                        f.id, win.lo, win.hi
                    )));
                }
                if kinds[ri] == ResourceKind::Pca {
                    *usage.entry((ri, at)).or_default() += 1;
                }
                prev_time = at;
                prev_res = ri;
            }

            let ground = (dec.depart - f.dep) as f64;
            let last_id = route.omega.last().unwrap();
            let sched_last = route.crossings[last_id];
            let air = (*adms.last().unwrap() - sched_last) as f64 - ground;
            scenario_costs[q] += route.cost + inst.costs.cg * ground + inst.costs.ca * air;
        }
        for ((ri, t), count) in usage {
            let rid = &inst.network.resources[ri].id;
            if count > inst.scenarios.capacity(rid, t, q) {
                capacity_feasible = false;
            }
        }
    }

    let expected = scenario_costs
        .iter()
        .zip(&inst.scenarios.probabilities)
        .map(|(c, p)| c * p)
        .sum();
    Ok(PolicyEvaluation {
        scenario_costs,
        expected,
        capacity_feasible,
    })
}

/// Decision functions a flight may use under a policy class, in
/// deterministic lexicographic order.
fn decision_functions(
    inst: &Instance,
    windows: &Windows,
    fi: usize,
    class: StagePolicy,
) -> Vec<Vec<FlightDecision>> {
    let f = &inst.flights[fi];
    let nq = inst.num_scenarios();
    let mut choices: Vec<FlightDecision> = Vec::new();
    for oi in 0..f.options.len() {
        let awin = windows.get(fi, oi, 0);
        for d in awin.iter() {
            choices.push(FlightDecision {
                option: oi,
                depart: d,
            });
        }
    }

    match class {
        StagePolicy::TwoStage => choices.iter().map(|&c| vec![c; nq]).collect(),
        StagePolicy::SemiDynamic => {
            // group scenarios by the branch active at the scheduled departure
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for b in &inst.scenarios.branches {
                if b.start <= f.dep && f.dep <= b.end {
                    groups.push(b.scenarios.clone());
                }
            }
            let mut out = Vec::new();
            let mut picks = vec![0usize; groups.len()];
            loop {
                let mut per_scenario = vec![choices[0]; nq];
                for (g, &pick) in groups.iter().zip(&picks) {
                    for &q in g {
                        per_scenario[q] = choices[pick];
                    }
                }
                out.push(per_scenario);
                // odometer
                let mut i = picks.len();
                loop {
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                    picks[i] += 1;
                    if picks[i] < choices.len() {
                        break;
                    }
                    picks[i] = 0;
                }
            }
        }
        StagePolicy::Dynamic => {
            let mut out = Vec::new();
            let mut picks = vec![0usize; nq];
            'outer: loop {
                let per_scenario: Vec<FlightDecision> =
                    picks.iter().map(|&p| choices[p]).collect();
                // keep only branch-consistent functions: scenarios still
                // indistinguishable at the earlier departure must agree
                let mut ok = true;
                'check: for a in 0..nq {
                    for b in a + 1..nq {
                        let t = per_scenario[a].depart.min(per_scenario[b].depart);
                        if inst.scenarios.same_branch(a, b, t)
                            && per_scenario[a] != per_scenario[b]
                        {
                            ok = false;
                            break 'check;
                        }
                    }
                }
                if ok {
                    out.push(per_scenario);
                }
                let mut i = picks.len();
                loop {
                    if i == 0 {
                        break 'outer;
                    }
                    i -= 1;
                    picks[i] += 1;
                    if picks[i] < choices.len() {
                        break;
                    }
                    picks[i] = 0;
                }
            }
            out
        }
    }
}

/// Admission tuples for one flight given a decision, with their air delays,
/// in lexicographic order.
fn admission_tuples(
    inst: &Instance,
    windows: &Windows,
    fi: usize,
    dec: FlightDecision,
) -> Vec<(Vec<Period>, f64)> {
    let f = &inst.flights[fi];
    let route = &f.options[dec.option];
    let travel = inst.arc_travel();
    let ids = inst.resource_ids();
    let n = route.omega.len() - 1;
    let sched_last = route.crossings[route.omega.last().unwrap()];
    let ground = (dec.depart - f.dep) as f64;

    let mut out = Vec::new();
    let mut current: Vec<Period> = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        windows: &Windows,
        travel: &std::collections::HashMap<(usize, usize), Period>,
        ids: &std::collections::HashMap<&str, usize>,
        fi: usize,
        dec: FlightDecision,
        route: &crate::instance::Route,
        k: usize,
        prev_time: Period,
        current: &mut Vec<Period>,
        out: &mut Vec<(Vec<Period>, f64)>,
        sched_last: Period,
        ground: f64,
    ) {
        let n = route.omega.len() - 1;
        if k == n {
            let air = (*current.last().unwrap() - sched_last) as f64 - ground;
            out.push((current.clone(), air));
            return;
        }
        let win = windows.get(fi, dec.option, k + 1);
        let hop = travel[&(
            ids[route.omega[k].as_str()],
            ids[route.omega[k + 1].as_str()],
        )];
        let earliest = (prev_time + hop).max(win.lo);
        for at in earliest..=win.hi {
            current.push(at);
            rec(
                windows, travel, ids, fi, dec, route, k + 1, at, current, out, sched_last, ground,
            );
            current.pop();
        }
    }
    rec(
        windows,
        &travel,
        &ids,
        fi,
        dec,
        route,
        0,
        dec.depart,
        &mut current,
        &mut out,
        sched_last,
        ground,
    );
    out
}

/// Candidate-count estimate used for the budget refusal.
fn candidate_estimate(
    inst: &Instance,
    windows: &Windows,
    class: StagePolicy,
) -> f64 {
    let nq = inst.num_scenarios() as f64;
    let mut combos = 1f64;
    let mut adm = 1f64;
    for (fi, f) in inst.flights.iter().enumerate() {
        let mut n_choices = 0f64;
        let mut max_tuples = 0f64;
        for oi in 0..f.options.len() {
            let awin = windows.get(fi, oi, 0);
            n_choices += awin.len() as f64;
            // tuple-count upper bound: product of window widths
            let mut t = 1f64;
            for pos in 1..f.options[oi].omega.len() {
                t *= windows.get(fi, oi, pos).len() as f64;
            }
            max_tuples = max_tuples.max(t);
        }
        let functions = match class {
            StagePolicy::TwoStage => n_choices,
            StagePolicy::SemiDynamic | StagePolicy::Dynamic => n_choices.powf(nq),
        };
        combos *= functions;
        adm *= max_tuples;
    }
    combos * (1.0 + nq * adm)
}

/// Exhaustive search over nonanticipative policies of the class. Returns the
/// minimum expected cost and the first optimal policy in enumeration order
/// (lexicographically smallest encoding).
pub fn enumerate_policies(inst: &Instance, class: StagePolicy) -> Result<(f64, Policy)> {
    inst.validate()?;
    let windows = derive_time_windows(inst)?;
    let estimate = candidate_estimate(inst, &windows, class);
    if estimate > CANDIDATE_BUDGET {
        return Err(Error::Budget(format!(
            "about {estimate:.2e} candidate policies exceed the budget of {CANDIDATE_BUDGET:.0e}; \
             the oracle is sized for instances with <= 3 flights, <= 2 options each, \
             <= 2 PCAs per route, <= 10 periods and <= 3 scenarios"
        )));
    }

    let nq = inst.num_scenarios();
    let nf = inst.flights.len();
    let ids = inst.resource_ids();
    let kinds: Vec<ResourceKind> = inst.network.resources.iter().map(|r| r.kind).collect();
    let pca_pos: Vec<Vec<Vec<usize>>> = inst
        .flights
        .iter()
        .map(|f| {
            f.options
                .iter()
                .map(|r| {
                    r.omega[1..]
                        .iter()
                        .enumerate()
                        .filter(|(_, rid)| kinds[ids[rid.as_str()]] == ResourceKind::Pca)
                        .map(|(k, _)| k)
                        .collect()
                })
                .collect()
        })
        .collect();
    let res_of: Vec<Vec<Vec<usize>>> = inst
        .flights
        .iter()
        .map(|f| {
            f.options
                .iter()
                .map(|r| r.omega[1..].iter().map(|rid| ids[rid.as_str()]).collect())
                .collect()
        })
        .collect();

    let functions: Vec<Vec<Vec<FlightDecision>>> = (0..nf)
        .map(|fi| decision_functions(inst, &windows, fi, class))
        .collect();
    if functions.iter().any(|f| f.is_empty()) {
        return Err(Error::validation("a flight has no feasible decisions"));
    }

    // admission tuples per (flight, option, depart), shared across scenarios
    let mut tuples: AdmissionTable = std::collections::HashMap::new();
    for (fi, f) in inst.flights.iter().enumerate() {
        for oi in 0..f.options.len() {
            let awin = windows.get(fi, oi, 0);
            for d in awin.iter() {
                let dec = FlightDecision {
                    option: oi,
                    depart: d,
                };
                tuples.insert((fi, oi, d), admission_tuples(inst, &windows, fi, dec));
            }
        }
    }

    let n_res = inst.network.resources.len();
    let horizon = inst.horizon as usize;
    let caps: Vec<Vec<Vec<u32>>> = (0..nq)
        .map(|q| {
            (0..n_res)
                .map(|ri| {
                    let r = &inst.network.resources[ri];
                    (0..=horizon)
                        .map(|t| {
                            if r.kind == ResourceKind::Pca {
                                inst.scenarios.capacity(&r.id, t as Period, q)
                            } else {
                                u32::MAX
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let cg = inst.costs.cg;
    let ca = inst.costs.ca;
    let probs = &inst.scenarios.probabilities;

    let mut best: Option<(f64, Policy)> = None;
    let mut picks = vec![0usize; nf];
    let mut usage = vec![vec![0u32; horizon + 1]; n_res];

    // DFS over one scenario's admissions: minimize total air delay cost.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        fi: usize,
        nf: usize,
        decs: &[FlightDecision],
        tuples: &AdmissionTable,
        pca_pos: &[Vec<Vec<usize>>],
        res_of: &[Vec<Vec<usize>>],
        caps: &[Vec<u32>],
        usage: &mut [Vec<u32>],
        ca: f64,
        air_so_far: f64,
        best_air: &mut f64,
        current: &mut Vec<Vec<Period>>,
        best_adm: &mut Option<Vec<Vec<Period>>>,
    ) {
        if air_so_far >= *best_air {
            return; // cannot strictly improve
        }
        if fi == nf {
            *best_air = air_so_far;
            *best_adm = Some(current.clone());
            return;
        }
        let dec = decs[fi];
        for (tuple, air) in &tuples[&(fi, dec.option, dec.depart)] {
            let cost = air_so_far + ca * air;
            if cost >= *best_air {
                continue;
            }
            // capacity check at this flight's PCA positions
            let mut ok = true;
            for &k in &pca_pos[fi][dec.option] {
                let ri = res_of[fi][dec.option][k];
                let t = tuple[k] as usize;
                if usage[ri][t] + 1 > caps[ri][t] {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            for &k in &pca_pos[fi][dec.option] {
                usage[res_of[fi][dec.option][k]][tuple[k] as usize] += 1;
            }
            current.push(tuple.clone());
            dfs(
                fi + 1,
                nf,
                decs,
                tuples,
                pca_pos,
                res_of,
                caps,
                usage,
                ca,
                cost,
                best_air,
                current,
                best_adm,
            );
            current.pop();
            for &k in &pca_pos[fi][dec.option] {
                usage[res_of[fi][dec.option][k]][tuple[k] as usize] -= 1;
            }
        }
    }

    'combos: loop {
        // fixed decision functions for every flight
        let combo: Vec<&Vec<FlightDecision>> = picks
            .iter()
            .enumerate()
            .map(|(fi, &p)| &functions[fi][p])
            .collect();

        let mut expected = 0.0;
        let mut adm_per_q: Vec<Vec<Vec<Period>>> = Vec::with_capacity(nq);
        let mut feasible = true;
        for q in 0..nq {
            let decs: Vec<FlightDecision> = combo.iter().map(|f| f[q]).collect();
            let mut base = 0.0;
            for (fi, dec) in decs.iter().enumerate() {
                let f = &inst.flights[fi];
                base += f.options[dec.option].cost + cg * (dec.depart - f.dep) as f64;
            }
            for row in usage.iter_mut() {
                row.iter_mut().for_each(|v| *v = 0);
            }
            let mut best_air = f64::INFINITY;
            let mut best_adm = None;
            let mut current = Vec::new();
            dfs(
                0,
                nf,
                &decs,
                &tuples,
                &pca_pos,
                &res_of,
                &caps[q],
                &mut usage,
                ca,
                0.0,
                &mut best_air,
                &mut current,
                &mut best_adm,
            );
            match best_adm {
                Some(adm) => {
                    expected += probs[q] * (base + best_air);
                    adm_per_q.push(adm);
                }
                None => {
                    feasible = false;
                    break;
                }
            }
        }

        if feasible && best.as_ref().is_none_or(|(c, _)| expected < *c - 1e-12) {
            let flights = (0..nf)
                .map(|fi| FlightPolicy {
                    decisions: combo[fi].clone(),
                    admissions: (0..nq).map(|q| adm_per_q[q][fi].clone()).collect(),
                })
                .collect();
            best = Some((expected, Policy { flights }));
        }

        let mut i = picks.len();
        loop {
            if i == 0 {
                break 'combos;
            }
            i -= 1;
            picks[i] += 1;
            if picks[i] < functions[i].len() {
                break;
            }
            picks[i] = 0;
        }
    }

    best.ok_or_else(|| Error::solve("no feasible policy exists for this instance"))
}
