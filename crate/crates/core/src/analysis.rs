//! Solution decoding, feasibility verification, nonanticipativity checks,
//! perfect-information bounds, and the model-comparison report.

use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::instance::{derive_paths, derive_time_windows, Instance, Period, ResourceKind};
use crate::mip::{
    max_fractionality, relax, solve_external, solve_reference, MipModel, SolveResult, SolveStatus,
    INTEGRALITY_TOL,
};
use crate::modelgen::{
    build_model, BuildOptions, ModelFamily, StagePolicy, VarKey, VarMap,
};
use crate::oracle;
use crate::scenario::project_scenario;

// ---------------------------------------------------------------------------
// solver configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum LpBackend {
    /// The built-in bounded simplex; small models only.
    Reference,
    /// External command template with {in}/{out} placeholders.
    External(String),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lp: LpBackend,
    /// External solver used when an LP relaxation comes back fractional.
    pub mip: Option<String>,
    /// Working directory for external solver runs; system temp when unset.
    pub workdir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lp: LpBackend::Reference,
            mip: None,
            workdir: None,
        }
    }
}

impl SolverConfig {
    /// Reference LP solving with the `CTOP_SOLVER` environment variable, if
    /// set, as the MIP fallback.
    pub fn from_env() -> Self {
        SolverConfig {
            lp: LpBackend::Reference,
            mip: std::env::var("CTOP_SOLVER").ok(),
            workdir: None,
        }
    }

    /// Route everything through one external command.
    pub fn external(command: impl Into<String>) -> Self {
        let command = command.into();
        SolverConfig {
            lp: LpBackend::External(command.clone()),
            mip: Some(command),
            workdir: None,
        }
    }

    fn workdir(&self) -> PathBuf {
        self.workdir.clone().unwrap_or_else(std::env::temp_dir)
    }
}

/// Outcome of solving one model to proven optimality, LP relaxation first.
#[derive(Debug, Clone)]
pub struct VariantSolve {
    pub result: SolveResult,
    /// True when the LP relaxation already solved the integer program.
    pub lp_integral: bool,
    /// Largest integrality violation of the LP relaxation.
    pub max_frac: f64,
    pub used_mip_solver: bool,
}

/// Solve `model` via its LP relaxation; fall back to the configured MIP
/// solver when the relaxation is fractional.
pub fn solve_to_optimality(model: &MipModel, cfg: &SolverConfig) -> Result<VariantSolve> {
    let relaxed = relax(model);
    let lp = match &cfg.lp {
        LpBackend::Reference => solve_reference(&relaxed)?,
        LpBackend::External(cmd) => solve_external(&relaxed, cmd, &cfg.workdir())?,
    };
    if lp.status != SolveStatus::Optimal {
        return Err(Error::solve(format!(
            "LP relaxation finished with status {:?}",
            lp.status
        )));
    }
    let max_frac = max_fractionality(&lp, model);
    if max_frac <= INTEGRALITY_TOL {
        return Ok(VariantSolve {
            result: lp,
            lp_integral: true,
            max_frac,
            used_mip_solver: false,
        });
    }
    let Some(cmd) = &cfg.mip else {
        return Err(Error::solve(format!(
            "LP relaxation is fractional (max fractionality {max_frac:.3e}) and no MIP solver \
             is configured; set CTOP_SOLVER or pass an external command"
        )));
    };
    let mip = solve_external(model, cmd, &cfg.workdir())?;
    if mip.status != SolveStatus::Optimal {
        return Err(Error::solve(format!(
            "MIP solve finished with status {:?}",
            mip.status
        )));
    }
    Ok(VariantSolve {
        result: mip,
        lp_integral: false,
        max_frac,
        used_mip_solver: true,
    })
}

// ---------------------------------------------------------------------------
// decoded plans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FlightPlan {
    pub option: usize,
    pub depart: Period,
    pub ground: u32,
    /// Admission period at each post-airport resource. Absent for
    /// flow-aggregated solutions whose crossing counts came back fractional.
    pub admissions: Option<Vec<Period>>,
    pub air: Option<u32>,
}

/// Decoded per-scenario policy plus per-scenario totals.
#[derive(Debug, Clone)]
pub struct FlightPlanSet {
    pub family: ModelFamily,
    pub policy: StagePolicy,
    /// plans[scenario][flight]
    pub plans: Vec<Vec<FlightPlan>>,
    pub ground_periods: Vec<f64>,
    pub air_periods: Vec<f64>,
    pub route_costs: Vec<f64>,
}

impl FlightPlanSet {
    /// Expected cost recomputed from the decoded delays.
    pub fn expected_cost(&self, inst: &Instance) -> f64 {
        (0..inst.num_scenarios())
            .map(|q| {
                inst.scenarios.probabilities[q]
                    * (self.route_costs[q]
                        + inst.costs.cg * self.ground_periods[q]
                        + inst.costs.ca * self.air_periods[q])
            })
            .sum()
    }

    /// Reshape into an oracle policy when every plan carries admissions.
    pub fn as_policy(&self) -> Option<oracle::Policy> {
        let nq = self.plans.len();
        let nf = self.plans[0].len();
        let mut flights = Vec::with_capacity(nf);
        for fi in 0..nf {
            let mut decisions = Vec::with_capacity(nq);
            let mut admissions = Vec::with_capacity(nq);
            for q in 0..nq {
                let plan = &self.plans[q][fi];
                decisions.push(oracle::FlightDecision {
                    option: plan.option,
                    depart: plan.depart,
                });
                admissions.push(plan.admissions.clone()?);
            }
            flights.push(oracle::FlightPolicy {
                decisions,
                admissions,
            });
        }
        Some(oracle::Policy { flights })
    }
}

fn integral_binary(x: f64) -> Result<bool> {
    if (x - 0.0).abs() <= INTEGRALITY_TOL {
        Ok(false)
    } else if (x - 1.0).abs() <= INTEGRALITY_TOL {
        Ok(true)
    } else {
        Err(Error::Decode(format!(
            "fractional solution value {x}; decode unsupported, solve as a MIP first"
        )))
    }
}

/// Read flight plans back out of a solved model.
pub fn decode_solution(
    vm: &VarMap,
    result: &SolveResult,
    inst: &Instance,
) -> Result<FlightPlanSet> {
    if result.status != SolveStatus::Optimal {
        return Err(Error::Decode(format!(
            "cannot decode a solve with status {:?}",
            result.status
        )));
    }
    let windows = derive_time_windows(inst)?;
    let nq = inst.num_scenarios();
    let multi = vm.policy.is_multistage();
    let value = |key: VarKey| -> Option<f64> { vm.col(&key).map(|c| result.values[c]) };

    // jump period of a monotone 0/1 trajectory over a window
    let jump = |mut cols: Vec<(Period, f64)>, what: &str| -> Result<Period> {
        cols.sort_by_key(|&(t, _)| t);
        let mut seen_one = false;
        let mut at = None;
        for (t, v) in cols {
            let one = integral_binary(v)?;
            if one && !seen_one {
                seen_one = true;
                at = Some(t);
            } else if !one && seen_one {
                return Err(Error::Decode(format!(
                    "non-monotone trajectory for {what} at period {t}"
                )));
            }
        }
        at.ok_or_else(|| Error::Decode(format!("trajectory for {what} never reaches 1")))
    };

    let mut plans: Vec<Vec<FlightPlan>> = Vec::with_capacity(nq);
    for q in 0..nq {
        let mut per_flight = Vec::with_capacity(inst.flights.len());
        for (fi, f) in inst.flights.iter().enumerate() {
            // chosen route
            let mut chosen = None;
            for oi in 0..f.options.len() {
                let v = if multi {
                    value(VarKey::ScenarioRoute {
                        flight: fi as u32,
                        option: oi as u32,
                        scenario: q as u32,
                    })
                } else {
                    value(VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    })
                }
                .expect("route indicator exists");
                if integral_binary(v)? {
                    if chosen.is_some() {
                        return Err(Error::Decode(format!(
                            "flight `{}` selects two routes in scenario {q}",
                            f.id
                        )));
                    }
                    chosen = Some(oi);
                }
            }
            let oi = chosen.ok_or_else(|| {
                Error::Decode(format!("flight `{}` selects no route in scenario {q}", f.id))
            })?;

            let awin = windows.get(fi, oi, 0);
            let air_scen = if multi { Some(q as u32) } else { None };
            let depart = jump(
                awin.iter()
                    .map(|t| {
                        (
                            t,
                            value(VarKey::W {
                                flight: fi as u32,
                                option: oi as u32,
                                pos: 0,
                                period: t,
                                scenario: air_scen,
                            })
                            .expect("airport trajectory exists"),
                        )
                    })
                    .collect(),
                &format!("flight `{}` departure", f.id),
            )?;
            let ground = depart - f.dep;

            let route = &f.options[oi];
            let (admissions, air) = if vm.family == ModelFamily::Lagrangian {
                let mut adms = Vec::with_capacity(route.omega.len() - 1);
                for pos in 1..route.omega.len() {
                    let win = windows.get(fi, oi, pos);
                    let at = jump(
                        win.iter()
                            .map(|t| {
                                (
                                    t,
                                    value(VarKey::W {
                                        flight: fi as u32,
                                        option: oi as u32,
                                        pos: pos as u32,
                                        period: t,
                                        scenario: Some(q as u32),
                                    })
                                    .expect("passage trajectory exists"),
                                )
                            })
                            .collect(),
                        &format!("flight `{}` at `{}`", f.id, route.omega[pos]),
                    )?;
                    adms.push(at);
                }
                let sched_last = route.crossings[route.omega.last().unwrap()];
                let air = adms.last().unwrap() - sched_last - ground;
                (Some(adms), Some(air))
            } else {
                (None, None) // filled below by the flow reconstruction
            };

            per_flight.push(FlightPlan {
                option: oi,
                depart,
                ground,
                admissions,
                air,
            });
        }
        plans.push(per_flight);
    }

    if vm.family == ModelFamily::LagrangianEulerian {
        reconstruct_flow_admissions(vm, result, inst, &mut plans)?;
    }

    let mut ground_periods = vec![0.0; nq];
    let mut air_periods = vec![0.0; nq];
    let mut route_costs = vec![0.0; nq];
    for q in 0..nq {
        for (fi, plan) in plans[q].iter().enumerate() {
            ground_periods[q] += plan.ground as f64;
            route_costs[q] += inst.flights[fi].options[plan.option].cost;
        }
    }
    match vm.family {
        ModelFamily::Lagrangian => {
            for q in 0..nq {
                for plan in &plans[q] {
                    air_periods[q] += plan.air.expect("flight-level air delay") as f64;
                }
            }
        }
        ModelFamily::LagrangianEulerian => {
            // aggregate queue occupancy, straight from the A columns
            for (col, key) in (0..result.values.len()).map(|c| (c, vm.key(c))) {
                if let VarKey::AirHold { scenario, .. } = key {
                    air_periods[scenario as usize] += result.values[col];
                }
            }
        }
    }

    Ok(FlightPlanSet {
        family: vm.family,
        policy: vm.policy,
        plans,
        ground_periods,
        air_periods,
        route_costs,
    })
}

/// First-come-first-served assignment of integral crossing counts to the
/// flights queued on each path; fills admissions and per-flight air delays.
/// Fractional crossings leave the admissions absent (aggregate totals still
/// hold).
fn reconstruct_flow_admissions(
    vm: &VarMap,
    result: &SolveResult,
    inst: &Instance,
    plans: &mut [Vec<FlightPlan>],
) -> Result<()> {
    let paths = derive_paths(inst);
    let travel = inst.arc_travel();
    let ids = inst.resource_ids();
    let nq = inst.num_scenarios();
    let horizon = inst.horizon;

    let l_val = |pi: usize, pos: usize, t: Period, q: usize| -> f64 {
        vm.col(&VarKey::Crossing {
            path: pi as u32,
            pos: pos as u32,
            period: t,
            scenario: q as u32,
        })
        .map(|c| result.values[c])
        .unwrap_or(0.0)
    };

    // bail out silently when any crossing count is fractional
    for (pi, path) in paths.paths.iter().enumerate() {
        for pos in 0..path.len() {
            for q in 0..nq {
                for t in 0..=horizon {
                    let v = l_val(pi, pos, t, q);
                    if (v - v.round()).abs() > INTEGRALITY_TOL {
                        return Ok(());
                    }
                }
            }
        }
    }

    #[allow(clippy::needless_range_loop)] // q also names the scenario itself
    for q in 0..nq {
        // flights grouped by the path of the route they actually fly
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); paths.paths.len()];
        for (fi, plan) in plans[q].iter().enumerate() {
            members[paths.path_of(fi, plan.option)].push(fi);
        }
        for (pi, path) in paths.paths.iter().enumerate() {
            if members[pi].is_empty() {
                continue;
            }
            let mut adms: Vec<Vec<Period>> = vec![Vec::new(); members[pi].len()];
            // arrival time at the head of the path
            let mut pending: Vec<(Period, usize)> = members[pi]
                .iter()
                .enumerate()
                .map(|(slot, &fi)| {
                    let plan = &plans[q][fi];
                    let route = &inst.flights[fi].options[plan.option];
                    let hop = travel[&(
                        ids[route.omega[0].as_str()],
                        ids[route.omega[1].as_str()],
                    )];
                    (plan.depart + hop, slot)
                })
                .collect();
            for pos in 0..path.len() {
                pending.sort_unstable();
                let mut queue: std::collections::VecDeque<(Period, usize)> =
                    std::collections::VecDeque::new();
                let mut next_arrivals: Vec<(Period, usize)> = Vec::new();
                let mut cursor = 0usize;
                for t in 0..=horizon {
                    while cursor < pending.len() && pending[cursor].0 == t {
                        queue.push_back(pending[cursor]);
                        cursor += 1;
                    }
                    let mut crossing = l_val(pi, pos, t, q).round() as i64;
                    while crossing > 0 {
                        let Some((_, slot)) = queue.pop_front() else {
                            return Err(Error::Decode(format!(
                                "crossing counts on path {pi} exceed the queued flights at period {t}"
                            )));
                        };
                        adms[slot].push(t);
                        if pos + 1 < path.len() {
                            let hop = travel[&(
                                ids[path[pos].as_str()],
                                ids[path[pos + 1].as_str()],
                            )];
                            next_arrivals.push((t + hop, slot));
                        }
                        crossing -= 1;
                    }
                }
                if !queue.is_empty() {
                    return Err(Error::Decode(format!(
                        "path {pi} leaves {} flights queued past the horizon",
                        queue.len()
                    )));
                }
                pending = next_arrivals;
            }
            for (slot, &fi) in members[pi].iter().enumerate() {
                let plan = &mut plans[q][fi];
                let route = &inst.flights[fi].options[plan.option];
                let sched_last = route.crossings[route.omega.last().unwrap()];
                let last = *adms[slot].last().unwrap();
                plan.air = Some(last - sched_last - plan.ground);
                plan.admissions = Some(std::mem::take(&mut adms[slot]));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    CapacityOverage {
        resource: String,
        period: Period,
        scenario: usize,
        admitted: u32,
        capacity: u32,
    },
    TravelTime {
        flight: String,
        scenario: usize,
        resource: String,
    },
    Window {
        flight: String,
        scenario: usize,
        resource: String,
        period: Period,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::CapacityOverage {
                resource,
                period,
                scenario,
                admitted,
                capacity,
            } => write!(
                f,
                "capacity overage at `{resource}` period {period} scenario {scenario}: {admitted} > {capacity}"
            ),
            Violation::TravelTime {
                flight,
                scenario,
                resource,
            } => write!(
                f,
                "flight `{flight}` scenario {scenario}: admission at `{resource}` violates travel time"
            ),
            Violation::Window {
                flight,
                scenario,
                resource,
                period,
            } => write!(
                f,
                "flight `{flight}` scenario {scenario}: period {period} outside the window at `{resource}`"
            ),
        }
    }
}

/// Re-simulate decoded plans against capacities, travel times, and windows.
/// Flow-aggregated plans skip the per-flight upper window ends (the
/// aggregation deliberately relaxes them); lower ends always apply.
pub fn verify_feasibility(plans: &FlightPlanSet, inst: &Instance) -> Vec<Violation> {
    let windows = match derive_time_windows(inst) {
        Ok(w) => w,
        Err(_) => return Vec::new(),
    };
    let ids = inst.resource_ids();
    let travel = inst.arc_travel();
    let kinds: Vec<ResourceKind> = inst.network.resources.iter().map(|r| r.kind).collect();
    let enforce_upper = plans.family == ModelFamily::Lagrangian;
    let mut out = Vec::new();

    for (q, per_flight) in plans.plans.iter().enumerate() {
        let mut usage: std::collections::BTreeMap<(usize, Period), u32> =
            std::collections::BTreeMap::new();
        for (fi, plan) in per_flight.iter().enumerate() {
            let f = &inst.flights[fi];
            let route = &f.options[plan.option];
            let awin = windows.get(fi, plan.option, 0);
            if plan.depart < awin.lo || plan.depart > awin.hi {
                out.push(Violation::Window {
                    flight: f.id.clone(),
                    scenario: q,
                    resource: route.omega[0].clone(),
                    period: plan.depart,
                });
            }
            let Some(adms) = &plan.admissions else {
                continue;
            };
            let mut prev_time = plan.depart;
            let mut prev_res = ids[route.omega[0].as_str()];
            for (k, &at) in adms.iter().enumerate() {
                let rid = &route.omega[k + 1];
                let ri = ids[rid.as_str()];
                let win = windows.get(fi, plan.option, k + 1);
                if at < prev_time + travel[&(prev_res, ri)] {
                    out.push(Violation::TravelTime {
                        flight: f.id.clone(),
                        scenario: q,
                        resource: rid.clone(),
                    });
                }
                if at < win.lo || (enforce_upper && at > win.hi) {
                    out.push(Violation::Window {
                        flight: f.id.clone(),
                        scenario: q,
                        resource: rid.clone(),
                        period: at,
                    });
                }
                if kinds[ri] == ResourceKind::Pca {
                    *usage.entry((ri, at)).or_default() += 1;
                }
                prev_time = at;
                prev_res = ri;
            }
        }
        for ((ri, t), admitted) in usage {
            let rid = &inst.network.resources[ri].id;
            if t <= inst.horizon {
                let capacity = inst.scenarios.capacity(rid, t, q);
                if admitted > capacity {
                    out.push(Violation::CapacityOverage {
                        resource: rid.clone(),
                        period: t,
                        scenario: q,
                        admitted,
                        capacity,
                    });
                }
            }
        }
    }
    out
}

/// True when the decoded decisions obey the class's information structure;
/// otherwise the first counterexample, described.
pub fn check_nonanticipativity(
    plans: &FlightPlanSet,
    inst: &Instance,
) -> (bool, Option<String>) {
    let tree = &inst.scenarios;
    let nq = plans.plans.len();
    for (fi, f) in inst.flights.iter().enumerate() {
        for a in 0..nq {
            for b in a + 1..nq {
                let pa = &plans.plans[a][fi];
                let pb = &plans.plans[b][fi];
                let must_agree = match plans.policy {
                    StagePolicy::TwoStage => true,
                    StagePolicy::SemiDynamic => tree.same_branch(a, b, f.dep),
                    StagePolicy::Dynamic => {
                        tree.same_branch(a, b, pa.depart.min(pb.depart))
                    }
                };
                if must_agree && (pa.option != pb.option || pa.depart != pb.depart) {
                    return (
                        false,
                        Some(format!(
                            "flight `{}`: scenarios {a} and {b} are indistinguishable when the \
                             decision binds but choose (option {}, t={}) vs (option {}, t={})",
                            f.id, pa.option, pa.depart, pb.option, pb.depart
                        )),
                    );
                }
            }
        }
    }
    (true, None)
}

// ---------------------------------------------------------------------------
// perfect information and the comparison report
// ---------------------------------------------------------------------------

/// Probability-weighted optimum of the per-scenario deterministic problems.
/// Per-family so that the bound is comparable within each model family.
pub fn perfect_information_bound(
    inst: &Instance,
    cfg: &SolverConfig,
    family: ModelFamily,
) -> Result<(f64, Vec<PerScenarioSolve>)> {
    let mut per_scenario = Vec::with_capacity(inst.num_scenarios());
    let mut expected = 0.0;
    for q in 0..inst.num_scenarios() {
        let proj = project_scenario(inst, q)?;
        let (model, vm) = build_model(&proj, family, StagePolicy::TwoStage, &BuildOptions::default())?;
        let solve = solve_to_optimality(&model, cfg)?;
        let plans = decode_solution(&vm, &solve.result, &proj)?;
        expected += inst.scenarios.probabilities[q] * solve.result.objective;
        per_scenario.push(PerScenarioSolve {
            objective: solve.result.objective,
            ground: plans.ground_periods[0],
            air: plans.air_periods[0],
            route_cost: plans.route_costs[0],
            lp_integral: solve.lp_integral,
            max_frac: solve.max_frac,
        });
    }
    Ok((expected, per_scenario))
}

#[derive(Debug, Clone)]
pub struct PerScenarioSolve {
    pub objective: f64,
    pub ground: f64,
    pub air: f64,
    pub route_cost: f64,
    pub lp_integral: bool,
    pub max_frac: f64,
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub variant: String,
    pub family: String,
    pub policy: String,
    pub expected_cost: f64,
    pub ground: Vec<f64>,
    pub air: Vec<f64>,
    pub route_cost: Vec<f64>,
    pub lp_integral: bool,
    pub max_frac: f64,
    pub wall_ms: u128,
    pub error: Option<String>,
}

impl ReportRow {
    fn failed(variant: String, family: String, policy: String, nq: usize, err: String) -> Self {
        ReportRow {
            variant,
            family,
            policy,
            expected_cost: f64::NAN,
            ground: vec![f64::NAN; nq],
            air: vec![f64::NAN; nq],
            route_cost: vec![f64::NAN; nq],
            lp_integral: false,
            max_frac: f64::NAN,
            wall_ms: 0,
            error: Some(err),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub scenario_count: usize,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub families: Vec<ModelFamily>,
    pub policies: Vec<StagePolicy>,
    pub include_perfect_information: bool,
    pub build: BuildOptions,
    /// Worker threads for independent variant solves.
    pub jobs: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            families: ModelFamily::ALL.to_vec(),
            policies: StagePolicy::ALL.to_vec(),
            include_perfect_information: true,
            build: BuildOptions::default(),
            jobs: 1,
        }
    }
}

/// Build, solve, decode, verify, and tabulate every requested variant plus
/// the perfect-information rows. Individual failures become row-level
/// errors; other rows still complete.
pub fn compare_models(
    inst: &Instance,
    cfg: &SolverConfig,
    opts: &CompareOptions,
) -> ComparisonReport {
    enum Task {
        Variant(ModelFamily, StagePolicy),
        PerfectInformation(ModelFamily),
    }
    let mut tasks = Vec::new();
    for &family in &opts.families {
        for &policy in &opts.policies {
            tasks.push(Task::Variant(family, policy));
        }
        if opts.include_perfect_information {
            tasks.push(Task::PerfectInformation(family));
        }
    }

    let run = |task: &Task| -> ReportRow {
        match task {
            Task::Variant(family, policy) => {
                variant_row(inst, cfg, *family, *policy, &opts.build)
            }
            Task::PerfectInformation(family) => pi_row(inst, cfg, *family),
        }
    };

    let rows: Vec<ReportRow> = if opts.jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<ReportRow>>> =
            tasks.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..opts.jobs.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= tasks.len() {
                        break;
                    }
                    let row = run(&tasks[i]);
                    *slots[i].lock().unwrap() = Some(row);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("worker filled the slot"))
            .collect()
    };

    ComparisonReport {
        scenario_count: inst.num_scenarios(),
        rows,
    }
}

fn variant_row(
    inst: &Instance,
    cfg: &SolverConfig,
    family: ModelFamily,
    policy: StagePolicy,
    build: &BuildOptions,
) -> ReportRow {
    let variant = format!("{}/{}", family.name(), policy.name());
    let nq = inst.num_scenarios();
    let started = Instant::now();
    let go = || -> Result<ReportRow> {
        let (model, vm) = build_model(inst, family, policy, build)?;
        let solve = solve_to_optimality(&model, cfg)?;
        let plans = decode_solution(&vm, &solve.result, inst)?;
        let violations = verify_feasibility(&plans, inst);
        if let Some(v) = violations.first() {
            return Err(Error::Decode(format!("decoded plans are infeasible: {v}")));
        }
        let (ok, counterexample) = check_nonanticipativity(&plans, inst);
        if !ok {
            return Err(Error::Decode(format!(
                "nonanticipativity violated: {}",
                counterexample.unwrap_or_default()
            )));
        }
        let recomputed = plans.expected_cost(inst);
        if (recomputed - solve.result.objective).abs() > 1e-6 * (1.0 + recomputed.abs()) {
            return Err(Error::Decode(format!(
                "decoded cost {recomputed} disagrees with the objective {}",
                solve.result.objective
            )));
        }
        // flight-level plans additionally go through the explicit evaluator
        if family == ModelFamily::Lagrangian {
            if let Some(policy_form) = plans.as_policy() {
                let eval = oracle::evaluate_policy(inst, &policy_form)?;
                if !eval.capacity_feasible {
                    return Err(Error::Decode(
                        "evaluator found a capacity overage in the decoded plans".into(),
                    ));
                }
                if (eval.expected - solve.result.objective).abs()
                    > 1e-6 * (1.0 + eval.expected.abs())
                {
                    return Err(Error::Decode(format!(
                        "evaluator cost {} disagrees with the objective {}",
                        eval.expected, solve.result.objective
                    )));
                }
            }
        }
        Ok(ReportRow {
            variant: variant.clone(),
            family: family.name().to_string(),
            policy: policy.name().to_string(),
            expected_cost: solve.result.objective,
            ground: plans.ground_periods.clone(),
            air: plans.air_periods.clone(),
            route_cost: plans.route_costs.clone(),
            lp_integral: solve.lp_integral,
            max_frac: solve.max_frac,
            wall_ms: 0,
            error: None,
        })
    };
    let mut row = go().unwrap_or_else(|e| {
        ReportRow::failed(
            variant.clone(),
            family.name().to_string(),
            policy.name().to_string(),
            nq,
            e.to_string(),
        )
    });
    row.wall_ms = started.elapsed().as_millis();
    row
}

fn pi_row(inst: &Instance, cfg: &SolverConfig, family: ModelFamily) -> ReportRow {
    let variant = format!("{}/perfect-information", family.name());
    let nq = inst.num_scenarios();
    let started = Instant::now();
    let mut row = match perfect_information_bound(inst, cfg, family) {
        Ok((expected, per_scenario)) => ReportRow {
            variant: variant.clone(),
            family: family.name().to_string(),
            policy: "perfect-information".to_string(),
            expected_cost: expected,
            ground: per_scenario.iter().map(|s| s.ground).collect(),
            air: per_scenario.iter().map(|s| s.air).collect(),
            route_cost: per_scenario.iter().map(|s| s.route_cost).collect(),
            lp_integral: per_scenario.iter().all(|s| s.lp_integral),
            max_frac: per_scenario.iter().map(|s| s.max_frac).fold(0.0, f64::max),
            wall_ms: 0,
            error: None,
        },
        Err(e) => ReportRow::failed(
            variant,
            family.name().to_string(),
            "perfect-information".to_string(),
            nq,
            e.to_string(),
        ),
    };
    row.wall_ms = started.elapsed().as_millis();
    row
}

impl ComparisonReport {
    pub fn row(&self, variant: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    /// Machine-readable CSV:
    /// `variant,family,policy,expected_cost,ground_q{k},air_q{k},route_cost_q{k},lp_integral,max_frac,wall_ms`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,family,policy,expected_cost");
        for k in 0..self.scenario_count {
            out.push_str(&format!(",ground_q{k}"));
        }
        for k in 0..self.scenario_count {
            out.push_str(&format!(",air_q{k}"));
        }
        for k in 0..self.scenario_count {
            out.push_str(&format!(",route_cost_q{k}"));
        }
        out.push_str(",lp_integral,max_frac,wall_ms\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}",
                r.variant,
                r.family,
                r.policy,
                fmt_cell(r.expected_cost)
            ));
            for v in &r.ground {
                out.push_str(&format!(",{}", fmt_cell(*v)));
            }
            for v in &r.air {
                out.push_str(&format!(",{}", fmt_cell(*v)));
            }
            for v in &r.route_cost {
                out.push_str(&format!(",{}", fmt_cell(*v)));
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                r.lp_integral,
                fmt_cell(r.max_frac),
                r.wall_ms
            ));
        }
        out
    }

    /// Aligned plain-text rendering, errors included.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<42} {:>14} {:>12} {:>12} {:>12} {:>9} {:>10}\n",
            "variant", "expected_cost", "ground", "air", "route_cost", "lp_int", "wall_ms"
        ));
        for r in &self.rows {
            if let Some(err) = &r.error {
                out.push_str(&format!("{:<42} ERROR: {err}\n", r.variant));
                continue;
            }
            let sum = |v: &[f64]| v.iter().sum::<f64>();
            out.push_str(&format!(
                "{:<42} {:>14.3} {:>12.1} {:>12.1} {:>12.1} {:>9} {:>10}\n",
                r.variant,
                r.expected_cost,
                sum(&r.ground),
                sum(&r.air),
                sum(&r.route_cost),
                r.lp_integral,
                r.wall_ms
            ));
        }
        out
    }
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.6}")
    }
}
