//! Seeded synthetic instances and the bundled case study.
//!
//! Everything here is deterministic in its seed: two calls with the same
//! parameters produce byte-identical instances. Generated instances are
//! always feasible -- after capacities are drawn, a greedy earliest-deadline
//! schedule (original routes, no ground holding) is simulated per scenario
//! and any capacity that would strand a flight past its window is raised.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{
    derive_time_windows, Arc, CostConfig, DelayCaps, Flight, Instance, Network, Period, Resource,
    ResourceKind, Route, DEFAULT_CAPS,
};
use crate::scenario::{Branch, ScenarioTree};

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub airports: usize,
    pub pcas: usize,
    pub flights: usize,
    pub tos_mean: f64,
    /// Number of periods; the horizon index is `periods - 1`.
    pub periods: Period,
    pub scenarios: usize,
    pub branch_points: usize,
    /// 0 = capacities at or above peak demand, 1 = deepest reduction.
    pub tightness: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            airports: 2,
            pcas: 3,
            flights: 50,
            tos_mean: 1.5,
            periods: 30,
            scenarios: 3,
            branch_points: 2,
            tightness: 0.5,
            seed: 0,
        }
    }
}

/// Deterministic synthetic instance. Errors on unsatisfiable parameters.
pub fn synth_instance(params: &SynthParams) -> Result<Instance> {
    if params.flights > 0 && (params.pcas == 0 || params.airports == 0) {
        return Err(Error::validation(
            "unsatisfiable params: flights require at least one airport and one PCA",
        ));
    }
    if params.tos_mean < 1.0 {
        return Err(Error::validation("unsatisfiable params: tos-mean must be >= 1"));
    }
    if params.periods < 4 {
        return Err(Error::validation("unsatisfiable params: need at least 4 periods"));
    }
    if params.scenarios == 0 {
        return Err(Error::validation("unsatisfiable params: need at least one scenario"));
    }
    if !(0.0..=1.0).contains(&params.tightness) {
        return Err(Error::validation("unsatisfiable params: tightness must lie in [0, 1]"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let horizon = params.periods - 1;

    // Layered network: airports feed the first PCA layer, which feeds the
    // second; every PCA can hand traffic to the exit sink.
    let layer1: Vec<usize> = (0..params.pcas.div_ceil(2)).collect();
    let layer2: Vec<usize> = (layer1.len()..params.pcas).collect();
    let mut resources = Vec::new();
    for i in 0..params.airports {
        resources.push(Resource {
            id: format!("A{i}"),
            kind: ResourceKind::Airport,
        });
    }
    for j in 0..params.pcas {
        resources.push(Resource {
            id: format!("P{j}"),
            kind: ResourceKind::Pca,
        });
    }
    resources.push(Resource {
        id: "X".to_string(),
        kind: ResourceKind::ExitSink,
    });

    let mut arcs = Vec::new();
    for i in 0..params.airports {
        for &j in &layer1 {
            arcs.push(Arc {
                from: format!("A{i}"),
                to: format!("P{j}"),
                travel: 1 + ((i + j) % 3) as Period,
            });
        }
    }
    for &a in &layer1 {
        for &b in &layer2 {
            arcs.push(Arc {
                from: format!("P{a}"),
                to: format!("P{b}"),
                travel: 1 + ((a + b) % 2) as Period,
            });
        }
    }
    for j in 0..params.pcas {
        arcs.push(Arc {
            from: format!("P{j}"),
            to: "X".to_string(),
            travel: 1,
        });
    }
    let network = Network { resources, arcs };
    let travel_of = |from: &str, to: &str| -> Period {
        network
            .arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .map(|a| a.travel)
            .expect("arc exists")
    };

    // a ground cap short enough that deep capacity cuts spill into the air
    let caps = DelayCaps {
        ground: (params.periods / 6).clamp(2, 16),
        air: (params.periods / 8).clamp(1, 4),
    };

    let theta = (params.tos_mean - 1.0) / params.tos_mean;
    let mut flights = Vec::with_capacity(params.flights);
    for fi in 0..params.flights {
        let origin = format!("A{}", rng.gen_range(0..params.airports));
        let mut shapes: Vec<Vec<String>> = Vec::new();
        // candidate post-airport sequences in deterministic order
        let two_pca = !layer2.is_empty() && rng.gen::<f64>() < 0.35;
        for &p1 in &layer1 {
            if two_pca {
                for &p2 in &layer2 {
                    shapes.push(vec![format!("P{p1}"), format!("P{p2}"), "X".into()]);
                }
            } else {
                shapes.push(vec![format!("P{p1}"), "X".into()]);
            }
        }
        // rotate so the "original" shape varies by flight
        let start = rng.gen_range(0..shapes.len());
        shapes.rotate_left(start);

        let mut n_options = 1usize;
        while n_options < 3 && rng.gen::<f64>() < theta {
            n_options += 1;
        }

        let route_travel = |seq: &[String]| -> Period {
            let mut total = travel_of(&origin, &seq[0]);
            for pair in seq.windows(2) {
                total += travel_of(&pair[0], &pair[1]);
            }
            total
        };
        let max_travel = shapes
            .iter()
            .take(n_options)
            .map(|s| route_travel(s))
            .max()
            .unwrap();
        if max_travel > horizon {
            return Err(Error::validation(
                "unsatisfiable params: routes cannot fit inside the horizon",
            ));
        }
        let dep_span = (horizon - max_travel).min(params.periods / 2);
        let dep = rng.gen_range(0..=dep_span);

        let mut options = Vec::new();
        for (oi, seq) in shapes.iter().take(n_options).enumerate() {
            let mut omega = vec![origin.clone()];
            omega.extend(seq.iter().cloned());
            let mut crossings = BTreeMap::new();
            let mut t = dep;
            crossings.insert(origin.clone(), t);
            let mut prev = origin.clone();
            for rid in seq {
                t += travel_of(&prev, rid);
                crossings.insert(rid.clone(), t);
                prev = rid.clone();
            }
            let cost = if oi == 0 {
                0.0
            } else {
                rng.gen_range(2..=9) as f64
            };
            options.push(Route {
                id: format!("R{oi}"),
                cost,
                omega,
                crossings,
            });
        }
        flights.push(Flight {
            id: format!("F{fi}"),
            dep,
            options,
        });
    }

    // Peak scheduled demand per PCA when everyone flies option 0 on time.
    let mut peak: BTreeMap<String, u32> = BTreeMap::new();
    {
        let mut counts: BTreeMap<(String, Period), u32> = BTreeMap::new();
        for f in &flights {
            let r = &f.options[0];
            for rid in &r.omega[1..] {
                *counts.entry((rid.clone(), r.crossings[rid])).or_default() += 1;
            }
        }
        for ((rid, _), c) in counts {
            let e = peak.entry(rid).or_default();
            *e = (*e).max(c);
        }
    }

    let splits = split_times(params.periods, params.scenarios, params.branch_points);
    let tree = build_tree(
        params.scenarios,
        horizon,
        &splits,
        &network,
        |pca, _q, reduced| {
            let nominal = peak.get(pca).copied().unwrap_or(0) + 1;
            if reduced {
                (((nominal as f64) * (1.0 - params.tightness)).round() as u32).max(1)
            } else {
                nominal
            }
        },
    );

    let mut inst = Instance {
        network,
        flights,
        costs: CostConfig { cg: 1.0, ca: 2.0 },
        caps,
        scenarios: tree,
        horizon,
    };
    repair_feasibility(&mut inst)?;
    inst.validate()?;
    Ok(inst)
}

/// Branch split times: the period at which scenario `i` becomes
/// distinguishable from the later ones.
fn split_times(periods: Period, scenarios: usize, branch_points: usize) -> Vec<Period> {
    let g = branch_points.min(scenarios.saturating_sub(1));
    if g == 0 {
        return Vec::new();
    }
    let base = (periods / 4).max(1);
    let gap = ((periods / 2) / g as Period).max(1);
    let mut out = Vec::new();
    let mut t = base;
    for _ in 0..g {
        if t >= periods {
            break;
        }
        out.push(t);
        t += gap;
    }
    out
}

/// Assemble a tree in the "staggered recovery" shape: all scenarios start
/// with reduced capacity; scenario i recovers (and splits off) at split i;
/// the final group recovers one gap later, inside its own branch.
fn build_tree(
    scenarios: usize,
    horizon: Period,
    splits: &[Period],
    network: &Network,
    capacity: impl Fn(&str, usize, bool) -> u32,
) -> ScenarioTree {
    let g = splits.len();
    let recovery = |q: usize| -> Period {
        if g == 0 {
            return horizon.div_ceil(2);
        }
        if q < g {
            splits[q]
        } else {
            (splits[g - 1] + (splits.get(1).map_or(2, |t| t - splits[0]))).min(horizon + 1)
        }
    };

    let mut capacities: BTreeMap<String, BTreeMap<String, Vec<u32>>> = BTreeMap::new();
    for r in &network.resources {
        if r.kind != ResourceKind::Pca {
            continue;
        }
        let mut rows = BTreeMap::new();
        for q in 0..scenarios {
            let rec = recovery(q);
            let values: Vec<u32> = (0..=horizon)
                .map(|t| capacity(&r.id, q, t < rec))
                .collect();
            rows.insert(q.to_string(), values);
        }
        capacities.insert(r.id.clone(), rows);
    }

    let all: Vec<usize> = (0..scenarios).collect();
    let mut branches = Vec::new();
    if g == 0 {
        branches.push(Branch {
            start: 0,
            end: horizon,
            scenarios: all,
        });
    } else {
        branches.push(Branch {
            start: 0,
            end: splits[0] - 1,
            scenarios: all,
        });
        for i in 0..g {
            branches.push(Branch {
                start: splits[i],
                end: horizon,
                scenarios: vec![i],
            });
            let rest: Vec<usize> = (i + 1..scenarios).collect();
            let end = if i + 1 < g { splits[i + 1] - 1 } else { horizon };
            branches.push(Branch {
                start: splits[i],
                end,
                scenarios: rest,
            });
        }
    }

    ScenarioTree {
        probabilities: vec![1.0 / scenarios as f64; scenarios],
        capacities,
        branches,
    }
}

/// Greedy earliest-deadline simulation per scenario with original routes and
/// no ground holding; raises any capacity that would strand a flight.
fn repair_feasibility(inst: &mut Instance) -> Result<()> {
    let windows = derive_time_windows(inst)?;
    let travel = inst.arc_travel();
    let ids: BTreeMap<String, usize> = inst
        .network
        .resources
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.clone(), i))
        .collect();
    let kind: Vec<ResourceKind> = inst.network.resources.iter().map(|r| r.kind).collect();
    let mut tree = inst.scenarios.clone();

    loop {
        let mut bumped = false;
        for q in 0..inst.num_scenarios() {
            // per resource: waiting (deadline, flight, position-on-route)
            let mut queue: BTreeMap<usize, Vec<(Period, usize, usize)>> = BTreeMap::new();
            let mut arrivals: BTreeMap<(usize, Period), Vec<(usize, usize)>> = BTreeMap::new();
            for (fi, f) in inst.flights.iter().enumerate() {
                let r = &f.options[0];
                let first = ids[r.omega[1].as_str()];
                let t = f.dep + travel[&(ids[r.omega[0].as_str()], first)];
                arrivals.entry((first, t)).or_default().push((fi, 1));
            }
            for t in 0..=inst.horizon {
                #[allow(clippy::needless_range_loop)] // ri doubles as the map key
                for ri in 0..kind.len() {
                    if let Some(list) = arrivals.remove(&(ri, t)) {
                        for (fi, pos) in list {
                            let deadline = windows.get(fi, 0, pos).hi;
                            queue.entry(ri).or_default().push((deadline, fi, pos));
                        }
                    }
                    let Some(waiting) = queue.get_mut(&ri) else {
                        continue;
                    };
                    if waiting.is_empty() {
                        continue;
                    }
                    waiting.sort_unstable();
                    let cap = if kind[ri] == ResourceKind::Pca {
                        tree.capacity(&inst.network.resources[ri].id, t, q)
                    } else {
                        u32::MAX // sinks admit everyone
                    };
                    let mut admit = waiting.len().min(cap as usize);
                    // anyone at deadline must go now
                    let due = waiting.iter().filter(|(d, _, _)| *d <= t).count();
                    if due > admit {
                        let deficit = (due - admit) as u32;
                        let rid = inst.network.resources[ri].id.clone();
                        if let Some(rows) = tree.capacities.get_mut(&rid) {
                            for vals in rows.values_mut() {
                                vals[t as usize] += deficit;
                            }
                        }
                        bumped = true;
                        admit = due;
                    }
                    let admitted: Vec<(Period, usize, usize)> =
                        waiting.drain(..admit).collect();
                    for (_, fi, pos) in admitted {
                        let route = &inst.flights[fi].options[0];
                        if pos + 1 < route.omega.len() {
                            let here = ids[route.omega[pos].as_str()];
                            let next = ids[route.omega[pos + 1].as_str()];
                            let at = t + travel[&(here, next)];
                            arrivals.entry((next, at)).or_default().push((fi, pos + 1));
                        }
                    }
                }
            }
        }
        if !bumped {
            inst.scenarios = tree;
            return Ok(());
        }
    }
}

/// Drop every option except the original (cost-zero) route. The result is
/// the "no reroute" twin of an instance whose option sets all contain the
/// original route.
pub fn strip_tos(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    for f in &mut out.flights {
        f.options.truncate(1);
    }
    out
}

/// Capacity table of the bundled case study, one row per (scenario,
/// resource): 16 program periods from 20:00Z plus 8 appended periods at
/// nominal values, 24 in total.
pub fn case_study_capacities() -> Vec<(usize, &'static str, Vec<u32>)> {
    fn profile(reduced: u32, nominal: u32, recovery: usize) -> Vec<u32> {
        (0..24)
            .map(|t| if t < recovery { reduced } else { nominal })
            .collect()
    }
    // recovery periods: scenario 0 at 21:00Z (4), scenario 1 at 22:30Z (10),
    // scenario 2 at 00:00Z (16)
    let mut rows = Vec::new();
    for (q, rec) in [(0usize, 4usize), (1, 10), (2, 16)] {
        rows.push((q, "PCA0", profile(13, 25, rec)));
        rows.push((q, "PCA1", profile(44, 50, rec)));
        rows.push((q, "PCA2", profile(5, 5, rec)));
        rows.push((q, "EWR", profile(8, 10, rec)));
    }
    rows
}

const CASE_ORIGINS: usize = 6;
const CASE_FLIGHTS: usize = 890;
const CASE_TOS_TARGET: usize = 1368;

/// The bundled study: the four capacitated resources with their published
/// profiles and branch points, an exit sink, synthetic origin airports, and
/// seeded demand calibrated to 890 flights with about 1.54 options each.
pub fn build_case_study(demand_seed: u64) -> Instance {
    let mut resources = Vec::new();
    for i in 0..CASE_ORIGINS {
        resources.push(Resource {
            id: format!("A{i}"),
            kind: ResourceKind::Airport,
        });
    }
    for pca in ["PCA0", "PCA1", "PCA2", "EWR"] {
        resources.push(Resource {
            id: pca.to_string(),
            kind: ResourceKind::Pca,
        });
    }
    resources.push(Resource {
        id: "EXIT".to_string(),
        kind: ResourceKind::ExitSink,
    });

    let mut arcs = Vec::new();
    for i in 0..CASE_ORIGINS {
        for (j, pca) in ["PCA0", "PCA1", "PCA2"].iter().enumerate() {
            arcs.push(Arc {
                from: format!("A{i}"),
                to: pca.to_string(),
                travel: 1 + ((i + j) % 4) as Period,
            });
        }
    }
    // longest en-route PCA to EWR travel: 8 periods (~2 hours)
    for (pca, travel) in [("PCA0", 4), ("PCA1", 6), ("PCA2", 8)] {
        arcs.push(Arc {
            from: pca.to_string(),
            to: "EWR".to_string(),
            travel,
        });
    }
    for pca in ["PCA0", "PCA1", "PCA2"] {
        arcs.push(Arc {
            from: pca.to_string(),
            to: "EXIT".to_string(),
            travel: 1,
        });
    }
    let network = Network { resources, arcs };
    let travel_of = |from: &str, to: &str| -> Period {
        network
            .arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .map(|a| a.travel)
            .expect("arc exists")
    };

    let horizon: Period = 23;
    let mut capacities: BTreeMap<String, BTreeMap<String, Vec<u32>>> = BTreeMap::new();
    for (q, pca, values) in case_study_capacities() {
        capacities
            .entry(pca.to_string())
            .or_default()
            .insert(q.to_string(), values);
    }
    let tree = ScenarioTree {
        probabilities: vec![1.0 / 3.0; 3],
        capacities,
        branches: vec![
            Branch {
                start: 0,
                end: 3,
                scenarios: vec![0, 1, 2],
            },
            Branch {
                start: 4,
                end: horizon,
                scenarios: vec![0],
            },
            Branch {
                start: 4,
                end: 9,
                scenarios: vec![1, 2],
            },
            Branch {
                start: 10,
                end: horizon,
                scenarios: vec![1],
            },
            Branch {
                start: 10,
                end: horizon,
                scenarios: vec![2],
            },
        ],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(demand_seed);
    let pca_of = |x: f64| {
        if x < 0.30 {
            "PCA0"
        } else if x < 0.92 {
            "PCA1"
        } else {
            "PCA2"
        }
    };
    // EWR share sized so the pessimistic scenario can still absorb the
    // arrivals inside the horizon; everything else exits the system
    let ewr_share = 0.12;
    let theta = (1.54f64 - 1.0) / 1.54;

    struct Draft {
        origin: String,
        dep: Period,
        dest: &'static str,
        pcas: Vec<&'static str>, // option k routes via pcas[k]
        want: usize,
    }
    let mut drafts = Vec::with_capacity(CASE_FLIGHTS);
    for _ in 0..CASE_FLIGHTS {
        let origin = format!("A{}", rng.gen_range(0..CASE_ORIGINS));
        let primary = pca_of(rng.gen::<f64>());
        let dest: &'static str = if rng.gen::<f64>() < ewr_share { "EWR" } else { "EXIT" };
        // schedule the PCA crossing inside the active window 20:00Z-23:59Z
        let crossing = rng.gen_range(1..=15u32);
        let dep = crossing.saturating_sub(travel_of(&origin, primary));
        let mut want = 1usize;
        while want < 3 && rng.gen::<f64>() < theta {
            want += 1;
        }
        drafts.push(Draft {
            origin,
            dep,
            dest,
            pcas: vec![primary],
            want,
        });
    }

    let fits = |d: &Draft, pca: &str| -> bool {
        let mut t = d.dep + travel_of(&d.origin, pca);
        if d.dest == "EWR" {
            t += travel_of(pca, "EWR");
        } else {
            t += travel_of(pca, "EXIT");
        }
        t <= horizon
    };
    let add_alternate = |d: &mut Draft, rng: &mut ChaCha8Rng| -> bool {
        let candidates: Vec<&'static str> = ["PCA0", "PCA1", "PCA2"]
            .into_iter()
            .filter(|p| !d.pcas.contains(p) && fits(d, p))
            .collect();
        if candidates.is_empty() {
            return false;
        }
        let pick = candidates[rng.gen_range(0..candidates.len())];
        d.pcas.push(pick);
        true
    };
    for d in drafts.iter_mut() {
        while d.pcas.len() < d.want {
            if !add_alternate(d, &mut rng) {
                break;
            }
        }
    }
    // calibrate the total option count to the published 1368 (+/- 1%)
    let total = |ds: &[Draft]| ds.iter().map(|d| d.pcas.len()).sum::<usize>();
    let mut guard = 0;
    while total(&drafts) > CASE_TOS_TARGET + 13 && guard < 20_000 {
        let i = rng.gen_range(0..drafts.len());
        if drafts[i].pcas.len() > 1 {
            drafts[i].pcas.pop();
        }
        guard += 1;
    }
    while total(&drafts) < CASE_TOS_TARGET - 13 && guard < 40_000 {
        let i = rng.gen_range(0..drafts.len());
        if drafts[i].pcas.len() < 3 {
            let mut d = std::mem::replace(
                &mut drafts[i],
                Draft {
                    origin: String::new(),
                    dep: 0,
                    dest: "EXIT",
                    pcas: Vec::new(),
                    want: 0,
                },
            );
            add_alternate(&mut d, &mut rng);
            drafts[i] = d;
        }
        guard += 1;
    }

    let mut flights = Vec::with_capacity(CASE_FLIGHTS);
    for (fi, d) in drafts.iter().enumerate() {
        let mut options = Vec::new();
        for (oi, pca) in d.pcas.iter().enumerate() {
            let mut omega = vec![d.origin.clone(), pca.to_string()];
            omega.push(d.dest.to_string());
            let mut crossings = BTreeMap::new();
            crossings.insert(d.origin.clone(), d.dep);
            let at_pca = d.dep + travel_of(&d.origin, pca);
            crossings.insert(pca.to_string(), at_pca);
            crossings.insert(d.dest.to_string(), at_pca + travel_of(pca, d.dest));
            let cost = if oi == 0 {
                0.0
            } else {
                rng.gen_range(10..=60) as f64
            };
            options.push(Route {
                id: format!("R{oi}"),
                cost,
                omega,
                crossings,
            });
        }
        flights.push(Flight {
            id: format!("F{fi:03}"),
            dep: d.dep,
            options,
        });
    }

    let inst = Instance {
        network,
        flights,
        costs: CostConfig { cg: 1.0, ca: 2.0 },
        caps: DEFAULT_CAPS,
        scenarios: tree,
        horizon,
    };
    // The published capacities are fixed; the drawn demand must fit them.
    let mut probe = inst.clone();
    repair_feasibility(&mut probe).expect("case study windows fit the horizon");
    assert_eq!(
        probe.scenarios, inst.scenarios,
        "case-study demand (seed {demand_seed}) does not fit the published capacities"
    );
    inst.validate().expect("case study validates");
    inst
}

/// Hand-sized instances used as fixtures and oracle ground truth.
pub mod tiny {
    use super::*;

    fn tree_one_pca(
        pca: &str,
        horizon: Period,
        per_scenario: Vec<Vec<u32>>,
        branches: Vec<Branch>,
    ) -> ScenarioTree {
        let nq = per_scenario.len();
        let mut rows = BTreeMap::new();
        for (q, values) in per_scenario.into_iter().enumerate() {
            assert_eq!(values.len(), (horizon + 1) as usize);
            rows.insert(q.to_string(), values);
        }
        let mut capacities = BTreeMap::new();
        capacities.insert(pca.to_string(), rows);
        ScenarioTree {
            probabilities: vec![1.0 / nq as f64; nq],
            capacities,
            branches,
        }
    }

    fn route(id: &str, cost: f64, legs: &[(&str, Period)]) -> Route {
        Route {
            id: id.to_string(),
            cost,
            omega: legs.iter().map(|(r, _)| r.to_string()).collect(),
            crossings: legs.iter().map(|(r, t)| (r.to_string(), *t)).collect(),
        }
    }

    /// One flight, one route, one scenario, ample capacity.
    pub fn single_flight() -> Instance {
        let inst = Instance {
            network: Network {
                resources: vec![
                    Resource {
                        id: "A".into(),
                        kind: ResourceKind::Airport,
                    },
                    Resource {
                        id: "P".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "X".into(),
                        kind: ResourceKind::ExitSink,
                    },
                ],
                arcs: vec![
                    Arc {
                        from: "A".into(),
                        to: "P".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "P".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                ],
            },
            flights: vec![Flight {
                id: "F0".into(),
                dep: 0,
                options: vec![route("R0", 3.5, &[("A", 0), ("P", 1), ("X", 2)])],
            }],
            costs: CostConfig { cg: 1.0, ca: 2.0 },
            caps: DelayCaps { ground: 2, air: 1 },
            scenarios: tree_one_pca(
                "P",
                7,
                vec![vec![5; 8]],
                vec![Branch {
                    start: 0,
                    end: 7,
                    scenarios: vec![0],
                }],
            ),
            horizon: 7,
        };
        inst.validate().expect("fixture validates");
        inst
    }

    /// Two flights contending for one PCA slot per period; the second
    /// scenario closes the PCA for two periods after the branch point.
    pub fn t1() -> Instance {
        let inst = Instance {
            network: Network {
                resources: vec![
                    Resource {
                        id: "A".into(),
                        kind: ResourceKind::Airport,
                    },
                    Resource {
                        id: "P".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "X".into(),
                        kind: ResourceKind::ExitSink,
                    },
                ],
                arcs: vec![
                    Arc {
                        from: "A".into(),
                        to: "P".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "P".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                ],
            },
            flights: vec![
                Flight {
                    id: "F0".into(),
                    dep: 0,
                    options: vec![route("R0", 0.0, &[("A", 0), ("P", 1), ("X", 2)])],
                },
                Flight {
                    id: "F1".into(),
                    dep: 0,
                    options: vec![route("R0", 0.0, &[("A", 0), ("P", 1), ("X", 2)])],
                },
            ],
            costs: CostConfig { cg: 1.0, ca: 2.0 },
            caps: DelayCaps { ground: 2, air: 1 },
            scenarios: tree_one_pca(
                "P",
                7,
                vec![
                    vec![1, 1, 1, 1, 1, 1, 1, 1],
                    vec![1, 1, 0, 0, 1, 1, 1, 1],
                ],
                vec![
                    Branch {
                        start: 0,
                        end: 1,
                        scenarios: vec![0, 1],
                    },
                    Branch {
                        start: 2,
                        end: 7,
                        scenarios: vec![0],
                    },
                    Branch {
                        start: 2,
                        end: 7,
                        scenarios: vec![1],
                    },
                ],
            ),
            horizon: 7,
        };
        inst.validate().expect("fixture validates");
        inst
    }

    /// One congested cheap route vs a free expensive reroute, under two
    /// scenarios: reroute pays off only in the bad one.
    pub fn t2_reroute() -> Instance {
        let inst = Instance {
            network: Network {
                resources: vec![
                    Resource {
                        id: "A".into(),
                        kind: ResourceKind::Airport,
                    },
                    Resource {
                        id: "P".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "Q".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "X".into(),
                        kind: ResourceKind::ExitSink,
                    },
                ],
                arcs: vec![
                    Arc {
                        from: "A".into(),
                        to: "P".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "A".into(),
                        to: "Q".into(),
                        travel: 2,
                    },
                    Arc {
                        from: "P".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "Q".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                ],
            },
            flights: vec![
                Flight {
                    id: "F0".into(),
                    dep: 1,
                    options: vec![
                        route("R0", 0.0, &[("A", 1), ("P", 2), ("X", 3)]),
                        route("R1", 4.0, &[("A", 1), ("Q", 3), ("X", 4)]),
                    ],
                },
                Flight {
                    id: "F1".into(),
                    dep: 1,
                    options: vec![route("R0", 0.0, &[("A", 1), ("P", 2), ("X", 3)])],
                },
            ],
            costs: CostConfig { cg: 1.0, ca: 2.0 },
            caps: DelayCaps { ground: 2, air: 1 },
            scenarios: {
                let mut capacities = BTreeMap::new();
                let mut p_rows = BTreeMap::new();
                p_rows.insert("0".to_string(), vec![2, 2, 2, 2, 2, 2, 2, 2, 2]);
                p_rows.insert("1".to_string(), vec![2, 2, 2, 0, 0, 1, 1, 1, 1]);
                capacities.insert("P".to_string(), p_rows);
                let mut q_rows = BTreeMap::new();
                q_rows.insert("0".to_string(), vec![2; 9]);
                q_rows.insert("1".to_string(), vec![2; 9]);
                capacities.insert("Q".to_string(), q_rows);
                ScenarioTree {
                    probabilities: vec![0.5, 0.5],
                    capacities,
                    branches: vec![
                        Branch {
                            start: 0,
                            end: 2,
                            scenarios: vec![0, 1],
                        },
                        Branch {
                            start: 3,
                            end: 8,
                            scenarios: vec![0],
                        },
                        Branch {
                            start: 3,
                            end: 8,
                            scenarios: vec![1],
                        },
                    ],
                }
            },
            horizon: 8,
        };
        inst.validate().expect("fixture validates");
        inst
    }

    /// Three flights, three scenarios, two branch points, one option each;
    /// windows are kept narrow so exhaustive enumeration stays cheap.
    pub fn t3_three_flights() -> Instance {
        let caps = DelayCaps { ground: 1, air: 1 };
        let inst = Instance {
            network: Network {
                resources: vec![
                    Resource {
                        id: "A".into(),
                        kind: ResourceKind::Airport,
                    },
                    Resource {
                        id: "P".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "X".into(),
                        kind: ResourceKind::ExitSink,
                    },
                ],
                arcs: vec![
                    Arc {
                        from: "A".into(),
                        to: "P".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "P".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                ],
            },
            flights: vec![
                Flight {
                    id: "F0".into(),
                    dep: 0,
                    options: vec![route("R0", 0.0, &[("A", 0), ("P", 1), ("X", 2)])],
                },
                Flight {
                    id: "F1".into(),
                    dep: 1,
                    options: vec![route("R0", 0.0, &[("A", 1), ("P", 2), ("X", 3)])],
                },
                Flight {
                    id: "F2".into(),
                    dep: 1,
                    options: vec![route("R0", 0.0, &[("A", 1), ("P", 2), ("X", 3)])],
                },
            ],
            costs: CostConfig { cg: 1.0, ca: 2.0 },
            caps,
            scenarios: tree_one_pca(
                "P",
                8,
                vec![
                    vec![2, 2, 2, 2, 2, 2, 2, 2, 2],
                    vec![2, 2, 1, 1, 2, 2, 2, 2, 2],
                    vec![2, 2, 1, 1, 1, 2, 2, 2, 2],
                ],
                vec![
                    Branch {
                        start: 0,
                        end: 1,
                        scenarios: vec![0, 1, 2],
                    },
                    Branch {
                        start: 2,
                        end: 8,
                        scenarios: vec![0],
                    },
                    Branch {
                        start: 2,
                        end: 3,
                        scenarios: vec![1, 2],
                    },
                    Branch {
                        start: 4,
                        end: 8,
                        scenarios: vec![1],
                    },
                    Branch {
                        start: 4,
                        end: 8,
                        scenarios: vec![2],
                    },
                ],
            ),
            horizon: 8,
        };
        inst.validate().expect("fixture validates");
        inst
    }

    /// Reroute-or-wait fixture with strictly separated policy classes: the
    /// bad scenario closes the cheap PCA entirely, the split happens at
    /// period 1, and one flight can profitably wait for it.
    pub fn t5_adaptive() -> Instance {
        let mut p_rows = BTreeMap::new();
        p_rows.insert("0".to_string(), vec![1; 9]);
        p_rows.insert("1".to_string(), vec![1, 0, 0, 0, 0, 0, 0, 0, 1]);
        let mut q_rows = BTreeMap::new();
        q_rows.insert("0".to_string(), vec![5; 9]);
        q_rows.insert("1".to_string(), vec![5; 9]);
        let mut capacities = BTreeMap::new();
        capacities.insert("P".to_string(), p_rows);
        capacities.insert("Q".to_string(), q_rows);
        let inst = Instance {
            network: Network {
                resources: vec![
                    Resource {
                        id: "A".into(),
                        kind: ResourceKind::Airport,
                    },
                    Resource {
                        id: "P".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "Q".into(),
                        kind: ResourceKind::Pca,
                    },
                    Resource {
                        id: "X".into(),
                        kind: ResourceKind::ExitSink,
                    },
                ],
                arcs: vec![
                    Arc {
                        from: "A".into(),
                        to: "P".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "A".into(),
                        to: "Q".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "P".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                    Arc {
                        from: "Q".into(),
                        to: "X".into(),
                        travel: 1,
                    },
                ],
            },
            flights: vec![
                Flight {
                    id: "F1".into(),
                    dep: 0,
                    options: vec![
                        route("R0", 0.0, &[("A", 0), ("P", 1), ("X", 2)]),
                        route("R1", 4.0, &[("A", 0), ("Q", 1), ("X", 2)]),
                    ],
                },
                Flight {
                    id: "F2".into(),
                    dep: 1,
                    options: vec![
                        route("R0", 0.0, &[("A", 1), ("P", 2), ("X", 3)]),
                        route("R1", 4.0, &[("A", 1), ("Q", 2), ("X", 3)]),
                    ],
                },
            ],
            costs: CostConfig { cg: 1.0, ca: 2.0 },
            caps: DelayCaps { ground: 2, air: 1 },
            scenarios: ScenarioTree {
                probabilities: vec![0.5, 0.5],
                capacities,
                branches: vec![
                    Branch {
                        start: 0,
                        end: 0,
                        scenarios: vec![0, 1],
                    },
                    Branch {
                        start: 1,
                        end: 8,
                        scenarios: vec![0],
                    },
                    Branch {
                        start: 1,
                        end: 8,
                        scenarios: vec![1],
                    },
                ],
            },
            horizon: 8,
        };
        inst.validate().expect("fixture validates");
        inst
    }

    /// The oracle-checkable corpus: hand-built fixtures plus seeded tiny
    /// synthetics, all inside the enumeration budget.
    pub fn corpus() -> Vec<(String, Instance)> {
        let mut out = vec![
            ("t1".to_string(), t1()),
            ("t2-reroute".to_string(), t2_reroute()),
            ("t3-three-flights".to_string(), t3_three_flights()),
            ("single-flight".to_string(), single_flight()),
            ("t5-adaptive".to_string(), t5_adaptive()),
        ];
        for seed in [3u64, 5, 8, 11, 17, 21, 29, 34] {
            let params = SynthParams {
                airports: 1,
                pcas: 2,
                flights: 2,
                tos_mean: 1.4,
                periods: 9,
                scenarios: if seed % 2 == 0 { 2 } else { 3 },
                branch_points: if seed % 3 == 0 { 2 } else { 1 },
                tightness: 0.5 + 0.1 * ((seed % 3) as f64),
                seed,
            };
            let inst = synth_instance(&params).expect("tiny synth generates");
            out.push((format!("tiny-seed{seed}"), inst));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_is_deterministic() {
        let params = SynthParams::default();
        let a = synth_instance(&params).unwrap();
        let b = synth_instance(&params).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn synth_rejects_flights_without_pcas() {
        let params = SynthParams {
            pcas: 0,
            ..SynthParams::default()
        };
        assert!(synth_instance(&params).is_err());
    }

    #[test]
    fn tiny_corpus_validates() {
        for (name, inst) in tiny::corpus() {
            inst.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(inst.horizon < 10, "{name} stays within the oracle budget");
        }
    }

    #[test]
    fn case_study_capacity_lookups() {
        let inst = build_case_study(1);
        // Scen2 (index 1), PCA0, 22:30Z = period 10: recovered to 25
        assert_eq!(inst.scenarios.capacity("PCA0", 10, 1), 25);
        assert_eq!(inst.num_scenarios(), 3);
        let pcas = inst
            .network
            .resources
            .iter()
            .filter(|r| r.kind == ResourceKind::Pca)
            .count();
        assert_eq!(pcas, 4);
    }

    #[test]
    fn case_study_tos_count_near_published_total() {
        for seed in [1u64, 7, 42] {
            let inst = build_case_study(seed);
            assert_eq!(inst.flights.len(), 890);
            let total: usize = inst.flights.iter().map(|f| f.options.len()).sum();
            let diff = (total as f64 - 1368.0).abs() / 1368.0;
            assert!(diff <= 0.05, "seed {seed}: {total} options");
        }
    }

    #[test]
    fn strip_tos_keeps_original_route() {
        let inst = build_case_study(2);
        let stripped = strip_tos(&inst);
        for (a, b) in inst.flights.iter().zip(&stripped.flights) {
            assert_eq!(b.options.len(), 1);
            assert_eq!(a.options[0], b.options[0]);
            assert_eq!(b.options[0].cost, 0.0);
        }
    }
}
