//! Flow-aggregated ("Lagrangian-Eulerian") formulations.
//!
//! The flight level keeps only the departure stage: the airport trajectory,
//! the route indicators, and an arrival indicator at the route's first
//! post-airport resource (arrival, not passage -- the flight may then queue).
//! Arrivals feed per-path flow variables: planned direct demand P at the
//! path's first resource, crossings L, and air-holding counts A at each
//! resource along the path. Capacity binds the crossings; a conservation row
//! per path and scenario forces every queue to drain by the horizon.

use crate::error::Result;
use crate::instance::{Instance, Period, ResourceKind};
use crate::mip::{MipModel, Sense};

use super::lagrangian::{emit_nonanticipativity, emit_route_selection};
use super::{
    add_time_weighted_jumps, add_var, BuildOptions, Ctx, ModelFamily, NamePool, StagePolicy,
    VarKey, VarMap,
};

pub fn build_lagrangian_eulerian(
    inst: &Instance,
    policy: StagePolicy,
    opts: &BuildOptions,
) -> Result<(MipModel, VarMap)> {
    let ctx = Ctx::prepare(inst)?;
    let mut model = MipModel::new(format!("lagrangian-eulerian-{}", policy.name()));
    let mut vm = VarMap::new(ModelFamily::LagrangianEulerian, policy);
    let mut pool = NamePool::new();
    let multi = policy.is_multistage();
    let nq = ctx.nq;
    let probs = &inst.scenarios.probabilities;
    let horizon = inst.horizon;

    let scen_copies: Vec<Option<u32>> = if multi {
        (0..nq as u32).map(Some).collect()
    } else {
        vec![None]
    };

    // --- flight-level variables -------------------------------------------
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let (fid, rid) = (&f.id, &route.id);
            let awin = ctx.windows.get(fi, oi, 0);
            let delta0 = ctx.travel_between(&route.omega[0], &route.omega[1]);
            if multi {
                for q in 0..nq as u32 {
                    add_var(
                        &mut model,
                        &mut vm,
                        &mut pool,
                        VarKey::ScenarioRoute {
                            flight: fi as u32,
                            option: oi as u32,
                            scenario: q,
                        },
                        format!("ds[{fid},{rid},{q}]"),
                        0.0,
                        1.0,
                        true,
                    );
                }
                for q in 0..nq as u32 {
                    for t in awin.iter() {
                        add_var(
                            &mut model,
                            &mut vm,
                            &mut pool,
                            VarKey::Depart {
                                flight: fi as u32,
                                option: oi as u32,
                                period: t,
                                scenario: q,
                            },
                            format!("dq[{fid},{rid},{t},{q}]"),
                            0.0,
                            1.0,
                            true,
                        );
                    }
                }
            } else {
                add_var(
                    &mut model,
                    &mut vm,
                    &mut pool,
                    VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    },
                    format!("d[{fid},{rid}]"),
                    0.0,
                    1.0,
                    true,
                );
            }
            for &scen in &scen_copies {
                for t in awin.iter() {
                    let name = match scen {
                        Some(q) => format!("w[{fid},{rid},{},{t},{q}]", route.omega[0]),
                        None => format!("w[{fid},{rid},{},{t}]", route.omega[0]),
                    };
                    add_var(
                        &mut model,
                        &mut vm,
                        &mut pool,
                        VarKey::W {
                            flight: fi as u32,
                            option: oi as u32,
                            pos: 0,
                            period: t,
                            scenario: scen,
                        },
                        name,
                        0.0,
                        1.0,
                        true,
                    );
                }
                // arrival indicator at the first post-airport resource:
                // the departure window shifted by the first travel time
                for t in awin.lo + delta0..=awin.hi + delta0 {
                    let name = match scen {
                        Some(q) => format!("wt[{fid},{rid},{t},{q}]"),
                        None => format!("wt[{fid},{rid},{t}]"),
                    };
                    add_var(
                        &mut model,
                        &mut vm,
                        &mut pool,
                        VarKey::WTilde {
                            flight: fi as u32,
                            option: oi as u32,
                            period: t,
                            scenario: scen,
                        },
                        name,
                        0.0,
                        1.0,
                        true,
                    );
                }
            }
        }
    }

    // --- flow variables ------------------------------------------------------
    for (pi, path) in ctx.paths.paths.iter().enumerate() {
        for &scen in &scen_copies {
            for t in 0..=horizon {
                let name = match scen {
                    Some(q) => format!("P[p{pi},{t},{q}]"),
                    None => format!("P[p{pi},{t}]"),
                };
                add_var(
                    &mut model,
                    &mut vm,
                    &mut pool,
                    VarKey::DirectDemand {
                        path: pi as u32,
                        period: t,
                        scenario: scen,
                    },
                    name,
                    0.0,
                    f64::INFINITY,
                    false,
                );
            }
        }
        for (pos, rid) in path.iter().enumerate() {
            for q in 0..nq as u32 {
                for t in 0..=horizon {
                    add_var(
                        &mut model,
                        &mut vm,
                        &mut pool,
                        VarKey::Crossing {
                            path: pi as u32,
                            pos: pos as u32,
                            period: t,
                            scenario: q,
                        },
                        format!("L[{rid},p{pi},{t},{q}]"),
                        0.0,
                        f64::INFINITY,
                        false,
                    );
                }
                for t in 0..=horizon {
                    add_var(
                        &mut model,
                        &mut vm,
                        &mut pool,
                        VarKey::AirHold {
                            path: pi as u32,
                            pos: pos as u32,
                            period: t,
                            scenario: q,
                        },
                        format!("A[{rid},p{pi},{t},{q}]"),
                        0.0,
                        f64::INFINITY,
                        false,
                    );
                }
            }
        }
    }

    let w_air = |fi: usize, oi: usize, t: Period, scen: Option<u32>| -> usize {
        vm.col(&VarKey::W {
            flight: fi as u32,
            option: oi as u32,
            pos: 0,
            period: t,
            scenario: scen,
        })
        .unwrap()
    };
    let wt = |fi: usize, oi: usize, t: Period, scen: Option<u32>| -> Option<usize> {
        vm.col(&VarKey::WTilde {
            flight: fi as u32,
            option: oi as u32,
            period: t,
            scenario: scen,
        })
    };
    let p_col = |pi: usize, t: Period, scen: Option<u32>| -> usize {
        vm.col(&VarKey::DirectDemand {
            path: pi as u32,
            period: t,
            scenario: scen,
        })
        .unwrap()
    };
    let l_col = |pi: usize, pos: usize, t: Period, q: u32| -> usize {
        vm.col(&VarKey::Crossing {
            path: pi as u32,
            pos: pos as u32,
            period: t,
            scenario: q,
        })
        .unwrap()
    };
    let a_col = |pi: usize, pos: usize, t: Period, q: u32| -> usize {
        vm.col(&VarKey::AirHold {
            path: pi as u32,
            pos: pos as u32,
            period: t,
            scenario: q,
        })
        .unwrap()
    };

    // --- route selection ----------------------------------------------------
    emit_route_selection(&ctx, multi, &mut model, &vm, &mut pool);

    // --- monotone trajectories ----------------------------------------------
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let (fid, rid) = (&f.id, &route.id);
            let awin = ctx.windows.get(fi, oi, 0);
            let delta0 = ctx.travel_between(&route.omega[0], &route.omega[1]);
            for &scen in &scen_copies {
                for t in awin.lo + 1..=awin.hi {
                    let name = match scen {
                        Some(q) => format!("mono[{fid},{rid},{},{t},{q}]", route.omega[0]),
                        None => format!("mono[{fid},{rid},{},{t}]", route.omega[0]),
                    };
                    model.add_constraint(
                        pool.unique(name),
                        vec![
                            (w_air(fi, oi, t, scen), 1.0),
                            (w_air(fi, oi, t - 1, scen), -1.0),
                        ],
                        Sense::Ge,
                        0.0,
                    );
                }
                for t in awin.lo + delta0 + 1..=awin.hi + delta0 {
                    let name = match scen {
                        Some(q) => format!("monot[{fid},{rid},{t},{q}]"),
                        None => format!("monot[{fid},{rid},{t}]"),
                    };
                    model.add_constraint(
                        pool.unique(name),
                        vec![
                            (wt(fi, oi, t, scen).unwrap(), 1.0),
                            (wt(fi, oi, t - 1, scen).unwrap(), -1.0),
                        ],
                        Sense::Ge,
                        0.0,
                    );
                }
                // arrival = departure shifted by the first travel time
                for t in awin.iter() {
                    let name = match scen {
                        Some(q) => format!("arr[{fid},{rid},{t},{q}]"),
                        None => format!("arr[{fid},{rid},{t}]"),
                    };
                    model.add_constraint(
                        pool.unique(name),
                        vec![
                            (wt(fi, oi, t + delta0, scen).unwrap(), 1.0),
                            (w_air(fi, oi, t, scen), -1.0),
                        ],
                        Sense::Eq,
                        0.0,
                    );
                }
                // multistage boundary: arrived by the window's end iff flown
                if let Some(q) = scen {
                    let ds = vm
                        .col(&VarKey::ScenarioRoute {
                            flight: fi as u32,
                            option: oi as u32,
                            scenario: q,
                        })
                        .unwrap();
                    model.add_constraint(
                        pool.unique(format!("bndt[{fid},{rid},{q}]")),
                        vec![(wt(fi, oi, awin.hi + delta0, scen).unwrap(), 1.0), (ds, -1.0)],
                        Sense::Eq,
                        0.0,
                    );
                }
            }
        }
    }

    // --- direct demand accounting --------------------------------------------
    // P[path, t] counts arrivals (wt jumps) of every route grouped on the path.
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ctx.paths.paths.len()];
    for (fi, f) in inst.flights.iter().enumerate() {
        for oi in 0..f.options.len() {
            members[ctx.paths.path_of(fi, oi)].push((fi, oi));
        }
    }
    for (pi, _path) in ctx.paths.paths.iter().enumerate() {
        for &scen in &scen_copies {
            for t in 0..=horizon {
                let mut coeffs = vec![(p_col(pi, t, scen), 1.0)];
                for &(fi, oi) in &members[pi] {
                    // arrival jump at t: both terms live inside the window
                    // (the trajectory is constant beyond it)
                    if let Some(c) = wt(fi, oi, t, scen) {
                        coeffs.push((c, -1.0));
                        if t > 0 {
                            if let Some(c) = wt(fi, oi, t - 1, scen) {
                                coeffs.push((c, 1.0));
                            }
                        }
                    }
                }
                let name = match scen {
                    Some(q) => format!("pdef[p{pi},{t},{q}]"),
                    None => format!("pdef[p{pi},{t}]"),
                };
                model.add_constraint(pool.unique(name), coeffs, Sense::Eq, 0.0);
            }
        }
    }

    // --- flow dynamics ---------------------------------------------------------
    // L = inflow - (A_t - A_{t-1}); inflow is P at the path head, otherwise
    // the upstream crossings shifted by the travel time.
    for (pi, path) in ctx.paths.paths.iter().enumerate() {
        for pos in 0..path.len() {
            for q in 0..nq as u32 {
                for t in 0..=horizon {
                    let mut coeffs = vec![(l_col(pi, pos, t, q), 1.0), (a_col(pi, pos, t, q), 1.0)];
                    if t > 0 {
                        coeffs.push((a_col(pi, pos, t - 1, q), -1.0));
                    }
                    if pos == 0 {
                        let scen = if multi { Some(q) } else { None };
                        coeffs.push((p_col(pi, t, scen), -1.0));
                    } else {
                        let delta = ctx.travel_between(&path[pos - 1], &path[pos]);
                        if t >= delta {
                            coeffs.push((l_col(pi, pos - 1, t - delta, q), -1.0));
                        }
                    }
                    model.add_constraint(
                        pool.unique(format!("ldef[{},p{pi},{t},{q}]", path[pos])),
                        coeffs,
                        Sense::Eq,
                        0.0,
                    );
                }
            }
        }
    }

    // --- conservation: everything that enters a path leaves it ------------------
    for (pi, path) in ctx.paths.paths.iter().enumerate() {
        let last = path.len() - 1;
        for q in 0..nq as u32 {
            let scen = if multi { Some(q) } else { None };
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for t in 0..=horizon {
                coeffs.push((p_col(pi, t, scen), 1.0));
                coeffs.push((l_col(pi, last, t, q), -1.0));
            }
            model.add_constraint(
                pool.unique(format!("cons[p{pi},{q}]")),
                coeffs,
                Sense::Eq,
                0.0,
            );
        }
    }

    // --- capacity over crossings -------------------------------------------------
    // members_of[resource] -> (path, pos) pairs crossing it
    {
        let mut crossers: std::collections::BTreeMap<&str, Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for (pi, path) in ctx.paths.paths.iter().enumerate() {
            for (pos, rid) in path.iter().enumerate() {
                crossers.entry(rid.as_str()).or_default().push((pi, pos));
            }
        }
        for (rid, list) in crossers {
            if ctx.kinds[ctx.res_index[rid]] != ResourceKind::Pca {
                continue;
            }
            for t in 0..=horizon {
                for q in 0..nq as u32 {
                    let coeffs: Vec<(usize, f64)> = list
                        .iter()
                        .map(|&(pi, pos)| (l_col(pi, pos, t, q), 1.0))
                        .collect();
                    let cap = ctx.inst.scenarios.capacity(rid, t, q as usize);
                    model.add_constraint(
                        pool.unique(format!("cap[{rid},{t},{q}]")),
                        coeffs,
                        Sense::Le,
                        cap as f64,
                    );
                }
            }
        }
    }

    // --- nonanticipativity ----------------------------------------------------
    if multi {
        emit_nonanticipativity(&ctx, policy, &mut model, &vm, &mut pool);
    }

    // --- objective --------------------------------------------------------------
    let cg = inst.costs.cg;
    let ca = inst.costs.ca;
    let ground_coeff = if opts.literal_static_ground_coefficient {
        cg - ca
    } else {
        cg
    };
    let mut obj: Vec<(usize, f64)> = Vec::new();
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let awin = ctx.windows.get(fi, oi, 0);
            if multi {
                for (q, &p) in probs.iter().enumerate() {
                    for t in awin.iter() {
                        let dq = vm
                            .col(&VarKey::Depart {
                                flight: fi as u32,
                                option: oi as u32,
                                period: t,
                                scenario: q as u32,
                            })
                            .unwrap();
                        obj.push((dq, p * (cg * (t - awin.lo) as f64 + route.cost)));
                    }
                }
            } else {
                let d = vm
                    .col(&VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    })
                    .unwrap();
                obj.push((d, route.cost - ground_coeff * awin.lo as f64));
                add_time_weighted_jumps(&mut obj, ground_coeff, awin.lo, awin.hi, |t| {
                    w_air(fi, oi, t, None)
                });
            }
        }
    }
    for (pi, path) in ctx.paths.paths.iter().enumerate() {
        for pos in 0..path.len() {
            for (q, &p) in probs.iter().enumerate() {
                for t in 0..=horizon {
                    obj.push((a_col(pi, pos, t, q as u32), ca * p));
                }
            }
        }
    }
    model.set_objective(obj, 0.0);
    Ok((model, vm))
}
