//! Flight-level ("Lagrangian") formulations.
//!
//! Per flight, route option, resource, period (and scenario, where the copy
//! is scenario-specific) a binary variable records admission *by* that
//! period. Constraints: one route per flight, monotone admission indicators,
//! travel-time consistency between consecutive resources, per-period PCA
//! capacities, boundary conditions tying the final resource to the route
//! indicator, and (multistage only) nonanticipativity of departures.

use crate::error::Result;
use crate::instance::{Instance, ResourceKind};
use crate::mip::{MipModel, Sense};

use super::{
    add_time_weighted_jumps, add_var, Ctx, NamePool, StagePolicy, VarKey, VarMap,
};

pub fn build_lagrangian(inst: &Instance, policy: StagePolicy) -> Result<(MipModel, VarMap)> {
    let ctx = Ctx::prepare(inst)?;
    let mut model = MipModel::new(format!("lagrangian-{}", policy.name()));
    let mut vm = VarMap::new(super::ModelFamily::Lagrangian, policy);
    let mut pool = NamePool::new();
    let multi = policy.is_multistage();
    let nq = ctx.nq;
    let probs = &inst.scenarios.probabilities;

    // Scenario copies of the airport trajectory: shared in the two-stage
    // model, one per scenario otherwise.
    let airport_scens: Vec<Option<u32>> = if multi {
        (0..nq as u32).map(Some).collect()
    } else {
        vec![None]
    };

    // --- variables ------------------------------------------------------
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let (fid, rid) = (&f.id, &route.id);
            let awin = ctx.windows.get(fi, oi, 0);
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
            // airport passage
            for &scen in &airport_scens {
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
            }
            // downstream passages, always scenario-specific
            for pos in 1..route.omega.len() {
                let win = ctx.windows.get(fi, oi, pos);
                for q in 0..nq as u32 {
                    for t in win.iter() {
                        add_var(
                            &mut model,
                            &mut vm,
                            &mut pool,
                            VarKey::W {
                                flight: fi as u32,
                                option: oi as u32,
                                pos: pos as u32,
                                period: t,
                                scenario: Some(q),
                            },
                            format!("w[{fid},{rid},{},{t},{q}]", route.omega[pos]),
                            0.0,
                            1.0,
                            true,
                        );
                    }
                }
            }
        }
    }

    let w = |fi: usize, oi: usize, pos: usize, t: u32, scen: Option<u32>| -> usize {
        vm.col(&VarKey::W {
            flight: fi as u32,
            option: oi as u32,
            pos: pos as u32,
            period: t,
            scenario: scen,
        })
        .expect("w variable exists")
    };

    // --- route selection --------------------------------------------------
    emit_route_selection(&ctx, multi, &mut model, &vm, &mut pool);

    // --- connectivity in time (monotone admission) -----------------------
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let (fid, rid) = (&f.id, &route.id);
            for pos in 0..route.omega.len() {
                let win = ctx.windows.get(fi, oi, pos);
                let scen_list: Vec<Option<u32>> = if pos == 0 {
                    airport_scens.clone()
                } else {
                    (0..nq as u32).map(Some).collect()
                };
                for scen in scen_list {
                    for t in win.lo + 1..=win.hi {
                        let name = match scen {
                            Some(q) => {
                                format!("mono[{fid},{rid},{},{t},{q}]", route.omega[pos])
                            }
                            None => format!("mono[{fid},{rid},{},{t}]", route.omega[pos]),
                        };
                        model.add_constraint(
                            pool.unique(name),
                            vec![
                                (w(fi, oi, pos, t, scen), 1.0),
                                (w(fi, oi, pos, t - 1, scen), -1.0),
                            ],
                            Sense::Ge,
                            0.0,
                        );
                    }
                }
            }
        }
    }

    // --- connectivity between resources ----------------------------------
    // Admission downstream by t implies admission upstream by t - travel;
    // past the upstream window's end the last upstream variable applies.
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let (fid, rid) = (&f.id, &route.id);
            for pos in 0..route.omega.len() - 1 {
                let up = ctx.windows.get(fi, oi, pos);
                let down = ctx.windows.get(fi, oi, pos + 1);
                let delta = ctx.travel_between(&route.omega[pos], &route.omega[pos + 1]);
                for q in 0..nq as u32 {
                    let up_scen = if pos == 0 && !multi { None } else { Some(q) };
                    let mut emit = |t_down: u32, t_up: u32| {
                        model.add_constraint(
                            pool.unique(format!(
                                "link[{fid},{rid},{},{t_down},{q}]",
                                route.omega[pos + 1]
                            )),
                            vec![
                                (w(fi, oi, pos + 1, t_down, Some(q)), 1.0),
                                (w(fi, oi, pos, t_up, up_scen), -1.0),
                            ],
                            Sense::Le,
                            0.0,
                        );
                    };
                    let covered_hi = down.hi.min(up.hi + delta);
                    for t_down in down.lo..=covered_hi {
                        emit(t_down, t_down - delta);
                    }
                    if down.hi > up.hi + delta {
                        emit(down.hi, up.hi);
                    }
                }
            }
        }
    }

    // --- capacity ---------------------------------------------------------
    emit_capacity_rows(&ctx, &mut model, &mut pool, |fi, oi, pos, t, q| {
        Some(w(fi, oi, pos, t, Some(q)))
    });

    // --- nonanticipativity (multistage only) ------------------------------
    if multi {
        emit_nonanticipativity(&ctx, policy, &mut model, &vm, &mut pool);
    }

    // --- boundary: final resource reached iff the route is flown ----------
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let last = route.omega.len() - 1;
            let lwin = ctx.windows.get(fi, oi, last);
            for q in 0..nq as u32 {
                let delta_col = if multi {
                    vm.col(&VarKey::ScenarioRoute {
                        flight: fi as u32,
                        option: oi as u32,
                        scenario: q,
                    })
                    .unwrap()
                } else {
                    vm.col(&VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    })
                    .unwrap()
                };
                model.add_constraint(
                    pool.unique(format!("bnd[{},{},{q}]", f.id, route.id)),
                    vec![(w(fi, oi, last, lwin.hi, Some(q)), 1.0), (delta_col, -1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }

    // --- objective ---------------------------------------------------------
    // Per scenario: route cost + cg*(ground delay) + ca*(air delay), with
    // the air share written through the final-resource admission time:
    // cg*g + ca*a = (cg-ca)*(dep - scheduled dep) + ca*(final - scheduled).
    let cg = inst.costs.cg;
    let ca = inst.costs.ca;
    let mut obj: Vec<(usize, f64)> = Vec::new();
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let awin = ctx.windows.get(fi, oi, 0);
            let last = route.omega.len() - 1;
            let lwin = ctx.windows.get(fi, oi, last);
            let fixed = route.cost - (cg - ca) * awin.lo as f64 - ca * lwin.lo as f64;
            if multi {
                for (q, &p) in probs.iter().enumerate() {
                    obj.push((
                        vm.col(&VarKey::ScenarioRoute {
                            flight: fi as u32,
                            option: oi as u32,
                            scenario: q as u32,
                        })
                        .unwrap(),
                        p * fixed,
                    ));
                    add_time_weighted_jumps(&mut obj, p * (cg - ca), awin.lo, awin.hi, |t| {
                        w(fi, oi, 0, t, Some(q as u32))
                    });
                    add_time_weighted_jumps(&mut obj, p * ca, lwin.lo, lwin.hi, |t| {
                        w(fi, oi, last, t, Some(q as u32))
                    });
                }
            } else {
                obj.push((
                    vm.col(&VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    })
                    .unwrap(),
                    fixed,
                ));
                add_time_weighted_jumps(&mut obj, cg - ca, awin.lo, awin.hi, |t| {
                    w(fi, oi, 0, t, None)
                });
                for (q, &p) in probs.iter().enumerate() {
                    add_time_weighted_jumps(&mut obj, p * ca, lwin.lo, lwin.hi, |t| {
                        w(fi, oi, last, t, Some(q as u32))
                    });
                }
            }
        }
    }
    model.set_objective(obj, 0.0);
    Ok((model, vm))
}

/// Route selection, shared by both families: exactly one route per flight
/// (per scenario when multistage), with the departure indicators defined off
/// the airport trajectory and tied to the route indicator.
pub(super) fn emit_route_selection(
    ctx: &Ctx,
    multi: bool,
    model: &mut MipModel,
    vm: &VarMap,
    pool: &mut NamePool,
) {
    let nq = ctx.nq;
    let w_air = |fi: usize, oi: usize, t: u32, scen: Option<u32>| -> usize {
        vm.col(&VarKey::W {
            flight: fi as u32,
            option: oi as u32,
            pos: 0,
            period: t,
            scenario: scen,
        })
        .expect("airport variable exists")
    };
    for (fi, f) in ctx.inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let awin = ctx.windows.get(fi, oi, 0);
            let (fid, rid) = (&f.id, &route.id);
            if multi {
                for q in 0..nq as u32 {
                    for t in awin.iter() {
                        let dq = vm
                            .col(&VarKey::Depart {
                                flight: fi as u32,
                                option: oi as u32,
                                period: t,
                                scenario: q,
                            })
                            .unwrap();
                        let mut coeffs = vec![(dq, 1.0), (w_air(fi, oi, t, Some(q)), -1.0)];
                        if t > awin.lo {
                            coeffs.push((w_air(fi, oi, t - 1, Some(q)), 1.0));
                        }
                        model.add_constraint(
                            pool.unique(format!("dqd[{fid},{rid},{t},{q}]")),
                            coeffs,
                            Sense::Eq,
                            0.0,
                        );
                    }
                    let ds = vm
                        .col(&VarKey::ScenarioRoute {
                            flight: fi as u32,
                            option: oi as u32,
                            scenario: q,
                        })
                        .unwrap();
                    let mut coeffs = vec![(ds, 1.0)];
                    for t in awin.iter() {
                        coeffs.push((
                            vm.col(&VarKey::Depart {
                                flight: fi as u32,
                                option: oi as u32,
                                period: t,
                                scenario: q,
                            })
                            .unwrap(),
                            -1.0,
                        ));
                    }
                    model.add_constraint(
                        pool.unique(format!("dsd[{fid},{rid},{q}]")),
                        coeffs,
                        Sense::Eq,
                        0.0,
                    );
                }
            } else {
                let d = vm
                    .col(&VarKey::RouteChoice {
                        flight: fi as u32,
                        option: oi as u32,
                    })
                    .unwrap();
                model.add_constraint(
                    pool.unique(format!("sel[{fid},{rid}]")),
                    vec![(w_air(fi, oi, awin.hi, None), 1.0), (d, -1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
        }
        if multi {
            for q in 0..nq as u32 {
                let coeffs: Vec<(usize, f64)> = (0..f.options.len())
                    .map(|oi| {
                        (
                            vm.col(&VarKey::ScenarioRoute {
                                flight: fi as u32,
                                option: oi as u32,
                                scenario: q,
                            })
                            .unwrap(),
                            1.0,
                        )
                    })
                    .collect();
                model.add_constraint(
                    pool.unique(format!("one[{},{q}]", f.id)),
                    coeffs,
                    Sense::Eq,
                    1.0,
                );
            }
        } else {
            let coeffs: Vec<(usize, f64)> = (0..f.options.len())
                .map(|oi| {
                    (
                        vm.col(&VarKey::RouteChoice {
                            flight: fi as u32,
                            option: oi as u32,
                        })
                        .unwrap(),
                        1.0,
                    )
                })
                .collect();
            model.add_constraint(pool.unique(format!("one[{}]", f.id)), coeffs, Sense::Eq, 1.0);
        }
    }
}

/// One row per (capacitated resource, period, scenario) counting admissions:
/// sum over crossing routes of w_t - w_{t-1}, bounded by the capacity.
pub(super) fn emit_capacity_rows(
    ctx: &Ctx,
    model: &mut MipModel,
    pool: &mut NamePool,
    col: impl Fn(usize, usize, usize, u32, u32) -> Option<usize>,
) {
    for (rid, pairs) in &ctx.phi {
        if ctx.kinds[ctx.res_index[rid]] != ResourceKind::Pca || pairs.is_empty() {
            continue;
        }
        for t in 0..=ctx.inst.horizon {
            for q in 0..ctx.nq as u32 {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                for &(fi, oi) in pairs {
                    let pos = ctx.pos_on_route(fi, oi, rid).expect("crossing route");
                    let win = ctx.windows.get(fi, oi, pos);
                    if !win.contains(t) {
                        continue;
                    }
                    if let Some(c) = col(fi, oi, pos, t, q) {
                        coeffs.push((c, 1.0));
                    }
                    if t > win.lo {
                        if let Some(c) = col(fi, oi, pos, t - 1, q) {
                            coeffs.push((c, -1.0));
                        }
                    }
                }
                if coeffs.is_empty() {
                    continue;
                }
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

/// Chained pairwise equalities between departure indicators of scenarios
/// that are indistinguishable when the decision binds.
pub(super) fn emit_nonanticipativity(
    ctx: &Ctx,
    policy: StagePolicy,
    model: &mut MipModel,
    vm: &VarMap,
    pool: &mut NamePool,
) {
    for (fi, f) in ctx.inst.flights.iter().enumerate() {
        for (oi, route) in f.options.iter().enumerate() {
            let awin = ctx.windows.get(fi, oi, 0);
            let dq = |t: u32, q: usize| -> usize {
                vm.col(&VarKey::Depart {
                    flight: fi as u32,
                    option: oi as u32,
                    period: t,
                    scenario: q as u32,
                })
                .unwrap()
            };
            match policy {
                StagePolicy::Dynamic => {
                    for t in awin.iter() {
                        for (bi, set) in ctx.agreeing_sets_at(t).iter().enumerate() {
                            for pair in set.windows(2) {
                                model.add_constraint(
                                    pool.unique(format!(
                                        "na[{},{},{t},{bi},{}]",
                                        f.id, route.id, pair[0]
                                    )),
                                    vec![(dq(t, pair[0]), 1.0), (dq(t, pair[1]), -1.0)],
                                    Sense::Eq,
                                    0.0,
                                );
                            }
                        }
                    }
                }
                StagePolicy::SemiDynamic => {
                    // decisions commit at the scheduled departure time
                    for (bi, set) in ctx.agreeing_sets_at(f.dep).iter().enumerate() {
                        for t in awin.iter() {
                            for pair in set.windows(2) {
                                model.add_constraint(
                                    pool.unique(format!(
                                        "na[{},{},{t},{bi},{}]",
                                        f.id, route.id, pair[0]
                                    )),
                                    vec![(dq(t, pair[0]), 1.0), (dq(t, pair[1]), -1.0)],
                                    Sense::Eq,
                                    0.0,
                                );
                            }
                        }
                    }
                }
                StagePolicy::TwoStage => unreachable!("two-stage has no scenario copies"),
            }
        }
    }
}
