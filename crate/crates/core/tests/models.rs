//! Cross-checks between the model builders, the reference solver, and the
//! brute-force oracle on tiny fixtures.

use ctop_core::analysis::{solve_to_optimality, SolverConfig};
use ctop_core::gen::tiny;
use ctop_core::instance::Instance;
use ctop_core::mip::{relax, solve_reference, SolveStatus};
use ctop_core::modelgen::{
    build_lagrangian, build_lagrangian_eulerian, build_model, model_stats, BuildOptions,
    ModelFamily, StagePolicy,
};
use ctop_core::oracle::enumerate_policies;

fn optimum(inst: &Instance, family: ModelFamily, policy: StagePolicy) -> f64 {
    let (model, _) = build_model(inst, family, policy, &BuildOptions::default()).unwrap();
    let solve = solve_to_optimality(&model, &SolverConfig::default())
        .unwrap_or_else(|e| panic!("{}/{}: {e}", family.name(), policy.name()));
    solve.result.objective
}

#[test]
fn uncongested_flight_costs_its_route() {
    let inst = tiny::single_flight();
    for family in ModelFamily::ALL {
        for policy in StagePolicy::ALL {
            let got = optimum(&inst, family, policy);
            assert!(
                (got - 3.5).abs() < 1e-6,
                "{}/{}: expected 3.5, got {got}",
                family.name(),
                policy.name()
            );
        }
    }
}

#[test]
fn lagrangian_matches_oracle_on_t1() {
    let inst = tiny::t1();
    for policy in StagePolicy::ALL {
        let (oracle_cost, _) = enumerate_policies(&inst, policy).unwrap();
        let got = optimum(&inst, ModelFamily::Lagrangian, policy);
        assert!(
            (got - oracle_cost).abs() < 1e-6,
            "{}: model {got} vs oracle {oracle_cost}",
            policy.name()
        );
    }
}

#[test]
fn lagrangian_matches_oracle_on_reroute_fixture() {
    let inst = tiny::t2_reroute();
    for policy in StagePolicy::ALL {
        let (oracle_cost, _) = enumerate_policies(&inst, policy).unwrap();
        let got = optimum(&inst, ModelFamily::Lagrangian, policy);
        assert!(
            (got - oracle_cost).abs() < 1e-6,
            "{}: model {got} vs oracle {oracle_cost}",
            policy.name()
        );
    }
}

#[test]
fn aggregation_never_costs_more() {
    for inst in [tiny::t1(), tiny::t2_reroute(), tiny::t3_three_flights()] {
        for policy in StagePolicy::ALL {
            let lag = optimum(&inst, ModelFamily::Lagrangian, policy);
            let le = optimum(&inst, ModelFamily::LagrangianEulerian, policy);
            assert!(
                le <= lag + 1e-6,
                "{}: aggregated {le} > flight-level {lag}",
                policy.name()
            );
        }
    }
}

#[test]
fn single_scenario_collapses_the_policies() {
    let inst = tiny::single_flight();
    for family in ModelFamily::ALL {
        let values: Vec<f64> = StagePolicy::ALL
            .iter()
            .map(|&p| optimum(&inst, family, p))
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() < 1e-9, "{values:?}");
        }
    }
}

#[test]
fn relaxation_bounds_the_integer_optimum_from_below() {
    let inst = tiny::t2_reroute();
    for policy in StagePolicy::ALL {
        let (model, _) = build_model(
            &inst,
            ModelFamily::Lagrangian,
            policy,
            &BuildOptions::default(),
        )
        .unwrap();
        let lp = solve_reference(&relax(&model)).unwrap();
        assert_eq!(lp.status, SolveStatus::Optimal);
        let (oracle_cost, _) = enumerate_policies(&inst, policy).unwrap();
        assert!(lp.objective <= oracle_cost + 1e-6);
    }
}

#[test]
fn t1_two_stage_model_size_matches_hand_count() {
    // Hand enumeration from the emission rules, all per flight (x2 flights,
    // 2 scenarios): columns d=1, airport w=3, P w=4x2, X w=5x2;
    // rows: sel 1, one 1, monotone 2 + 3x2 + 4x2, links (3+1)x2 + (4+1)x2,
    // boundary 1x2; plus shared capacity rows at P for t in 1..=4, per
    // scenario.
    let inst = tiny::t1();
    let (model, _) = build_lagrangian(&inst, StagePolicy::TwoStage).unwrap();
    let (cols, rows, nnz) = model_stats(&model);
    assert_eq!(cols, 2 * (1 + 3 + 8 + 10));
    assert_eq!(rows, 2 * (1 + 1 + 16 + 18 + 2) + 8);
    assert_eq!(nnz, 178);
}

#[test]
fn empty_and_tiny_model_stats() {
    let empty = ctop_core::mip::MipModel::new("empty");
    assert_eq!(model_stats(&empty), (0, 0, 0));
}

#[test]
fn literal_ground_coefficient_switch_changes_the_static_flow_objective() {
    let inst = tiny::t1();
    let (base, _) = build_lagrangian_eulerian(
        &inst,
        StagePolicy::TwoStage,
        &BuildOptions::default(),
    )
    .unwrap();
    let (literal, _) = build_lagrangian_eulerian(
        &inst,
        StagePolicy::TwoStage,
        &BuildOptions {
            literal_static_ground_coefficient: true,
        },
    )
    .unwrap();
    assert_eq!(base.num_variables(), literal.num_variables());
    assert_ne!(base.objective, literal.objective);
}

#[test]
fn zero_tightness_costs_only_the_routes() {
    // capacities at or above peak demand: nobody waits, everybody flies the
    // zero-cost original option
    let inst = ctop_core::gen::synth_instance(&ctop_core::gen::SynthParams {
        airports: 1,
        pcas: 2,
        flights: 3,
        tos_mean: 1.4,
        periods: 10,
        scenarios: 2,
        branch_points: 1,
        tightness: 0.0,
        seed: 4,
    })
    .unwrap();
    for family in ModelFamily::ALL {
        for policy in StagePolicy::ALL {
            let got = optimum(&inst, family, policy);
            assert!(got.abs() < 1e-6, "{}/{}: {got}", family.name(), policy.name());
        }
    }
}

#[test]
fn documented_synth_params_fit_the_oracle_budget() {
    let inst = ctop_core::gen::synth_instance(&ctop_core::gen::SynthParams {
        airports: 2,
        pcas: 2,
        flights: 3,
        tos_mean: 1.5,
        periods: 10,
        scenarios: 2,
        branch_points: 1,
        tightness: 0.5,
        seed: 0,
    })
    .unwrap();
    for policy in StagePolicy::ALL {
        let (cost, _) = enumerate_policies(&inst, policy)
            .unwrap_or_else(|e| panic!("{}: {e}", policy.name()));
        let got = optimum(&inst, ModelFamily::Lagrangian, policy);
        assert!((got - cost).abs() < 1e-6);
    }
}

#[test]
fn case_study_horizon_extends_eight_periods_past_the_program() {
    // program window 20:00Z-23:59Z = periods 0..=15; the longest travel
    // chain (8 periods to the constrained airport) adds eight more
    let inst = ctop_core::gen::build_case_study(1);
    assert_eq!(inst.horizon, 15 + 8);
    let windows = ctop_core::instance::derive_time_windows(&inst).unwrap();
    let mut deepest = 0;
    for (fi, f) in inst.flights.iter().enumerate() {
        for (oi, r) in f.options.iter().enumerate() {
            deepest = deepest.max(windows.get(fi, oi, r.omega.len() - 1).hi);
        }
    }
    assert_eq!(deepest, inst.horizon, "late flights use the appended periods");
}

#[test]
fn policy_classes_nest_on_every_fixture() {
    for (name, inst) in [
        ("t1", tiny::t1()),
        ("t2", tiny::t2_reroute()),
        ("t3", tiny::t3_three_flights()),
    ] {
        for family in ModelFamily::ALL {
            let two = optimum(&inst, family, StagePolicy::TwoStage);
            let semi = optimum(&inst, family, StagePolicy::SemiDynamic);
            let dynamic = optimum(&inst, family, StagePolicy::Dynamic);
            assert!(
                two >= semi - 1e-6 && semi >= dynamic - 1e-6,
                "{name}/{}: {two} {semi} {dynamic}",
                family.name()
            );
        }
    }
}
