//! Property tests over seeded synthetic instances.

use proptest::prelude::*;

use ctop_core::gen::{synth_instance, SynthParams};
use ctop_core::instance::{derive_paths, derive_time_windows, load_instance};
use ctop_core::mip::{relax, write_model, ModelFormat};
use ctop_core::modelgen::{build_model, BuildOptions, ModelFamily, StagePolicy};

fn tiny_params() -> impl Strategy<Value = SynthParams> {
    (
        1usize..=2,        // airports
        1usize..=3,        // pcas
        1usize..=4,        // flights
        10u32..=16,        // periods
        1usize..=3,        // scenarios
        0usize..=2,        // branch points
        0u64..1000,        // seed
    )
        .prop_map(|(airports, pcas, flights, periods, scenarios, branch_points, seed)| {
            SynthParams {
                airports,
                pcas,
                flights,
                tos_mean: 1.4,
                periods,
                scenarios,
                branch_points,
                tightness: 0.6,
                seed,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn serialization_round_trips(params in tiny_params()) {
        let inst = synth_instance(&params).unwrap();
        let text = inst.to_json();
        let back = load_instance(&text).unwrap();
        prop_assert_eq!(inst, back);
    }

    #[test]
    fn windows_track_travel_times(params in tiny_params()) {
        let inst = synth_instance(&params).unwrap();
        let w = derive_time_windows(&inst).unwrap();
        let arcs = inst.arc_travel();
        let ids = inst.resource_ids();
        for (fi, f) in inst.flights.iter().enumerate() {
            for (oi, route) in f.options.iter().enumerate() {
                for k in 0..route.omega.len() - 1 {
                    let travel = arcs[&(ids[route.omega[k].as_str()], ids[route.omega[k + 1].as_str()])];
                    prop_assert_eq!(w.get(fi, oi, k + 1).lo, w.get(fi, oi, k).lo + travel);
                    prop_assert!(w.get(fi, oi, k).hi + travel <= w.get(fi, oi, k + 1).hi);
                    prop_assert!(w.get(fi, oi, k + 1).hi <= inst.horizon);
                }
            }
        }
    }

    #[test]
    fn paths_partition_pca_crossing_routes(params in tiny_params()) {
        let inst = synth_instance(&params).unwrap();
        let ps = derive_paths(&inst);
        for (fi, f) in inst.flights.iter().enumerate() {
            for (oi, route) in f.options.iter().enumerate() {
                let path = &ps.paths[ps.path_of(fi, oi)];
                prop_assert_eq!(path.as_slice(), &route.omega[1..]);
            }
        }
    }

    #[test]
    fn model_writing_is_deterministic(params in tiny_params()) {
        let inst = synth_instance(&params).unwrap();
        let (a, _) = build_model(&inst, ModelFamily::Lagrangian, StagePolicy::Dynamic, &BuildOptions::default()).unwrap();
        let (b, _) = build_model(&inst, ModelFamily::Lagrangian, StagePolicy::Dynamic, &BuildOptions::default()).unwrap();
        prop_assert_eq!(write_model(&a, ModelFormat::Mps).unwrap(), write_model(&b, ModelFormat::Mps).unwrap());
        // relaxation touches nothing but integrality flags
        let ra = relax(&a);
        prop_assert_eq!(ra.num_variables(), a.num_variables());
        prop_assert!(ra.variables.iter().all(|v| !v.integer));
        prop_assert_eq!(ra.num_nonzeros(), a.num_nonzeros());
    }
}
