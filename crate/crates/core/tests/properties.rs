//! Cross-module invariants checked over randomized inputs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rfcs_core::files::{parse_instance, serialize_instance};
use rfcs_core::instance::{generate_instance, ScaleProfile, VariantFlags};
use rfcs_core::policy::{advantages, rollout, PolicyParams, SampleMode};
use rfcs_core::routefirst::{local_search, nearest_neighbor_tour, rotate_best, Objective, SearchBudget};
use rfcs_core::split::{segment_route_cost, split, ConstraintSemantics, GiantTour};
use rfcs_core::validate::validate_solution;

fn variant(index: usize) -> VariantFlags {
    VariantFlags::all_sixteen()[index % 16]
}

fn sem() -> ConstraintSemantics {
    ConstraintSemantics::default()
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    sorted == (1..=n).collect::<Vec<_>>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(n in 1usize..40, v in 0usize..16, seed in any::<u64>()) {
        let inst = generate_instance(n, variant(v), ScaleProfile::N50, seed).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..40, v in 0usize..16, seed in any::<u64>()) {
        let a = generate_instance(n, variant(v), ScaleProfile::N100, seed).unwrap();
        let b = generate_instance(n, variant(v), ScaleProfile::N100, seed).unwrap();
        prop_assert_eq!(serialize_instance(&a), serialize_instance(&b));
    }

    #[test]
    fn split_routes_partition_and_validate(n in 1usize..30, v in 0usize..16, seed in any::<u64>()) {
        let inst = generate_instance(n, variant(v), ScaleProfile::N50, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let tour = GiantTour::random(n, &mut rng);
        let res = split(&inst, &tour, sem());
        if res.feasible {
            prop_assert_eq!(*res.boundaries.last().unwrap(), n);
            prop_assert!(res.boundaries.windows(2).all(|w| w[0] < w[1]));
            let sol = res.to_solution(&tour).unwrap();
            prop_assert_eq!(sol.routes.concat(), tour.order().to_vec());
            let report = validate_solution(&inst, &sol, sem()).unwrap();
            prop_assert!(report.is_feasible(), "{:?}", report.violations);
        } else {
            prop_assert!(res.total_cost.is_infinite());
            prop_assert!(res.boundaries.is_empty());
        }
    }

    #[test]
    fn open_split_never_costs_more(n in 1usize..25, v in 0usize..16, seed in any::<u64>()) {
        let mut closed = generate_instance(n, variant(v), ScaleProfile::N50, seed).unwrap();
        closed.flags.open = false;
        let mut open = closed.clone();
        open.flags.open = true;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151);
        let tour = GiantTour::random(n, &mut rng);
        let open_cost = split(&open, &tour, sem()).total_cost;
        let closed_cost = split(&closed, &tour, sem()).total_cost;
        prop_assert!(open_cost <= closed_cost);
    }

    #[test]
    fn segment_path_is_monotone_in_extension(n in 2usize..20, seed in any::<u64>()) {
        // open unconstrained routes make the segment cost equal the path
        let mut inst = generate_instance(n, VariantFlags::cvrp(), ScaleProfile::Custom(9 * n as i64), seed).unwrap();
        inst.flags.open = true;
        let tour = GiantTour::identity(n);
        let mut previous = 0.0;
        for end in 1..=n {
            let cost = segment_route_cost(&inst, &tour, 0, end, sem()).unwrap();
            prop_assert!(cost >= previous);
            previous = cost;
        }
    }

    #[test]
    fn search_preserves_permutations(n in 2usize..15, seed in any::<u64>()) {
        let inst = generate_instance(n, variant(seed as usize), ScaleProfile::N50, seed).unwrap();
        let start = nearest_neighbor_tour(&inst, 1 + (seed as usize % n));
        prop_assert!(is_permutation(start.order(), n));
        let budget = SearchBudget::new(60, seed);
        let improved = local_search(&inst, &start, Objective::SplitCost, &budget, sem());
        prop_assert!(is_permutation(improved.order(), n));
        let rotated = rotate_best(&inst, &improved, sem(), true);
        prop_assert!(is_permutation(rotated.order(), n));
        prop_assert!(
            split(&inst, &rotated, sem()).total_cost <= split(&inst, &improved, sem()).total_cost
        );
    }

    #[test]
    fn rollouts_are_permutations(n in 1usize..15, seed in any::<u64>()) {
        let inst = generate_instance(n, variant(seed as usize), ScaleProfile::N50, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rollout(&inst, &PolicyParams::zeros(), SampleMode::Sample, sem(), &mut rng).unwrap();
        prop_assert!(is_permutation(&t.actions, n));
    }

    #[test]
    fn advantages_are_centered(rewards in prop::collection::vec(-50.0f64..0.0, 2..12)) {
        let adv = advantages(&rewards);
        let sum: f64 = adv.iter().sum();
        prop_assert!(sum.abs() < 1e-9);
        let shifted: Vec<f64> = rewards.iter().map(|r| r + 13.25).collect();
        let adv_shifted = advantages(&shifted);
        for (a, b) in adv.iter().zip(adv_shifted.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
