//! Relaxation soundness on random instances: integral validity of the
//! knapsack-cover family and the lower-bound chain against the oracle.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_instance, random_permutation};
use rdc_core::baselines::brute_force;
use rdc_core::model::TopicSet;
use rdc_core::relaxation::{
    integral_point, integral_row_slack, make_kc_row, solve_relaxation, RelaxConfig,
};

/// Every permutation's integral point satisfies every knapsack-cover
/// row, checked in exact integer arithmetic.
#[test]
fn kc_rows_valid_for_integral_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    while checked < 300 {
        let inst = random_instance(&mut rng, 6, 8, 4);
        let order = random_permutation(&mut rng, inst.n_docs());
        let point = integral_point(&inst, &order);
        let u = rng.gen_range(0..inst.n_users());
        let t = rng.gen_range(1..=inst.n_docs());
        // Random F strictly smaller than the threshold.
        let interests: Vec<usize> = inst.interests(u).iter().collect();
        let k = inst.threshold(u);
        let take = rng.gen_range(0..k);
        let mut shuffled = interests.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range(0..=i);
            shuffled.swap(i, j);
        }
        let fixed = TopicSet::from_indices(inst.n_topics(), &shuffled[..take]);
        let row = make_kc_row(&inst, u, t, &fixed).unwrap();
        assert!(
            integral_row_slack(&row, &point) >= 0,
            "violated KC row for u={u} t={t} F={fixed:?} order={order:?}"
        );
        checked += 1;
    }
}

/// OPT_LP lower-bounds the brute-force optimum, and the half-time bound
/// lower-bounds OPT_LP.
#[test]
fn bound_chain_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 6, 8, 4);
        let sol = solve_relaxation::<f64>(&inst, &RelaxConfig::default()).unwrap();
        let oracle = brute_force(&inst, 9).unwrap();
        assert!(
            sol.objective <= oracle.ranking.total_cost as f64 + 1e-6,
            "OPT_LP {} exceeds oracle {}",
            sol.objective,
            oracle.ranking.total_cost
        );
        let half: f64 = sol.t_star.iter().map(|&t| t as f64).sum::<f64>() * 0.5;
        assert!(half <= sol.objective + 1e-6);
        // t* is within range.
        for &t in &sol.t_star {
            assert!(t <= inst.n_docs());
        }
    }
}

/// Separating at every time step (not just powers of two) may move the
/// bound, but it stays a valid lower bound.
#[test]
fn denser_separation_times_stay_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..15 {
        let inst = random_instance(&mut rng, 6, 7, 3);
        let doubling = solve_relaxation::<f64>(&inst, &RelaxConfig::default()).unwrap();
        let dense_cfg = RelaxConfig {
            all_times: true,
            ..RelaxConfig::default()
        };
        let dense = solve_relaxation::<f64>(&inst, &dense_cfg).unwrap();
        let oracle = brute_force(&inst, 9).unwrap();
        assert!(dense.objective <= oracle.ranking.total_cost as f64 + 1e-6);
        // More rows can only tighten.
        assert!(dense.objective >= doubling.objective - 1e-5);
    }
}

/// The generated rows are all satisfied by the final fractional point.
#[test]
fn generated_rows_satisfied_at_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 6, 7, 3);
        let sol = solve_relaxation::<f64>(&inst, &RelaxConfig::default()).unwrap();
        for (row, _) in &sol.generated {
            let z_at_t: Vec<f64> = sol.z.iter().map(|zs| zs[row.time - 1]).collect();
            let v = row.violation(sol.y[row.user][row.time - 1], &z_at_t);
            assert!(v <= 1e-6, "row still violated by {v}");
        }
    }
}
