//! Coverage and ranking properties over random instances.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_instance, random_permutation};
use rdc_core::model::{complete_ranking, evaluate};

proptest! {
    /// Coverage is monotone and submodular: for A ⊆ B and a document x,
    /// f(A+x) - f(A) >= f(B+x) - f(B) and f(A) <= f(B).
    #[test]
    fn coverage_monotone_submodular(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 8, 8, 4);
        let n = inst.n_docs();
        let b: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let a: Vec<usize> = b.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let x = rng.gen_range(0..n);
        for u in 0..inst.n_users() {
            let fa = inst.coverage_count(u, &a).unwrap();
            let fb = inst.coverage_count(u, &b).unwrap();
            prop_assert!(fa <= fb, "monotone");
            let mut ax = a.clone();
            ax.push(x);
            let mut bx = b.clone();
            bx.push(x);
            let ga = inst.coverage_count(u, &ax).unwrap() - fa;
            let gb = inst.coverage_count(u, &bx).unwrap() - fb;
            prop_assert!(ga >= gb, "submodular: gain {ga} vs {gb}");
        }
    }

    /// Satisfying times never exceed n, and two permutations sharing a
    /// prefix agree on every user satisfied within that prefix.
    #[test]
    fn satisfying_times_prefix_determined(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 7, 4);
        let n = inst.n_docs();
        let p1 = random_permutation(&mut rng, n);
        let cut = rng.gen_range(0..=n);
        // p2 keeps p1's prefix, reshuffles the suffix.
        let mut p2 = p1[..cut].to_vec();
        let mut tail = p1[cut..].to_vec();
        for i in (1..tail.len()).rev() {
            let j = rng.gen_range(0..=i);
            tail.swap(i, j);
        }
        p2.extend(tail);
        let r1 = evaluate(&inst, &p1).unwrap();
        let r2 = evaluate(&inst, &p2).unwrap();
        for u in 0..inst.n_users() {
            prop_assert!(r1.satisfy_times[u] >= 1 && r1.satisfy_times[u] <= n);
            if r1.satisfy_times[u] <= cut {
                prop_assert_eq!(r1.satisfy_times[u], r2.satisfy_times[u]);
            }
        }
    }

    /// Round completion always yields a permutation, whatever the
    /// duplicates across rounds.
    #[test]
    fn completion_is_permutation(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 8, 6, 2);
        let n = inst.n_docs();
        let n_rounds = rng.gen_range(0..4);
        let rounds: Vec<Vec<usize>> = (0..n_rounds)
            .map(|_| {
                let len = rng.gen_range(0..=n + 2);
                (0..len).map(|_| rng.gen_range(0..n)).collect()
            })
            .collect();
        let order = complete_ranking(&inst, &rounds).unwrap();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }
}
