//! Certificate and validity properties of the cover strategies on
//! random instances.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_instance;
use rdc_core::model::TopicSet;
use rdc_core::setcover::{
    auto_cover, cover_lp_value, exact_cover, greedy_cover, primal_dual_cover, CoverInstance,
    Strategy,
};

fn random_targets(rng: &mut ChaCha8Rng, n_topics: usize) -> TopicSet {
    let picks: Vec<usize> = (0..n_topics).filter(|_| rng.gen_bool(0.6)).collect();
    TopicSet::from_indices(n_topics, &picks)
}

#[test]
fn certificates_hold_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..150 {
        let inst = random_instance(&mut rng, 12, 10, 1);
        let targets = random_targets(&mut rng, inst.n_topics());
        let cover = CoverInstance::new(targets, inst.all_doc_topics());
        let lp: f64 = cover_lp_value(&cover).unwrap();
        let greedy = greedy_cover::<f64>(&cover).unwrap();
        let pd = primal_dual_cover::<f64>(&cover).unwrap();
        let exact = exact_cover::<f64>(&cover, 20).unwrap();
        let auto = auto_cover::<f64>(&cover, Strategy::Auto).unwrap();
        for r in [&greedy, &pd, &exact, &auto] {
            assert!(
                r.chosen.len() as f64 <= r.certified_rho * r.lp_value + 1e-6,
                "{:?}: |H|={} rho={} lp={}",
                r.strategy,
                r.chosen.len(),
                r.certified_rho,
                r.lp_value
            );
            assert!((r.lp_value - lp).abs() < 1e-6);
        }
        // exact <= greedy <= H(max restricted size) * lp
        assert!(exact.chosen.len() <= greedy.chosen.len());
        assert!(greedy.chosen.len() as f64 <= greedy.certified_rho * lp + 1e-6);
    }
}

#[test]
fn disjoint_instances_have_no_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let n_docs = rng.gen_range(2..8);
        let n_topics = rng.gen_range(n_docs..2 * n_docs);
        // Partition the topics among documents.
        let mut owner: Vec<Vec<usize>> = vec![Vec::new(); n_docs];
        for e in 0..n_topics {
            owner[rng.gen_range(0..n_docs)].push(e);
        }
        let sets: Vec<TopicSet> = owner
            .iter()
            .map(|ts| TopicSet::from_indices(n_topics, ts))
            .collect();
        let targets = random_targets(&mut rng, n_topics);
        let cover = CoverInstance::new(targets, &sets);
        let lp: f64 = cover_lp_value(&cover).unwrap();
        for strategy in [Strategy::Greedy, Strategy::PrimalDual, Strategy::Exact, Strategy::Auto, Strategy::Disjoint] {
            let r = auto_cover::<f64>(&cover, strategy).unwrap();
            assert!(
                (r.chosen.len() as f64 - lp).abs() < 1e-6,
                "{strategy:?} returned {} sets on a disjoint instance with lp {lp}",
                r.chosen.len()
            );
        }
        let disjoint = auto_cover::<f64>(&cover, Strategy::Auto).unwrap();
        assert_eq!(disjoint.strategy, Strategy::Disjoint);
        assert_eq!(disjoint.certified_rho, 1.0);
    }
}

#[test]
fn primal_dual_respects_frequency_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..60 {
        let n_topics = rng.gen_range(2..8);
        let n_docs = rng.gen_range(2..10);
        let d = rng.gen_range(1..4usize);
        // Every topic appears in at most d documents.
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); n_docs];
        for e in 0..n_topics {
            let copies = rng.gen_range(1..=d);
            for _ in 0..copies {
                sets[rng.gen_range(0..n_docs)].push(e);
            }
        }
        let sets: Vec<TopicSet> = sets
            .iter()
            .map(|ts| TopicSet::from_indices(n_topics, ts))
            .collect();
        let all = TopicSet::from_indices(n_topics, &(0..n_topics).collect::<Vec<_>>());
        let cover = CoverInstance::new(all, &sets);
        let r = primal_dual_cover::<f64>(&cover).unwrap();
        assert!(r.certified_rho <= d as f64 + 1e-9);
        assert!(r.chosen.len() as f64 <= d as f64 * r.lp_value + 1e-6);
    }
}
