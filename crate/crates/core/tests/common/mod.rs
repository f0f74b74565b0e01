//! Shared helpers for the integration suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rdc_core::Instance;

/// Random valid instance: every topic covered by some document, every
/// user with a nonempty interest set and a threshold in range.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_docs: usize,
    max_topics: usize,
    max_users: usize,
) -> Instance {
    let n_docs = rng.gen_range(1..=max_docs);
    let n_topics = rng.gen_range(1..=max_topics);
    let n_users = rng.gen_range(1..=max_users);
    let doc_density = rng.gen_range(0.2..0.7);
    let user_density = rng.gen_range(0.2..0.7);

    let mut docs: Vec<Vec<usize>> = (0..n_docs)
        .map(|_| {
            (0..n_topics)
                .filter(|_| rng.gen_bool(doc_density))
                .collect()
        })
        .collect();
    for e in 0..n_topics {
        if !docs.iter().any(|d| d.contains(&e)) {
            let s = rng.gen_range(0..n_docs);
            docs[s].push(e);
        }
    }
    let users: Vec<(Vec<usize>, usize)> = (0..n_users)
        .map(|_| {
            let mut interests: Vec<usize> = (0..n_topics)
                .filter(|_| rng.gen_bool(user_density))
                .collect();
            if interests.is_empty() {
                interests.push(rng.gen_range(0..n_topics));
            }
            let k = rng.gen_range(1..=interests.len());
            (interests, k)
        })
        .collect();
    Instance::from_indexed(n_topics, docs, users)
}

/// Uniform random permutation of `0..n`.
pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}
