//! Deterministic benchmark fixtures shared by the test suites.

use crate::model::Instance;

/// The 3-document instance used throughout the unit tests:
/// `s1={e1}, s2={e2}, s3={e1,e2}` with a 2-of-2 user and a 1-of-1 user.
pub fn tiny_instance() -> Instance {
    Instance::from_indexed(
        2,
        vec![vec![0], vec![1], vec![0, 1]],
        vec![(vec![0, 1], 2), (vec![0], 1)],
    )
}

/// Fixed 32-document reference instance for the statistical checks.
///
/// Three broad "hub" documents jointly cover the 20-topic universe, so
/// every induced cover instance stays cheap; the remaining 29 documents
/// carry three cyclically spread topics each. Six users with thresholds
/// 2-3 give a mix of half-times across the doubling rounds.
pub fn reference_instance() -> Instance {
    let n_topics = 20;
    let mut docs: Vec<Vec<usize>> = vec![
        (0..8).collect(),
        (8..16).collect(),
        vec![16, 17, 18, 19, 0],
    ];
    for i in 3..32 {
        docs.push(vec![(2 * i) % 20, (2 * i + 1) % 20, (2 * i + 5) % 20]);
    }
    let users = vec![
        (vec![0, 1, 2, 3], 2),
        (vec![4, 5, 6, 7, 8], 3),
        (vec![9, 10, 11], 2),
        (vec![12, 13, 14, 15, 16], 3),
        (vec![17, 18, 19, 0, 1], 2),
        (vec![2, 5, 8, 11, 14, 17], 3),
    ];
    Instance::from_indexed(n_topics, docs, users)
}
