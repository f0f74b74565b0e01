//! Instance generators for benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use rdc_core::Instance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown generator kind {0:?}")]
    UnknownKind(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// Independent topic sampling with coverage repair.
    Random,
    /// Topics partitioned among documents.
    Disjoint,
    /// Every topic appears in at most `max_frequency` documents.
    FreqBounded,
    /// The fixed two-class instance: nine interchangeable documents for
    /// 100 users, one niche document for 50.
    Example1,
}

impl GenKind {
    pub fn parse(name: &str) -> Result<GenKind, GenError> {
        match name {
            "random" => Ok(GenKind::Random),
            "disjoint" => Ok(GenKind::Disjoint),
            "freq-bounded" => Ok(GenKind::FreqBounded),
            "example1" => Ok(GenKind::Example1),
            other => Err(GenError::UnknownKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GenKind::Random => "random",
            GenKind::Disjoint => "disjoint",
            GenKind::FreqBounded => "freq-bounded",
            GenKind::Example1 => "example1",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub docs: usize,
    pub topics: usize,
    pub users: usize,
    /// Probability a topic lands in a document (random / freq-bounded).
    pub doc_density: f64,
    /// Probability a topic lands in an interest set.
    pub user_density: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// `d` for the freq-bounded kind.
    pub max_frequency: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            docs: 8,
            topics: 10,
            users: 5,
            doc_density: 0.3,
            user_density: 0.4,
            k_min: 1,
            k_max: 3,
            max_frequency: 2,
        }
    }
}

pub fn generate(kind: GenKind, params: &GenParams, seed: u64) -> Result<Instance, GenError> {
    match kind {
        GenKind::Example1 => Ok(example1()),
        GenKind::Random => {
            check_counts(params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let docs = sample_docs(&mut rng, params, None);
            Ok(Instance::from_indexed(
                params.topics,
                docs,
                sample_users(&mut rng, params),
            ))
        }
        GenKind::Disjoint => {
            check_counts(params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Deal shuffled topics round-robin: each topic lands in
            // exactly one document.
            let mut topics: Vec<usize> = (0..params.topics).collect();
            for i in (1..topics.len()).rev() {
                let j = rng.gen_range(0..=i);
                topics.swap(i, j);
            }
            let mut docs: Vec<Vec<usize>> = vec![Vec::new(); params.docs];
            for (i, e) in topics.into_iter().enumerate() {
                docs[i % params.docs].push(e);
            }
            Ok(Instance::from_indexed(
                params.topics,
                docs,
                sample_users(&mut rng, params),
            ))
        }
        GenKind::FreqBounded => {
            check_counts(params)?;
            if params.max_frequency < 1 {
                return Err(GenError::Infeasible("max frequency must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let docs = sample_docs(&mut rng, params, Some(params.max_frequency));
            let inst = Instance::from_indexed(params.topics, docs, sample_users(&mut rng, params));
            debug_assert!(
                (0..inst.n_topics()).all(|e| {
                    (0..inst.n_docs())
                        .filter(|&s| inst.doc_topics(s).contains(e))
                        .count()
                        <= params.max_frequency
                }),
                "frequency bound violated by construction"
            );
            Ok(inst)
        }
    }
}

fn check_counts(params: &GenParams) -> Result<(), GenError> {
    if params.docs == 0 || params.topics == 0 {
        return Err(GenError::Infeasible(
            "need at least one document and one topic".into(),
        ));
    }
    if params.k_min < 1 || params.k_min > params.k_max {
        return Err(GenError::Infeasible("bad threshold range".into()));
    }
    Ok(())
}

fn sample_docs(
    rng: &mut ChaCha8Rng,
    params: &GenParams,
    max_frequency: Option<usize>,
) -> Vec<Vec<usize>> {
    let mut counts = vec![0usize; params.topics];
    let mut docs: Vec<Vec<usize>> = (0..params.docs)
        .map(|_| {
            (0..params.topics)
                .filter(|&e| {
                    let room = max_frequency.is_none_or(|d| counts[e] < d);
                    if room && rng.gen_bool(params.doc_density) {
                        counts[e] += 1;
                        true
                    } else {
                        false
                    }
                })
                .collect()
        })
        .collect();
    // Repair uncovered topics.
    for e in 0..params.topics {
        if counts[e] == 0 {
            let s = rng.gen_range(0..params.docs);
            docs[s].push(e);
            counts[e] = 1;
        }
    }
    docs
}

fn sample_users(rng: &mut ChaCha8Rng, params: &GenParams) -> Vec<(Vec<usize>, usize)> {
    (0..params.users)
        .map(|_| {
            let mut interests: Vec<usize> = (0..params.topics)
                .filter(|_| rng.gen_bool(params.user_density))
                .collect();
            if interests.is_empty() {
                interests.push(rng.gen_range(0..params.topics));
            }
            let hi = params.k_max.min(interests.len()).max(1);
            let lo = params.k_min.min(hi);
            let k = rng.gen_range(lo..=hi);
            (interests, k)
        })
        .collect()
}

/// The fixed example1 instance: topics `eA`, `eB`; documents `s1..s9`
/// on `eA` and `s10` on `eB`; 100 users wanting `eA`, 50 wanting `eB`.
pub fn example1() -> Instance {
    let mut docs: Vec<Vec<usize>> = (0..9).map(|_| vec![0]).collect();
    docs.push(vec![1]);
    let mut users: Vec<(Vec<usize>, usize)> = (0..100).map(|_| (vec![0], 1)).collect();
    users.extend((0..50).map(|_| (vec![1], 1)));
    Instance::from_indexed(2, docs, users)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_shape() {
        let inst = example1();
        assert_eq!(inst.n_docs(), 10);
        assert_eq!(inst.n_users(), 150);
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn disjoint_partitions_topics() {
        let params = GenParams {
            docs: 5,
            topics: 10,
            ..GenParams::default()
        };
        let inst = generate(GenKind::Disjoint, &params, 3).unwrap();
        for e in 0..inst.n_topics() {
            let owners = (0..inst.n_docs())
                .filter(|&s| inst.doc_topics(s).contains(e))
                .count();
            assert_eq!(owners, 1, "topic {e} in {owners} documents");
        }
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn freq_bound_respected() {
        let params = GenParams {
            docs: 10,
            topics: 8,
            doc_density: 0.8,
            max_frequency: 2,
            ..GenParams::default()
        };
        let inst = generate(GenKind::FreqBounded, &params, 5).unwrap();
        for e in 0..inst.n_topics() {
            let freq = (0..inst.n_docs())
                .filter(|&s| inst.doc_topics(s).contains(e))
                .count();
            assert!(freq <= 2, "topic {e} appears {freq} times");
        }
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn random_instances_are_valid_and_seeded() {
        let params = GenParams::default();
        for seed in 0..20 {
            let inst = generate(GenKind::Random, &params, seed).unwrap();
            assert!(inst.validate().is_empty(), "seed {seed}");
        }
        let a = generate(GenKind::Random, &params, 7).unwrap();
        let b = generate(GenKind::Random, &params, 7).unwrap();
        for s in 0..a.n_docs() {
            assert_eq!(a.doc_topics(s), b.doc_topics(s));
        }
    }

    #[test]
    fn infeasible_parameters_rejected() {
        let params = GenParams {
            docs: 0,
            ..GenParams::default()
        };
        assert!(matches!(
            generate(GenKind::Random, &params, 1),
            Err(GenError::Infeasible(_))
        ));
    }
}
