//! Randomized rounding of the fractional relaxation.
//!
//! `ceil(log2 n) + 1` doubling rounds. Round `k` looks at the prefix
//! mass `z*_{s,t}` for `t = min(2^k, n)`: topics whose scaled coverage
//! reaches 1 form the nearly-covered set `P_k`, which is handed to the
//! certified set-cover oracle (`H_k`); every other document enters `G_k`
//! independently with probability `min(1, scale * z*_st)`. A round whose
//! selection exceeds `(overflow_base + rho_k) * 2^k` documents is
//! discarded ("overflowed"). The final round has `z*_{s,n} = 1`, so it
//! never overflows and every document gets emitted.
//!
//! Everything is deterministic given the config: trial `i`, round `k`
//! draws from a counter-derived stream of `(seed, i, k)`, and samples
//! are drawn in document index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    complete_ranking_indices, evaluate, CoverageState, DocIdx, Instance, ModelError, Ranking,
    TopicSet,
};
use crate::relaxation::{topic_coverage, FractionalSolution};
use crate::scalar::Scalar;
use crate::setcover::{auto_cover, CoverError, CoverInstance, CoverResult, Strategy};

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("set cover failed on the nearly-covered topics: {0}")]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Order in which a round's selection is emitted into the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WithinRoundOrder {
    /// Instance index order (covered by the analysis).
    #[default]
    Index,
    /// Experimental: order a round's documents by marginal coverage;
    /// reported but not covered by the guarantee.
    Greedy,
}

/// Rounding parameters. The defaults `scale = 50` and
/// `overflow_base = 70` are the analysis constants.
#[derive(Debug, Clone, Copy)]
pub struct RoundingConfig<S> {
    pub scale: S,
    pub overflow_base: S,
    pub trials: usize,
    pub rng_seed: u64,
    pub strategy: Strategy,
    pub within_round_order: WithinRoundOrder,
}

impl<S: Scalar> Default for RoundingConfig<S> {
    fn default() -> Self {
        RoundingConfig {
            scale: S::from_f64_lossy(50.0),
            overflow_base: S::from_f64_lossy(70.0),
            trials: 10,
            rng_seed: 0,
            strategy: Strategy::Auto,
            within_round_order: WithinRoundOrder::Index,
        }
    }
}

/// Everything one round did.
#[derive(Debug, Clone)]
pub struct RoundLog<S> {
    pub k: usize,
    /// Clamped time `min(2^k, n)`.
    pub t: usize,
    /// Nearly-covered topics `P_k`.
    pub p_topics: TopicSet,
    /// Set-cover solution for `P_k` with its certificate.
    pub cover: CoverResult<S>,
    /// Independently sampled documents (disjoint from the cover).
    pub g_docs: Vec<DocIdx>,
    pub overflowed: bool,
    /// Overflow threshold `(overflow_base + rho_k) * 2^k`.
    pub threshold: S,
    /// Deterministic certificate check `|H_k| <= rho_k * 2^k`.
    pub h_cert_ok: bool,
}

impl<S: Scalar> RoundLog<S> {
    /// Documents this round contributes to the ranking (empty when
    /// overflowed).
    pub fn selection(&self) -> Vec<DocIdx> {
        if self.overflowed {
            return Vec::new();
        }
        let mut sel = self.cover.chosen.clone();
        sel.extend_from_slice(&self.g_docs);
        sel
    }

    /// One-line record: `round k=.. t=.. P=.. H=.. rho=.. G=.. overflow=..`.
    pub fn line(&self) -> String {
        format!(
            "round k={} t={} P={} H={} rho={:.4} G={} overflow={}",
            self.k,
            self.t,
            self.p_topics.count(),
            self.cover.chosen.len(),
            self.cover.certified_rho.to_f64_lossy(),
            self.g_docs.len(),
            self.overflowed
        )
    }
}

/// `ceil(log2 n)`, with `n = 1` giving 0.
pub fn max_round(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-derived stream seed for (seed, trial, round): reproducible
/// per round regardless of sampling order elsewhere.
pub fn sub_seed(seed: u64, trial: u64, k: u64) -> u64 {
    let a = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    let b = splitmix64(a ^ trial);
    splitmix64(b ^ k)
}

/// Run round `k` against the fractional prefix mass `z[s][t-1]`.
pub fn run_round<S: Scalar>(
    instance: &Instance,
    z: &[Vec<S>],
    k: usize,
    rng: &mut ChaCha8Rng,
    config: &RoundingConfig<S>,
) -> Result<RoundLog<S>, RoundingError> {
    let n = instance.n_docs();
    let two_k = 1usize << k;
    let t = two_k.min(n);
    let z_at_t: Vec<S> = z.iter().map(|zs| zs[t - 1]).collect();
    let cov = topic_coverage(instance.all_doc_topics(), instance.n_topics(), &z_at_t);
    let mut p_topics = TopicSet::empty(instance.n_topics());
    for (e, &c) in cov.iter().enumerate() {
        if config.scale * c >= S::one() {
            p_topics.insert(e);
        }
    }
    let cover = auto_cover(
        &CoverInstance::new(p_topics.clone(), instance.all_doc_topics()),
        config.strategy,
    )?;
    let mut in_h = vec![false; n];
    for &s in &cover.chosen {
        in_h[s] = true;
    }
    let mut g_docs = Vec::new();
    for (s, &z_st) in z_at_t.iter().enumerate() {
        if in_h[s] {
            continue;
        }
        let p = (config.scale * z_st).min(S::one()).to_f64_lossy();
        if rng.gen::<f64>() < p {
            g_docs.push(s);
        }
    }
    let two_k_s = S::from_usize_lossy(two_k);
    let threshold = (config.overflow_base + cover.certified_rho) * two_k_s;
    let selected = S::from_usize_lossy(cover.chosen.len() + g_docs.len());
    let overflowed = selected > threshold;
    let h_cert_ok = S::from_usize_lossy(cover.chosen.len())
        <= cover.certified_rho * two_k_s + S::FEAS_TOL;
    Ok(RoundLog {
        k,
        t,
        p_topics,
        cover,
        g_docs,
        overflowed,
        threshold,
        h_cert_ok,
    })
}

/// Expected `|G_k|` for a round: `sum_{s not in H} min(1, scale*z_st)`.
/// Used by the statistical acceptance checks.
pub fn expected_g_size<S: Scalar>(z_at_t: &[S], in_h: &[bool], scale: S) -> S {
    z_at_t
        .iter()
        .zip(in_h)
        .filter(|(_, &h)| !h)
        .map(|(&z, _)| (scale * z).min(S::one()))
        .sum()
}

/// Expand one round's selection into completion rounds according to the
/// within-round order flag.
fn ordered_rounds<S: Scalar>(
    instance: &Instance,
    logs: &[RoundLog<S>],
    order: WithinRoundOrder,
) -> Vec<Vec<DocIdx>> {
    match order {
        WithinRoundOrder::Index => logs.iter().map(|l| l.selection()).collect(),
        WithinRoundOrder::Greedy => {
            // Singleton sub-rounds in marginal-coverage order; the
            // completion then preserves this order.
            let mut state = CoverageState::new(instance);
            let mut seen = vec![false; instance.n_docs()];
            let mut out = Vec::new();
            for log in logs {
                let mut pending: Vec<DocIdx> = log
                    .selection()
                    .into_iter()
                    .filter(|&s| !seen[s])
                    .collect();
                while !pending.is_empty() {
                    let (pos, &best) = pending
                        .iter()
                        .enumerate()
                        .max_by_key(|(_, &s)| {
                            let fresh = instance.doc_topics(s).difference(state.covered());
                            (fresh.count(), std::cmp::Reverse(s))
                        })
                        .unwrap();
                    pending.remove(pos);
                    seen[best] = true;
                    state.add_doc(instance, best);
                    out.push(vec![best]);
                }
            }
            out
        }
    }
}

/// One full trial: all rounds, completion into a permutation, and
/// evaluation.
pub fn round_solution<S: Scalar>(
    instance: &Instance,
    fractional: &FractionalSolution<S>,
    trial: u64,
    config: &RoundingConfig<S>,
) -> Result<(Ranking, Vec<RoundLog<S>>), RoundingError> {
    let n = instance.n_docs();
    let mut logs = Vec::new();
    for k in 0..=max_round(n) {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(config.rng_seed, trial, k as u64));
        logs.push(run_round(instance, &fractional.z, k, &mut rng, config)?);
    }
    let rounds = ordered_rounds(instance, &logs, config.within_round_order);
    let order = complete_ranking_indices(n, &rounds)?;
    let ranking = evaluate(instance, &order)?;
    Ok((ranking, logs))
}

/// One trial's outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome<S> {
    pub ranking: Ranking,
    pub logs: Vec<RoundLog<S>>,
}

/// Best-of-trials result with per-trial records for reporting.
#[derive(Debug, Clone)]
pub struct BestOfResult<S> {
    pub best: Ranking,
    pub best_trial: usize,
    pub trial_costs: Vec<u64>,
    pub trials: Vec<TrialOutcome<S>>,
}

/// Run `config.trials` independent trials and keep the cheapest ranking
/// (lowest trial index wins ties).
pub fn best_of<S: Scalar>(
    instance: &Instance,
    fractional: &FractionalSolution<S>,
    config: &RoundingConfig<S>,
) -> Result<BestOfResult<S>, RoundingError> {
    assert!(config.trials >= 1, "at least one trial");
    let mut trials = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let (ranking, logs) = round_solution(instance, fractional, trial as u64, config)?;
        trials.push(TrialOutcome { ranking, logs });
    }
    let trial_costs: Vec<u64> = trials.iter().map(|t| t.ranking.total_cost).collect();
    let best_trial = trial_costs
        .iter()
        .enumerate()
        .min_by_key(|(i, &c)| (c, *i))
        .map(|(i, _)| i)
        .unwrap();
    Ok(BestOfResult {
        best: trials[best_trial].ranking.clone(),
        best_trial,
        trial_costs,
        trials,
    })
}
