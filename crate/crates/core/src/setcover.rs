//! Integral set covers with certified ratios against the cover LP.
//!
//! Given a target topic subset `F`, each strategy returns a document set
//! covering `F` together with `certified_rho`, a proven bound on
//! `|H| / lp_value` for that run. The rounding scheme consumes the
//! per-round certificate: it sizes the overflow threshold and the final
//! approximation factor.
//!
//! Strategies: greedy (harmonic-number certificate via dual fitting),
//! primal-dual style LP threshold rounding (frequency certificate),
//! exact branch and bound (test oracle), the disjoint special case
//! (certificate 1), and an auto mode that picks the best available
//! certificate. VC-dimension and geometric covers are named extension
//! slots without implementations.

use thiserror::Error;

use crate::lp::{self, Cmp, LinearProgram, LpStatus, RowSpec, SolveOptions};
use crate::model::{DocIdx, TopicIdx, TopicSet};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CoverError {
    #[error("topic {0} is not covered by any document")]
    InfeasibleTopic(TopicIdx),
    #[error("exact cover limited to {cap} documents, instance has {actual}")]
    SizeCapExceeded { cap: usize, actual: usize },
    #[error("strategy {0:?} not available")]
    StrategyNotAvailable(Strategy),
    #[error("disjoint strategy requires pairwise disjoint restricted sets")]
    NotDisjoint,
    #[error("cover LP solve failed with status {0:?}")]
    LpFailure(LpStatus),
    #[error("internal certificate check failed: |H|={size} > rho={rho} * lp={lp}")]
    CertificateBreach { size: usize, rho: f64, lp: f64 },
}

/// Set-cover strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    PrimalDual,
    Exact,
    Disjoint,
    Auto,
    /// Extension slot, not implemented.
    VcDimension,
    /// Extension slot, not implemented.
    Geometric,
}

impl Strategy {
    pub fn parse(name: &str) -> Option<Strategy> {
        match name {
            "greedy" => Some(Strategy::Greedy),
            "primal-dual" => Some(Strategy::PrimalDual),
            "exact" => Some(Strategy::Exact),
            "disjoint" => Some(Strategy::Disjoint),
            "auto" => Some(Strategy::Auto),
            "vc-dimension" => Some(Strategy::VcDimension),
            "geometric" => Some(Strategy::Geometric),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::PrimalDual => "primal-dual",
            Strategy::Exact => "exact",
            Strategy::Disjoint => "disjoint",
            Strategy::Auto => "auto",
            Strategy::VcDimension => "vc-dimension",
            Strategy::Geometric => "geometric",
        }
    }
}

/// A set-cover instance: target topics and the documents' topic sets.
#[derive(Debug, Clone)]
pub struct CoverInstance<'a> {
    pub targets: TopicSet,
    pub sets: &'a [TopicSet],
}

impl<'a> CoverInstance<'a> {
    pub fn new(targets: TopicSet, sets: &'a [TopicSet]) -> Self {
        CoverInstance { targets, sets }
    }

    fn check_feasible(&self) -> Result<(), CoverError> {
        let mut covered = self.targets.difference(&self.targets);
        for s in self.sets {
            covered.union_with(s);
        }
        for e in self.targets.iter() {
            if !covered.contains(e) {
                return Err(CoverError::InfeasibleTopic(e));
            }
        }
        Ok(())
    }

    /// Max frequency over target topics: `d = max_e |{s : e in C_s}|`.
    fn max_frequency(&self) -> usize {
        self.targets
            .iter()
            .map(|e| self.sets.iter().filter(|s| s.contains(e)).count())
            .max()
            .unwrap_or(0)
    }

    /// Max number of target topics any one set covers.
    fn max_restricted_size(&self) -> usize {
        self.sets
            .iter()
            .map(|s| s.intersection_count(&self.targets))
            .max()
            .unwrap_or(0)
    }

    fn restricted_sets_disjoint(&self) -> bool {
        let restricted: Vec<TopicSet> = self
            .sets
            .iter()
            .map(|s| s.intersection(&self.targets))
            .collect();
        for i in 0..restricted.len() {
            for j in i + 1..restricted.len() {
                if !restricted[i].is_disjoint(&restricted[j]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Cover plus its certificate.
#[derive(Debug, Clone)]
pub struct CoverResult<S> {
    /// Chosen documents, ascending index order.
    pub chosen: Vec<DocIdx>,
    /// Optimum of the cover LP.
    pub lp_value: S,
    /// Certified bound: `|chosen| <= certified_rho * lp_value` (+tol).
    pub certified_rho: S,
    pub strategy: Strategy,
}

fn nth_harmonic<S: Scalar>(n: usize) -> S {
    (1..=n)
        .map(|i| S::one() / S::from_usize_lossy(i))
        .sum()
}

fn verify<S: Scalar>(
    instance: &CoverInstance<'_>,
    result: &CoverResult<S>,
) -> Result<(), CoverError> {
    let mut covered = instance.targets.difference(&instance.targets);
    for &s in &result.chosen {
        covered.union_with(&instance.sets[s]);
    }
    for e in instance.targets.iter() {
        if !covered.contains(e) {
            return Err(CoverError::InfeasibleTopic(e));
        }
    }
    let size = S::from_usize_lossy(result.chosen.len());
    if size > result.certified_rho * result.lp_value + S::FEAS_TOL {
        return Err(CoverError::CertificateBreach {
            size: result.chosen.len(),
            rho: result.certified_rho.to_f64_lossy(),
            lp: result.lp_value.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Optimum of `minimize sum x_s  s.t.  sum_{s: e in C_s} x_s >= 1` for
/// every target topic, `x >= 0` (unbounded above).
pub fn cover_lp_value<S: Scalar>(instance: &CoverInstance<'_>) -> Result<S, CoverError> {
    instance.check_feasible()?;
    if instance.targets.is_empty() {
        return Ok(S::zero());
    }
    let mut lp = LinearProgram::<S>::new();
    let vars: Vec<_> = (0..instance.sets.len())
        .map(|_| lp.add_var(S::one(), S::zero(), S::infinity()).unwrap())
        .collect();
    for e in instance.targets.iter() {
        let coeffs: Vec<_> = instance
            .sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(e))
            .map(|(i, _)| (vars[i], S::one()))
            .collect();
        lp.add_row(RowSpec::new(coeffs, Cmp::Ge, S::one())).unwrap();
    }
    let sol = lp::solve(&lp, &SolveOptions::default());
    if sol.status != LpStatus::Optimal {
        return Err(CoverError::LpFailure(sol.status));
    }
    Ok(sol.objective)
}

fn cover_lp_solution<S: Scalar>(
    instance: &CoverInstance<'_>,
) -> Result<(Vec<S>, S), CoverError> {
    instance.check_feasible()?;
    if instance.targets.is_empty() {
        return Ok((vec![S::zero(); instance.sets.len()], S::zero()));
    }
    let mut lp = LinearProgram::<S>::new();
    for _ in 0..instance.sets.len() {
        lp.add_var(S::one(), S::zero(), S::infinity()).unwrap();
    }
    for e in instance.targets.iter() {
        let coeffs: Vec<_> = instance
            .sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(e))
            .map(|(i, _)| (i, S::one()))
            .collect();
        lp.add_row(RowSpec::new(coeffs, Cmp::Ge, S::one())).unwrap();
    }
    let sol = lp::solve(&lp, &SolveOptions::default());
    if sol.status != LpStatus::Optimal {
        return Err(CoverError::LpFailure(sol.status));
    }
    Ok((sol.values, sol.objective))
}

/// Greedy cover: repeatedly pick the set covering the most uncovered
/// targets (ties to the lowest index). The harmonic-number certificate
/// `H(max_s |C_s ∩ F|)` is valid against the fractional optimum.
pub fn greedy_cover<S: Scalar>(
    instance: &CoverInstance<'_>,
) -> Result<CoverResult<S>, CoverError> {
    let lp_value = cover_lp_value::<S>(instance)?;
    let mut uncovered = instance.targets.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let mut best = 0usize;
        let mut best_gain = 0usize;
        for (i, s) in instance.sets.iter().enumerate() {
            let gain = s.intersection_count(&uncovered);
            if gain > best_gain {
                best_gain = gain;
                best = i;
            }
        }
        debug_assert!(best_gain > 0, "feasibility checked above");
        chosen.push(best);
        uncovered = uncovered.difference(&instance.sets[best]);
    }
    chosen.sort_unstable();
    let rho = nth_harmonic::<S>(instance.max_restricted_size()).max(S::one());
    let result = CoverResult {
        chosen,
        lp_value,
        certified_rho: rho,
        strategy: Strategy::Greedy,
    };
    verify(instance, &result)?;
    Ok(result)
}

/// LP threshold rounding: solve the cover LP and keep every set with
/// `x_s >= 1/d`, where `d` is the max frequency of a target topic.
/// Certificate is `d`.
pub fn primal_dual_cover<S: Scalar>(
    instance: &CoverInstance<'_>,
) -> Result<CoverResult<S>, CoverError> {
    let (values, lp_value) = cover_lp_solution::<S>(instance)?;
    let d = instance.max_frequency();
    let mut chosen = Vec::new();
    if d > 0 {
        let threshold = S::one() / S::from_usize_lossy(d) - S::FEAS_TOL;
        for (i, &x) in values.iter().enumerate() {
            if x >= threshold {
                chosen.push(i);
            }
        }
    }
    let result = CoverResult {
        chosen,
        lp_value,
        certified_rho: S::from_usize_lossy(d).max(S::one()),
        strategy: Strategy::PrimalDual,
    };
    verify(instance, &result)?;
    Ok(result)
}

/// Optimal integral cover by branch and bound; the certificate is the
/// realized ratio `|H| / lp_value`. Test oracle, capped instance size.
pub fn exact_cover<S: Scalar>(
    instance: &CoverInstance<'_>,
    size_cap: usize,
) -> Result<CoverResult<S>, CoverError> {
    if instance.sets.len() > size_cap {
        return Err(CoverError::SizeCapExceeded {
            cap: size_cap,
            actual: instance.sets.len(),
        });
    }
    let lp_value = cover_lp_value::<S>(instance)?;
    let mut best: Option<Vec<DocIdx>> = None;
    let mut current = Vec::new();
    search_exact(instance, 0, &instance.targets, &mut current, &mut best);
    let chosen = best.unwrap_or_default();
    let rho = if chosen.is_empty() || lp_value <= S::FEAS_TOL {
        S::one()
    } else {
        S::from_usize_lossy(chosen.len()) / lp_value
    };
    let result = CoverResult {
        chosen,
        lp_value,
        certified_rho: rho,
        strategy: Strategy::Exact,
    };
    verify(instance, &result)?;
    Ok(result)
}

fn search_exact(
    instance: &CoverInstance<'_>,
    next: usize,
    uncovered: &TopicSet,
    current: &mut Vec<DocIdx>,
    best: &mut Option<Vec<DocIdx>>,
) {
    if uncovered.is_empty() {
        if best.as_ref().is_none_or(|b| current.len() < b.len()) {
            *best = Some(current.clone());
        }
        return;
    }
    if next >= instance.sets.len() {
        return;
    }
    // Lower bound: remaining targets over the best remaining gain.
    let max_gain = instance.sets[next..]
        .iter()
        .map(|s| s.intersection_count(uncovered))
        .max()
        .unwrap_or(0);
    if max_gain == 0 {
        return;
    }
    let bound = current.len() + uncovered.count().div_ceil(max_gain);
    if let Some(b) = best {
        if bound >= b.len() {
            return;
        }
    }
    // Include `next` first so lexicographically smaller covers win ties.
    if instance.sets[next].intersection_count(uncovered) > 0 {
        current.push(next);
        let remaining = uncovered.difference(&instance.sets[next]);
        search_exact(instance, next + 1, &remaining, current, best);
        current.pop();
    }
    search_exact(instance, next + 1, uncovered, current, best);
}

/// Disjoint special case: when the restricted sets are pairwise
/// disjoint, including the owning set per target is exactly optimal and
/// the LP has no integrality gap, so `certified_rho = 1`.
pub fn disjoint_cover<S: Scalar>(
    instance: &CoverInstance<'_>,
) -> Result<CoverResult<S>, CoverError> {
    instance.check_feasible()?;
    if !instance.restricted_sets_disjoint() {
        return Err(CoverError::NotDisjoint);
    }
    let mut chosen = Vec::new();
    for (i, s) in instance.sets.iter().enumerate() {
        if s.intersection_count(&instance.targets) > 0 {
            chosen.push(i);
        }
    }
    let result = CoverResult {
        lp_value: S::from_usize_lossy(chosen.len()),
        chosen,
        certified_rho: S::one(),
        strategy: Strategy::Disjoint,
    };
    verify(instance, &result)?;
    Ok(result)
}

/// Dispatch on strategy. `Auto` takes the disjoint path when available,
/// otherwise the better of greedy and primal-dual by certified bound.
pub fn auto_cover<S: Scalar>(
    instance: &CoverInstance<'_>,
    strategy: Strategy,
) -> Result<CoverResult<S>, CoverError> {
    match strategy {
        Strategy::Greedy => greedy_cover(instance),
        Strategy::PrimalDual => primal_dual_cover(instance),
        Strategy::Exact => exact_cover(instance, DEFAULT_EXACT_CAP),
        Strategy::Disjoint => disjoint_cover(instance),
        Strategy::VcDimension | Strategy::Geometric => {
            Err(CoverError::StrategyNotAvailable(strategy))
        }
        Strategy::Auto => {
            if instance.restricted_sets_disjoint() {
                return disjoint_cover(instance);
            }
            let greedy = greedy_cover::<S>(instance)?;
            let pd = primal_dual_cover::<S>(instance)?;
            let greedy_bound = greedy.certified_rho * greedy.lp_value;
            let pd_bound = pd.certified_rho * pd.lp_value;
            if pd_bound < greedy_bound {
                Ok(pd)
            } else {
                Ok(greedy)
            }
        }
    }
}

/// Default document cap for the exact branch-and-bound oracle.
pub const DEFAULT_EXACT_CAP: usize = 20;
