//! Ground-truth and comparison rankers: the brute-force oracle, the
//! probability-ranking baseline, and two greedy heuristics.

use thiserror::Error;

use crate::model::{evaluate, CoverageState, DocIdx, Instance, ModelError, Ranking};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("brute force limited to {cap} documents, instance has {actual}")]
    DocCapExceeded { cap: usize, actual: usize },
    #[error("unknown greedy variant {0:?}")]
    UnknownVariant(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default document cap for the exact oracle (9! permutations worst case).
pub const DEFAULT_ORACLE_CAP: usize = 9;

/// Result of the exact search.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub ranking: Ranking,
    /// Search-tree nodes expanded.
    pub nodes: u64,
}

/// Exact optimum by depth-first search over prefixes with
/// branch-and-bound.
///
/// The bound at a prefix is the accumulated cost of satisfied users plus
/// `(depth+1)` for every unsatisfied one, which is admissible. Branches
/// are explored in lexicographic order and pruned at `bound >=
/// incumbent`, so the returned permutation is the lexicographically
/// smallest optimum.
pub fn brute_force(instance: &Instance, doc_cap: usize) -> Result<OracleResult, BaselineError> {
    let n = instance.n_docs();
    if n > doc_cap {
        return Err(BaselineError::DocCapExceeded {
            cap: doc_cap,
            actual: n,
        });
    }
    let mut search = Search {
        instance,
        best_cost: u64::MAX,
        best_order: Vec::new(),
        prefix: Vec::with_capacity(n),
        used: vec![false; n],
        nodes: 0,
    };
    let state = CoverageState::new(instance);
    let satisfied_cost = 0u64;
    let unsatisfied = instance.n_users();
    search.descend(state, satisfied_cost, unsatisfied);
    let ranking = evaluate(instance, &search.best_order)?;
    debug_assert_eq!(ranking.total_cost, search.best_cost);
    Ok(OracleResult {
        ranking,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    instance: &'a Instance,
    best_cost: u64,
    best_order: Vec<DocIdx>,
    prefix: Vec<DocIdx>,
    used: Vec<bool>,
    nodes: u64,
}

impl Search<'_> {
    fn descend(&mut self, state: CoverageState, satisfied_cost: u64, unsatisfied: usize) {
        self.nodes += 1;
        let depth = self.prefix.len();
        let n = self.instance.n_docs();
        if unsatisfied == 0 {
            if satisfied_cost < self.best_cost {
                self.best_cost = satisfied_cost;
                // Complete with the unused documents in index order.
                let mut order = self.prefix.clone();
                order.extend((0..n).filter(|&s| !self.used[s]));
                self.best_order = order;
            }
            return;
        }
        let bound = satisfied_cost + (unsatisfied as u64) * (depth as u64 + 1);
        if bound >= self.best_cost {
            return;
        }
        for s in 0..n {
            if self.used[s] {
                continue;
            }
            let mut next = state.clone();
            next.add_doc(self.instance, s);
            let mut cost = satisfied_cost;
            let mut remaining = unsatisfied;
            for u in 0..self.instance.n_users() {
                if !state.satisfied(self.instance, u) && next.satisfied(self.instance, u) {
                    cost += depth as u64 + 1;
                    remaining -= 1;
                }
            }
            self.used[s] = true;
            self.prefix.push(s);
            self.descend(next, cost, remaining);
            self.prefix.pop();
            self.used[s] = false;
        }
    }
}

/// Probability-ranking baseline: score a document by the number of users
/// it is relevant to (shares at least one interest topic), sort
/// descending with index tie-breaks, and evaluate.
pub fn prp_ranking(instance: &Instance) -> Result<Ranking, BaselineError> {
    let scores: Vec<usize> = (0..instance.n_docs())
        .map(|s| {
            (0..instance.n_users())
                .filter(|&u| {
                    instance
                        .doc_topics(s)
                        .intersection_count(instance.interests(u))
                        > 0
                })
                .count()
        })
        .collect();
    let mut order: Vec<DocIdx> = (0..instance.n_docs()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    Ok(evaluate(instance, &order)?)
}

/// Greedy flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyVariant {
    /// Maximize the number of newly satisfied users; ties by marginal
    /// interest coverage, then index.
    Satisfy,
    /// Maximize the total threshold-capped coverage gain
    /// `sum_u min(K_u, new) - min(K_u, old)`; ties by index.
    Coverage,
}

impl GreedyVariant {
    pub fn parse(name: &str) -> Result<Self, BaselineError> {
        match name {
            "satisfy" => Ok(GreedyVariant::Satisfy),
            "coverage" => Ok(GreedyVariant::Coverage),
            other => Err(BaselineError::UnknownVariant(other.to_string())),
        }
    }
}

/// Greedy ranking: pick documents one at a time by the variant's gain
/// until every user is satisfied, then append the rest in index order.
pub fn greedy_ranking(
    instance: &Instance,
    variant: GreedyVariant,
) -> Result<Ranking, BaselineError> {
    let n = instance.n_docs();
    let n_users = instance.n_users();
    let mut order: Vec<DocIdx> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut state = CoverageState::new(instance);
    let mut unsatisfied: usize = (0..n_users)
        .filter(|&u| !state.satisfied(instance, u))
        .count();

    while unsatisfied > 0 {
        let mut best: Option<(DocIdx, u64, u64)> = None; // doc, primary, secondary
        for s in 0..n {
            if used[s] {
                continue;
            }
            let mut newly_satisfied = 0u64;
            let mut capped_gain = 0u64;
            let mut raw_gain = 0u64;
            let fresh = instance.doc_topics(s).difference(state.covered());
            for u in 0..n_users {
                let add = fresh.intersection_count(instance.interests(u));
                if add == 0 {
                    continue;
                }
                let k = instance.threshold(u);
                let old = state.user_count(u);
                raw_gain += add as u64;
                capped_gain += (k.min(old + add) - k.min(old)) as u64;
                if old < k && old + add >= k {
                    newly_satisfied += 1;
                }
            }
            let (primary, secondary) = match variant {
                GreedyVariant::Satisfy => (newly_satisfied, raw_gain),
                GreedyVariant::Coverage => (capped_gain, 0),
            };
            let better = match best {
                None => true,
                Some((_, bp, bs)) => primary > bp || (primary == bp && secondary > bs),
            };
            if better {
                best = Some((s, primary, secondary));
            }
        }
        let Some((s, primary, _)) = best else { break };
        if primary == 0 && variant == GreedyVariant::Coverage {
            break;
        }
        used[s] = true;
        order.push(s);
        state.add_doc(instance, s);
        unsatisfied = (0..n_users)
            .filter(|&u| !state.satisfied(instance, u))
            .count();
    }
    order.extend((0..n).filter(|&s| !used[s]));
    Ok(evaluate(instance, &order)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance::from_indexed(
            2,
            vec![vec![0], vec![1], vec![0, 1]],
            vec![(vec![0, 1], 2), (vec![0], 1)],
        )
    }

    /// Example-1 shape: nine documents on one topic satisfying 100
    /// users, one document on another topic satisfying 50.
    fn example1() -> Instance {
        let mut docs: Vec<Vec<usize>> = (0..9).map(|_| vec![0]).collect();
        docs.push(vec![1]);
        let mut users: Vec<(Vec<usize>, usize)> = (0..100).map(|_| (vec![0], 1)).collect();
        users.extend((0..50).map(|_| (vec![1], 1)));
        Instance::from_indexed(2, docs, users)
    }

    #[test]
    fn oracle_tiny() {
        let r = brute_force(&tiny(), 9).unwrap();
        assert_eq!(r.ranking.total_cost, 2);
        assert_eq!(r.ranking.order[0], 2);
    }

    #[test]
    fn oracle_single_doc() {
        let inst = Instance::from_indexed(1, vec![vec![0]], vec![(vec![0], 1), (vec![0], 1)]);
        let r = brute_force(&inst, 9).unwrap();
        assert_eq!(r.ranking.total_cost, 2);
    }

    #[test]
    fn oracle_cap() {
        let inst = example1();
        assert!(matches!(
            brute_force(&inst, 9),
            Err(BaselineError::DocCapExceeded { cap: 9, actual: 10 })
        ));
    }

    #[test]
    fn oracle_example1_is_200() {
        let r = brute_force(&example1(), 10).unwrap();
        assert_eq!(r.ranking.total_cost, 200);
    }

    #[test]
    fn prp_example1_is_600() {
        let r = prp_ranking(&example1()).unwrap();
        assert_eq!(r.order, (0..10).collect::<Vec<_>>());
        assert_eq!(r.total_cost, 100 + 50 * 10);
    }

    #[test]
    fn prp_all_relevant_keeps_index_order() {
        let inst = Instance::from_indexed(1, vec![vec![0], vec![0]], vec![(vec![0], 1)]);
        let r = prp_ranking(&inst).unwrap();
        assert_eq!(r.order, vec![0, 1]);
    }

    #[test]
    fn prp_tiny_order_and_cost() {
        // scores: s1 -> 2, s2 -> 1, s3 -> 2; ties by index.
        let r = prp_ranking(&tiny()).unwrap();
        assert_eq!(r.order, vec![0, 2, 1]);
        assert_eq!(r.total_cost, 3);
    }

    #[test]
    fn greedy_satisfy_example1() {
        let r = greedy_ranking(&example1(), GreedyVariant::Satisfy).unwrap();
        assert_eq!(r.total_cost, 200);
    }

    #[test]
    fn greedy_coverage_tiny_picks_s3() {
        let r = greedy_ranking(&tiny(), GreedyVariant::Coverage).unwrap();
        assert_eq!(r.order[0], 2);
        assert_eq!(r.total_cost, 2);
    }

    #[test]
    fn greedy_trivial_all_satisfiable() {
        let inst = Instance::from_indexed(1, vec![vec![0], vec![0]], vec![(vec![0], 1)]);
        let r = greedy_ranking(&inst, GreedyVariant::Satisfy).unwrap();
        assert_eq!(r.order, vec![0, 1]);
        assert_eq!(r.total_cost, 1);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(GreedyVariant::parse("satisfy").unwrap(), GreedyVariant::Satisfy);
        assert_eq!(GreedyVariant::parse("coverage").unwrap(), GreedyVariant::Coverage);
        assert!(matches!(
            GreedyVariant::parse("other"),
            Err(BaselineError::UnknownVariant(_))
        ));
    }
}
