//! RGC and RXOS generalizations.
//!
//! RGC: each user holds several (interest set, threshold) groups and is
//! satisfied as soon as any one group is. RXOS: each user's valuation is
//! the max of additive weight functions over documents, satisfied when
//! the max reaches 1.
//!
//! Both reuse the schedule core of the relaxation (`x`, `z` and rows
//! (1)-(3)) and add per-group indicator variables `g`. The paper's link
//! `y <= max_i g_i` is not linear; we solve the weaker `y <= sum_i g_i`,
//! which the max form implies for nonnegative `g`, so the reported
//! bound stays a valid lower bound on the integral optimum (the
//! constant-factor story for `p > 1` weakens by up to a factor `p`).
//! Rounding is the core doubling scheme for RGC; RXOS drops the
//! set-cover step and overflows at `overflow_base * 2^k`.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lp::{Cmp, LinearProgram, LpStatus, RowSpec, Solver, SolveOptions};
use crate::model::{
    complete_ranking_indices, DocIdx, Instance, ModelError, Ranking, TopicSet, UserIdx,
};
use crate::relaxation::{
    add_schedule_core, doubling_times, half_time_of, split_t1_t2, topic_coverage, RelaxConfig,
    RelaxError,
};
use crate::rounding::{max_round, run_round, sub_seed, RoundingConfig};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ExtError {
    #[error("instance is invalid: {0:?}")]
    InvalidInstance(Vec<String>),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Rounding(#[from] crate::rounding::RoundingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("LP solve failed with status {0:?}")]
    LpFailed(LpStatus),
    #[error("row generation did not converge within {0} rounds")]
    RowGenerationCap(usize),
}

/// Default cap on groups / additive functions per user.
pub const DEFAULT_GROUP_CAP: usize = 16;

/// Configuration for the extension solvers.
#[derive(Debug, Clone, Copy)]
pub struct ExtConfig<S> {
    pub relax: RelaxConfig<S>,
    pub rounding: RoundingConfig<S>,
    pub group_cap: usize,
}

impl<S: Scalar> Default for ExtConfig<S> {
    fn default() -> Self {
        ExtConfig {
            relax: RelaxConfig::default(),
            rounding: RoundingConfig::default(),
            group_cap: DEFAULT_GROUP_CAP,
        }
    }
}

/// Solver outcome for an extension instance.
#[derive(Debug, Clone)]
pub struct ExtOutcome<S> {
    /// LP lower bound on the integral optimum.
    pub lp_bound: S,
    /// Per-user half-times from the relaxation.
    pub t_star: Vec<usize>,
    pub best: Ranking,
    pub best_trial: usize,
    pub trial_costs: Vec<u64>,
}

// ---------------------------------------------------------------------------
// RGC
// ---------------------------------------------------------------------------

/// Users with several (interest set, threshold) groups over the same
/// document/topic universe.
#[derive(Debug, Clone)]
pub struct GroupInstance {
    topic_ids: Vec<String>,
    doc_ids: Vec<String>,
    doc_topics: Vec<TopicSet>,
    user_ids: Vec<String>,
    groups: Vec<Vec<(TopicSet, usize)>>,
}

impl GroupInstance {
    pub fn new(
        topics: Vec<String>,
        documents: Vec<(String, Vec<String>)>,
        users: Vec<(String, Vec<(Vec<String>, usize)>)>,
    ) -> Result<Self, ModelError> {
        let topic_index: HashMap<&str, usize> = topics
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let n = topics.len();
        let resolve = |names: &[String]| -> Result<TopicSet, ModelError> {
            let mut set = TopicSet::empty(n);
            for name in names {
                match topic_index.get(name.as_str()) {
                    Some(&i) => set.insert(i),
                    None => return Err(ModelError::UnknownTopicId(name.clone())),
                }
            }
            Ok(set)
        };
        let mut doc_ids = Vec::new();
        let mut doc_topics = Vec::new();
        for (id, ts) in &documents {
            doc_ids.push(id.clone());
            doc_topics.push(resolve(ts)?);
        }
        let mut user_ids = Vec::new();
        let mut groups = Vec::new();
        for (id, gs) in &users {
            user_ids.push(id.clone());
            let mut row = Vec::new();
            for (interests, k) in gs {
                row.push((resolve(interests)?, *k));
            }
            groups.push(row);
        }
        Ok(GroupInstance {
            topic_ids: topics,
            doc_ids,
            doc_topics,
            user_ids,
            groups,
        })
    }

    pub fn from_indexed(
        n_topics: usize,
        docs: Vec<Vec<usize>>,
        users: Vec<Vec<(Vec<usize>, usize)>>,
    ) -> Self {
        GroupInstance {
            topic_ids: (1..=n_topics).map(|i| format!("e{i}")).collect(),
            doc_ids: (1..=docs.len()).map(|i| format!("s{i}")).collect(),
            doc_topics: docs
                .iter()
                .map(|d| TopicSet::from_indices(n_topics, d))
                .collect(),
            user_ids: (1..=users.len()).map(|i| format!("u{i}")).collect(),
            groups: users
                .iter()
                .map(|gs| {
                    gs.iter()
                        .map(|(ts, k)| (TopicSet::from_indices(n_topics, ts), *k))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }
    pub fn n_topics(&self) -> usize {
        self.topic_ids.len()
    }
    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }
    pub fn topic_ids(&self) -> &[String] {
        &self.topic_ids
    }
    pub fn groups(&self, u: UserIdx) -> &[(TopicSet, usize)] {
        &self.groups[u]
    }
    pub fn all_doc_topics(&self) -> &[TopicSet] {
        &self.doc_topics
    }

    pub fn validate(&self, group_cap: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut covered = TopicSet::empty(self.n_topics());
        for d in &self.doc_topics {
            covered.union_with(d);
        }
        for (e, id) in self.topic_ids.iter().enumerate() {
            if !covered.contains(e) {
                out.push(format!("topic {id:?} appears in no document"));
            }
        }
        for (u, gs) in self.groups.iter().enumerate() {
            let uid = &self.user_ids[u];
            if gs.is_empty() {
                out.push(format!("user {uid:?} has no groups"));
            }
            if gs.len() > group_cap {
                out.push(format!(
                    "user {uid:?} has {} groups, cap is {group_cap}",
                    gs.len()
                ));
            }
            for (i, (interests, k)) in gs.iter().enumerate() {
                let size = interests.count();
                if *k < 1 || *k > size {
                    out.push(format!(
                        "user {uid:?} group {i}: threshold {k} outside 1..=|I|={size}"
                    ));
                }
            }
        }
        out
    }

    /// Reduce to a plain RDC instance when every user has exactly one
    /// group.
    pub fn as_rdc(&self) -> Option<Instance> {
        if self.groups.iter().any(|g| g.len() != 1) {
            return None;
        }
        let users = self
            .groups
            .iter()
            .zip(&self.user_ids)
            .map(|(g, id)| {
                let (interests, k) = &g[0];
                let names: Vec<String> = interests
                    .iter()
                    .map(|e| self.topic_ids[e].clone())
                    .collect();
                (id.clone(), names, *k)
            })
            .collect();
        Instance::new(
            self.topic_ids.clone(),
            self.doc_ids
                .iter()
                .zip(&self.doc_topics)
                .map(|(id, ts)| {
                    (
                        id.clone(),
                        ts.iter().map(|e| self.topic_ids[e].clone()).collect(),
                    )
                })
                .collect(),
            users,
        )
        .ok()
    }

    /// The documents alone as an RDC instance (no users); used to drive
    /// the shared rounding scheme.
    fn docs_only(&self) -> Instance {
        Instance::new(
            self.topic_ids.clone(),
            self.doc_ids
                .iter()
                .zip(&self.doc_topics)
                .map(|(id, ts)| {
                    (
                        id.clone(),
                        ts.iter().map(|e| self.topic_ids[e].clone()).collect(),
                    )
                })
                .collect(),
            Vec::new(),
        )
        .expect("document topics already resolved")
    }
}

/// Satisfying times under "any group suffices".
pub fn evaluate_rgc(instance: &GroupInstance, order: &[DocIdx]) -> Result<Ranking, ModelError> {
    let n = instance.n_docs();
    if order.len() != n {
        return Err(ModelError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for &s in order {
        if s >= n || seen[s] {
            return Err(ModelError::NotAPermutation);
        }
        seen[s] = true;
    }
    let mut covered = TopicSet::empty(instance.n_topics());
    let mut times = vec![0usize; instance.n_users()];
    let mut remaining = instance.n_users();
    for (pos, &s) in order.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        covered.union_with(&instance.doc_topics[s]);
        for (u, gs) in instance.groups.iter().enumerate() {
            if times[u] != 0 {
                continue;
            }
            if gs
                .iter()
                .any(|(interests, k)| covered.intersection_count(interests) >= *k)
            {
                times[u] = pos + 1;
                remaining -= 1;
            }
        }
    }
    if let Some(u) = times.iter().position(|&t| t == 0) {
        if instance.n_users() > 0 {
            return Err(ModelError::UnsatisfiableUser(u));
        }
    }
    Ok(Ranking {
        order: order.to_vec(),
        total_cost: times.iter().map(|&t| t as u64).sum(),
        satisfy_times: times,
    })
}

/// Solve an RGC instance. Single-group instances reduce exactly to RDC
/// and take the core path, so results match the core solver seed for
/// seed; general instances run the grouped LP plus the shared rounding.
pub fn solve_rgc<S: Scalar>(
    instance: &GroupInstance,
    config: &ExtConfig<S>,
) -> Result<ExtOutcome<S>, ExtError> {
    let problems = instance.validate(config.group_cap);
    if !problems.is_empty() {
        return Err(ExtError::InvalidInstance(problems));
    }
    if let Some(rdc) = instance.as_rdc() {
        let fractional = crate::relaxation::solve_relaxation(&rdc, &config.relax)?;
        let best = crate::rounding::best_of(&rdc, &fractional, &config.rounding)?;
        return Ok(ExtOutcome {
            lp_bound: fractional.objective,
            t_star: fractional.t_star,
            best: best.best,
            best_trial: best.best_trial,
            trial_costs: best.trial_costs,
        });
    }
    solve_rgc_general(instance, config)
}

/// The grouped LP path, independent of the p=1 reduction. Public so the
/// reduction consistency can be tested against the core solver.
pub fn solve_rgc_general<S: Scalar>(
    instance: &GroupInstance,
    config: &ExtConfig<S>,
) -> Result<ExtOutcome<S>, ExtError> {
    let n = instance.n_docs();
    let n_users = instance.n_users();
    if n == 0 {
        return Err(ExtError::Relax(RelaxError::EmptyInstance));
    }
    let group_offsets: Vec<usize> = instance
        .groups
        .iter()
        .scan(0usize, |acc, g| {
            let start = *acc;
            *acc += g.len();
            Some(start)
        })
        .collect();
    let mut lp = LinearProgram::<S>::new();
    let (_, z0) = add_schedule_core(&mut lp, n);
    let y0 = lp.n_vars();
    for u in 0..n_users {
        for t in 1..=n {
            lp.add_named_var(format!("y_{u}_{t}"), -S::one(), S::zero(), S::one())
                .unwrap();
        }
    }
    let g0 = lp.n_vars();
    for (u, gs) in instance.groups.iter().enumerate() {
        for i in 0..gs.len() {
            for t in 1..=n {
                lp.add_named_var(format!("g_{u}_{i}_{t}"), S::zero(), S::zero(), S::one())
                    .unwrap();
            }
        }
    }
    lp.set_objective_offset(S::from_usize_lossy(n_users * n));
    let z = |s: usize, t: usize| z0 + s * n + (t - 1);
    let y = |u: usize, t: usize| y0 + u * n + (t - 1);
    let g = |u: usize, i: usize, t: usize| g0 + (group_offsets[u] + i) * n + (t - 1);

    for u in 0..n_users {
        let p = instance.groups[u].len();
        for t in 1..=n {
            // y <= sum_i g (sum relaxation of the max link)
            let mut coeffs = vec![(y(u, t), S::one())];
            for i in 0..p {
                coeffs.push((g(u, i, t), -S::one()));
            }
            lp.add_row(RowSpec::new(coeffs, Cmp::Le, S::zero())).unwrap();
            if t < n {
                lp.add_row(RowSpec::new(
                    vec![(y(u, t), S::one()), (y(u, t + 1), -S::one())],
                    Cmp::Le,
                    S::zero(),
                ))
                .unwrap();
                for i in 0..p {
                    lp.add_row(RowSpec::new(
                        vec![(g(u, i, t), S::one()), (g(u, i, t + 1), -S::one())],
                        Cmp::Le,
                        S::zero(),
                    ))
                    .unwrap();
                }
            }
        }
    }

    let opts = SolveOptions {
        tolerance: config.relax.eps_feas,
        iteration_cap: config.relax.iteration_cap,
    };
    let mut solver = Solver::new(&lp, &opts);
    let times = doubling_times(n);
    let mut known: HashSet<(usize, usize, usize, TopicSet)> = HashSet::new();
    let mut rounds = 0usize;
    let (y_rows, z_rows) = loop {
        match solver.optimize() {
            LpStatus::Optimal => {}
            status => return Err(ExtError::LpFailed(status)),
        }
        rounds += 1;
        let z_rows: Vec<Vec<S>> = (0..n)
            .map(|s| (1..=n).map(|t| solver.value(z(s, t))).collect())
            .collect();
        let mut violated: Vec<(usize, usize, usize, TopicSet, RowSpec<S>, S)> = Vec::new();
        for &t in &times {
            let z_at_t: Vec<S> = z_rows.iter().map(|zs| zs[t - 1]).collect();
            let cov = topic_coverage(&instance.doc_topics, instance.n_topics(), &z_at_t);
            let mut nearly = TopicSet::empty(instance.n_topics());
            for (e, &c) in cov.iter().enumerate() {
                if config.relax.scale * c >= S::one() {
                    nearly.insert(e);
                }
            }
            for (u, gs) in instance.groups.iter().enumerate() {
                for (i, (interests, threshold)) in gs.iter().enumerate() {
                    let g_val = solver.value(g(u, i, t));
                    let mut candidates: Vec<TopicSet> = Vec::new();
                    let paper_f = nearly.intersection(interests);
                    if paper_f.count() < *threshold {
                        candidates.push(paper_f);
                    }
                    let mut ranked: Vec<usize> = interests.iter().collect();
                    ranked.sort_by(|&a, &b| {
                        cov[b].partial_cmp(&cov[a]).unwrap().then(a.cmp(&b))
                    });
                    for j in 0..(*threshold).min(ranked.len() + 1) {
                        candidates
                            .push(TopicSet::from_indices(instance.n_topics(), &ranked[..j]));
                    }
                    for fixed in candidates {
                        let key = (u, i, t, fixed.clone());
                        if known.contains(&key) {
                            continue;
                        }
                        let need = threshold - fixed.count();
                        if need == 0 || !fixed.is_subset(interests) {
                            continue;
                        }
                        let remaining = interests.difference(&fixed);
                        let (t1, t2) = split_t1_t2(&instance.doc_topics, &remaining, need);
                        let need_s = S::from_usize_lossy(need);
                        let mut lhs = need_s * g_val;
                        for &s in &t1 {
                            lhs -= need_s * z_at_t[s];
                        }
                        for &(s, c) in &t2 {
                            lhs -= S::from_usize_lossy(c) * z_at_t[s];
                        }
                        if lhs > config.relax.eps_sep {
                            let mut coeffs = vec![(g(u, i, t), need_s)];
                            for &s in &t1 {
                                coeffs.push((z(s, t), -need_s));
                            }
                            for &(s, c) in &t2 {
                                coeffs.push((z(s, t), -S::from_usize_lossy(c)));
                            }
                            violated.push((
                                u,
                                i,
                                t,
                                fixed,
                                RowSpec::new(coeffs, Cmp::Le, S::zero()),
                                lhs,
                            ));
                        }
                    }
                }
            }
        }
        if violated.is_empty() {
            let y_rows: Vec<Vec<S>> = (0..n_users)
                .map(|u| (1..=n).map(|t| solver.value(y(u, t))).collect())
                .collect();
            break (y_rows, z_rows);
        }
        if rounds >= config.relax.max_rounds {
            return Err(ExtError::RowGenerationCap(config.relax.max_rounds));
        }
        violated.sort_by(|a, b| b.5.partial_cmp(&a.5).unwrap());
        let specs: Vec<RowSpec<S>> = violated.iter().map(|v| v.4.clone()).collect();
        solver.add_rows(&specs);
        for (u, i, t, fixed, _, _) in violated {
            known.insert((u, i, t, fixed));
        }
    };

    let mut lp_bound = S::zero();
    for yu in &y_rows {
        for &v in yu {
            lp_bound += S::one() - v;
        }
    }
    let t_star: Vec<usize> = y_rows
        .iter()
        .map(|yu| half_time_of(yu, config.relax.eps_feas))
        .collect();

    // Rounding: identical to the core scheme, evaluated with the group
    // semantics.
    let docs_inst = instance.docs_only();
    let mut trial_costs = Vec::new();
    let mut rankings = Vec::new();
    for trial in 0..config.rounding.trials {
        let mut logs = Vec::new();
        for k in 0..=max_round(n) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(
                config.rounding.rng_seed,
                trial as u64,
                k as u64,
            ));
            logs.push(run_round(&docs_inst, &z_rows, k, &mut rng, &config.rounding)?);
        }
        let selections: Vec<Vec<DocIdx>> = logs.iter().map(|l| l.selection()).collect();
        let order = complete_ranking_indices(n, &selections)?;
        let ranking = evaluate_rgc(instance, &order)?;
        trial_costs.push(ranking.total_cost);
        rankings.push(ranking);
    }
    let best_trial = trial_costs
        .iter()
        .enumerate()
        .min_by_key(|(i, &c)| (c, *i))
        .map(|(i, _)| i)
        .unwrap();
    Ok(ExtOutcome {
        lp_bound,
        t_star,
        best: rankings[best_trial].clone(),
        best_trial,
        trial_costs,
    })
}

// ---------------------------------------------------------------------------
// RXOS
// ---------------------------------------------------------------------------

/// Users valued by the max of additive functions; weights are sparse
/// per document.
#[derive(Debug, Clone)]
pub struct XosInstance<S> {
    doc_ids: Vec<String>,
    user_ids: Vec<String>,
    /// `functions[u][i]` is a sparse `(doc, weight)` list, ascending by
    /// document.
    functions: Vec<Vec<Vec<(DocIdx, S)>>>,
}

impl<S: Scalar> XosInstance<S> {
    pub fn new(
        documents: Vec<String>,
        users: Vec<(String, Vec<Vec<(String, S)>>)>,
    ) -> Result<Self, ModelError> {
        let doc_index: HashMap<&str, usize> = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_str(), i))
            .collect();
        let mut user_ids = Vec::new();
        let mut functions = Vec::new();
        for (id, funcs) in &users {
            user_ids.push(id.clone());
            let mut rows = Vec::new();
            for weights in funcs {
                let mut sparse = Vec::new();
                for (doc, w) in weights {
                    match doc_index.get(doc.as_str()) {
                        Some(&s) => sparse.push((s, *w)),
                        None => return Err(ModelError::UnknownDocumentId(doc.clone())),
                    }
                }
                sparse.sort_by_key(|&(s, _)| s);
                rows.push(sparse);
            }
            functions.push(rows);
        }
        Ok(XosInstance {
            doc_ids: documents,
            user_ids,
            functions,
        })
    }

    pub fn from_indexed(n_docs: usize, users: Vec<Vec<Vec<(DocIdx, S)>>>) -> Self {
        XosInstance {
            doc_ids: (1..=n_docs).map(|i| format!("s{i}")).collect(),
            user_ids: (1..=users.len()).map(|i| format!("u{i}")).collect(),
            functions: users
                .into_iter()
                .map(|funcs| {
                    funcs
                        .into_iter()
                        .map(|mut f| {
                            f.sort_by_key(|&(s, _)| s);
                            f
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }
    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }
    pub fn functions(&self, u: UserIdx) -> &[Vec<(DocIdx, S)>] {
        &self.functions[u]
    }

    pub fn validate(&self, group_cap: usize) -> Vec<String> {
        let mut out = Vec::new();
        for (u, funcs) in self.functions.iter().enumerate() {
            let uid = &self.user_ids[u];
            if funcs.is_empty() {
                out.push(format!("user {uid:?} has no additive functions"));
                continue;
            }
            if funcs.len() > group_cap {
                out.push(format!(
                    "user {uid:?} has {} additive functions, cap is {group_cap}",
                    funcs.len()
                ));
            }
            let mut satisfiable = false;
            for (i, f) in funcs.iter().enumerate() {
                let mut total = S::zero();
                for &(s, w) in f {
                    if s >= self.n_docs() {
                        out.push(format!("user {uid:?} function {i}: unknown document {s}"));
                    }
                    if w < S::zero() {
                        out.push(format!("user {uid:?} function {i}: negative weight"));
                    }
                    total += w;
                }
                if total >= S::one() - S::FEAS_TOL {
                    satisfiable = true;
                }
            }
            if !satisfiable {
                out.push(format!(
                    "user {uid:?} cannot reach value 1 from the full document set"
                ));
            }
        }
        out
    }
}

/// Satisfying times under the max-of-additive semantics.
pub fn evaluate_rxos<S: Scalar>(
    instance: &XosInstance<S>,
    order: &[DocIdx],
) -> Result<Ranking, ModelError> {
    let n = instance.n_docs();
    if order.len() != n {
        return Err(ModelError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for &s in order {
        if s >= n || seen[s] {
            return Err(ModelError::NotAPermutation);
        }
        seen[s] = true;
    }
    let one = S::one() - S::FEAS_TOL;
    let mut times = vec![0usize; instance.n_users()];
    let mut sums: Vec<Vec<S>> = instance
        .functions
        .iter()
        .map(|funcs| vec![S::zero(); funcs.len()])
        .collect();
    // Dense weight lookup per document for the scan.
    let mut remaining = instance.n_users();
    for (pos, &s) in order.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        for (u, funcs) in instance.functions.iter().enumerate() {
            if times[u] != 0 {
                continue;
            }
            let mut hit = false;
            for (i, f) in funcs.iter().enumerate() {
                if let Ok(j) = f.binary_search_by_key(&s, |&(d, _)| d) {
                    sums[u][i] += f[j].1;
                }
                if sums[u][i] >= one {
                    hit = true;
                }
            }
            if hit {
                times[u] = pos + 1;
                remaining -= 1;
            }
        }
    }
    if let Some(u) = times.iter().position(|&t| t == 0) {
        if instance.n_users() > 0 {
            return Err(ModelError::UnsatisfiableUser(u));
        }
    }
    Ok(Ranking {
        order: order.to_vec(),
        total_cost: times.iter().map(|&t| t as u64).sum(),
        satisfy_times: times,
    })
}

/// A violated RXOS covering row: for function `(u,i)`, time `t` and an
/// affordable document set `F` (`w_F = sum_F A < 1`),
/// `(1-w_F) g <= (1-w_F) sum_{T1} z + sum_{T2} A_s z` with
/// `T1 = {s : A_s >= 1 - w_F}`.
#[derive(Debug, Clone)]
pub struct XosRow<S> {
    pub user: UserIdx,
    pub func: usize,
    pub time: usize,
    pub fixed_docs: Vec<DocIdx>,
    pub t1: Vec<DocIdx>,
    pub t2: Vec<(DocIdx, S)>,
    /// `1 - w_F`.
    pub need: S,
}

impl<S: Scalar> XosRow<S> {
    pub fn violation(&self, g_val: S, z_at_t: &[S]) -> S {
        let mut lhs = self.need * g_val;
        for &s in &self.t1 {
            lhs -= self.need * z_at_t[s];
        }
        for &(s, a) in &self.t2 {
            lhs -= a * z_at_t[s];
        }
        lhs
    }
}

fn make_xos_row<S: Scalar>(
    weights_dense: &[S],
    user: UserIdx,
    func: usize,
    time: usize,
    fixed_docs: &[DocIdx],
) -> Option<XosRow<S>> {
    let w_f: S = fixed_docs.iter().map(|&s| weights_dense[s]).sum();
    let need = S::one() - w_f;
    if need <= S::FEAS_TOL {
        return None;
    }
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for (s, &a) in weights_dense.iter().enumerate() {
        if a >= need {
            t1.push(s);
        } else if a > S::zero() {
            t2.push((s, a));
        }
    }
    Some(XosRow {
        user,
        func,
        time,
        fixed_docs: fixed_docs.to_vec(),
        t1,
        t2,
        need,
    })
}

/// Candidate-set separation for the RXOS covering family.
///
/// Families per (function, time): (a) documents with `scale*z >= 1`
/// trimmed greedily to stay affordable, mirroring the nearly-covered
/// set; (b) greedy prefixes of documents ranked by `A * (1 - z)`.
pub fn rxos_separation<S: Scalar>(
    instance: &XosInstance<S>,
    g_vals: &dyn Fn(UserIdx, usize, usize) -> S,
    z_rows: &[Vec<S>],
    times: &[usize],
    config: &RelaxConfig<S>,
    known: &HashSet<(UserIdx, usize, usize, Vec<DocIdx>)>,
) -> Vec<(XosRow<S>, S)> {
    let n = instance.n_docs();
    let mut out: Vec<(XosRow<S>, S)> = Vec::new();
    let mut seen: HashSet<(UserIdx, usize, usize, Vec<DocIdx>)> = HashSet::new();
    for &t in times {
        let z_at_t: Vec<S> = z_rows.iter().map(|zs| zs[t - 1]).collect();
        for (u, funcs) in instance.functions.iter().enumerate() {
            for (i, f) in funcs.iter().enumerate() {
                let mut dense = vec![S::zero(); n];
                for &(s, w) in f {
                    dense[s] += w;
                }
                let g_val = g_vals(u, i, t);
                let mut candidates: Vec<Vec<DocIdx>> = Vec::new();
                // (a) heavily selected documents, kept affordable.
                let mut heavy: Vec<DocIdx> = (0..n)
                    .filter(|&s| dense[s] > S::zero() && config.scale * z_at_t[s] >= S::one())
                    .collect();
                heavy.sort_by(|&a, &b| {
                    dense[b].partial_cmp(&dense[a]).unwrap().then(a.cmp(&b))
                });
                let mut afford = Vec::new();
                let mut w_sum = S::zero();
                for &s in &heavy {
                    if w_sum + dense[s] < S::one() - S::FEAS_TOL {
                        w_sum += dense[s];
                        afford.push(s);
                    }
                }
                afford.sort_unstable();
                candidates.push(afford);
                // (b) prefixes by A * (1 - z), descending.
                let mut ranked: Vec<DocIdx> = (0..n).filter(|&s| dense[s] > S::zero()).collect();
                ranked.sort_by(|&a, &b| {
                    let ka = dense[a] * (S::one() - z_at_t[a]);
                    let kb = dense[b] * (S::one() - z_at_t[b]);
                    kb.partial_cmp(&ka).unwrap().then(a.cmp(&b))
                });
                let mut prefix = Vec::new();
                let mut w_sum = S::zero();
                candidates.push(Vec::new());
                for &s in &ranked {
                    if w_sum + dense[s] >= S::one() - S::FEAS_TOL {
                        break;
                    }
                    w_sum += dense[s];
                    prefix.push(s);
                    let mut sorted = prefix.clone();
                    sorted.sort_unstable();
                    candidates.push(sorted);
                }
                for fixed in candidates {
                    let key = (u, i, t, fixed.clone());
                    if known.contains(&key) || seen.contains(&key) {
                        continue;
                    }
                    let Some(row) = make_xos_row(&dense, u, i, t, &fixed) else {
                        continue;
                    };
                    let violation = row.violation(g_val, &z_at_t);
                    if violation > config.eps_sep {
                        seen.insert(key);
                        out.push((row, violation));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then(a.0.user.cmp(&b.0.user))
            .then(a.0.func.cmp(&b.0.func))
            .then(a.0.time.cmp(&b.0.time))
            .then(a.0.fixed_docs.cmp(&b.0.fixed_docs))
    });
    out
}

/// Solve an RXOS instance: grouped LP with the affordable-set covering
/// family, then the doubling rounding without a set-cover step
/// (overflow at `overflow_base * 2^k`).
pub fn solve_rxos<S: Scalar>(
    instance: &XosInstance<S>,
    config: &ExtConfig<S>,
) -> Result<ExtOutcome<S>, ExtError> {
    let problems = instance.validate(config.group_cap);
    if !problems.is_empty() {
        return Err(ExtError::InvalidInstance(problems));
    }
    let n = instance.n_docs();
    let n_users = instance.n_users();
    if n == 0 {
        return Err(ExtError::Relax(RelaxError::EmptyInstance));
    }
    let group_offsets: Vec<usize> = instance
        .functions
        .iter()
        .scan(0usize, |acc, g| {
            let start = *acc;
            *acc += g.len();
            Some(start)
        })
        .collect();

    let mut lp = LinearProgram::<S>::new();
    let (_, z0) = add_schedule_core(&mut lp, n);
    let y0 = lp.n_vars();
    for u in 0..n_users {
        for t in 1..=n {
            lp.add_named_var(format!("y_{u}_{t}"), -S::one(), S::zero(), S::one())
                .unwrap();
        }
    }
    let g0 = lp.n_vars();
    for (u, funcs) in instance.functions.iter().enumerate() {
        for i in 0..funcs.len() {
            for t in 1..=n {
                lp.add_named_var(format!("g_{u}_{i}_{t}"), S::zero(), S::zero(), S::one())
                    .unwrap();
            }
        }
    }
    lp.set_objective_offset(S::from_usize_lossy(n_users * n));
    let z = |s: usize, t: usize| z0 + s * n + (t - 1);
    let y = |u: usize, t: usize| y0 + u * n + (t - 1);
    let g = |u: usize, i: usize, t: usize| g0 + (group_offsets[u] + i) * n + (t - 1);

    for u in 0..n_users {
        let p = instance.functions[u].len();
        for t in 1..=n {
            let mut coeffs = vec![(y(u, t), S::one())];
            for i in 0..p {
                coeffs.push((g(u, i, t), -S::one()));
            }
            lp.add_row(RowSpec::new(coeffs, Cmp::Le, S::zero())).unwrap();
            if t < n {
                lp.add_row(RowSpec::new(
                    vec![(y(u, t), S::one()), (y(u, t + 1), -S::one())],
                    Cmp::Le,
                    S::zero(),
                ))
                .unwrap();
                for i in 0..p {
                    lp.add_row(RowSpec::new(
                        vec![(g(u, i, t), S::one()), (g(u, i, t + 1), -S::one())],
                        Cmp::Le,
                        S::zero(),
                    ))
                    .unwrap();
                }
            }
        }
    }

    let opts = SolveOptions {
        tolerance: config.relax.eps_feas,
        iteration_cap: config.relax.iteration_cap,
    };
    let mut solver = Solver::new(&lp, &opts);
    let times = doubling_times(n);
    let mut known: HashSet<(UserIdx, usize, usize, Vec<DocIdx>)> = HashSet::new();
    let mut rounds = 0usize;
    let (y_rows, z_rows) = loop {
        match solver.optimize() {
            LpStatus::Optimal => {}
            status => return Err(ExtError::LpFailed(status)),
        }
        rounds += 1;
        let z_rows: Vec<Vec<S>> = (0..n)
            .map(|s| (1..=n).map(|t| solver.value(z(s, t))).collect())
            .collect();
        let g_of = |u: UserIdx, i: usize, t: usize| solver.value(g(u, i, t));
        let violated = rxos_separation(instance, &g_of, &z_rows, &times, &config.relax, &known);
        if violated.is_empty() {
            let y_rows: Vec<Vec<S>> = (0..n_users)
                .map(|u| (1..=n).map(|t| solver.value(y(u, t))).collect())
                .collect();
            break (y_rows, z_rows);
        }
        if rounds >= config.relax.max_rounds {
            return Err(ExtError::RowGenerationCap(config.relax.max_rounds));
        }
        let specs: Vec<RowSpec<S>> = violated
            .iter()
            .map(|(row, _)| {
                let mut coeffs = vec![(g(row.user, row.func, row.time), row.need)];
                for &s in &row.t1 {
                    coeffs.push((z(s, row.time), -row.need));
                }
                for &(s, a) in &row.t2 {
                    coeffs.push((z(s, row.time), -a));
                }
                RowSpec::new(coeffs, Cmp::Le, S::zero())
            })
            .collect();
        solver.add_rows(&specs);
        for (row, _) in violated {
            known.insert((row.user, row.func, row.time, row.fixed_docs));
        }
    };

    let mut lp_bound = S::zero();
    for yu in &y_rows {
        for &v in yu {
            lp_bound += S::one() - v;
        }
    }
    let t_star: Vec<usize> = y_rows
        .iter()
        .map(|yu| half_time_of(yu, config.relax.eps_feas))
        .collect();

    // Rounding without the set-cover step.
    let mut trial_costs = Vec::new();
    let mut rankings = Vec::new();
    for trial in 0..config.rounding.trials {
        let mut selections: Vec<Vec<DocIdx>> = Vec::new();
        for k in 0..=max_round(n) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(
                config.rounding.rng_seed,
                trial as u64,
                k as u64,
            ));
            let two_k = 1usize << k;
            let t = two_k.min(n);
            let mut g_docs = Vec::new();
            for (s, zs) in z_rows.iter().enumerate() {
                let p = (config.rounding.scale * zs[t - 1]).min(S::one()).to_f64_lossy();
                if rng.gen::<f64>() < p {
                    g_docs.push(s);
                }
            }
            let threshold = config.rounding.overflow_base * S::from_usize_lossy(two_k);
            let overflowed = S::from_usize_lossy(g_docs.len()) > threshold;
            selections.push(if overflowed { Vec::new() } else { g_docs });
        }
        let order = complete_ranking_indices(n, &selections)?;
        let ranking = evaluate_rxos(instance, &order)?;
        trial_costs.push(ranking.total_cost);
        rankings.push(ranking);
    }
    let best_trial = trial_costs
        .iter()
        .enumerate()
        .min_by_key(|(i, &c)| (c, *i))
        .map(|(i, _)| i)
        .unwrap();
    Ok(ExtOutcome {
        lp_bound,
        t_star,
        best: rankings[best_trial].clone(),
        best_trial,
        trial_costs,
    })
}

/// Exhaustive permutation oracle for small extension instances:
/// lexicographically smallest minimum-cost permutation under `eval`.
pub fn enumerate_optimum<E>(
    n_docs: usize,
    mut eval: E,
) -> Result<(Vec<DocIdx>, u64), ModelError>
where
    E: FnMut(&[DocIdx]) -> Result<Ranking, ModelError>,
{
    fn permute<E>(
        prefix: &mut Vec<DocIdx>,
        used: &mut Vec<bool>,
        n: usize,
        eval: &mut E,
        best: &mut Option<(Vec<DocIdx>, u64)>,
    ) -> Result<(), ModelError>
    where
        E: FnMut(&[DocIdx]) -> Result<Ranking, ModelError>,
    {
        if prefix.len() == n {
            let r = eval(prefix)?;
            if best.as_ref().is_none_or(|(_, c)| r.total_cost < *c) {
                *best = Some((prefix.clone(), r.total_cost));
            }
            return Ok(());
        }
        for s in 0..n {
            if !used[s] {
                used[s] = true;
                prefix.push(s);
                permute(prefix, used, n, eval, best)?;
                prefix.pop();
                used[s] = false;
            }
        }
        Ok(())
    }
    let mut best = None;
    permute(
        &mut Vec::new(),
        &mut vec![false; n_docs],
        n_docs,
        &mut eval,
        &mut best,
    )?;
    Ok(best.expect("at least one permutation"))
}

/// Integral `z` of a permutation, for row-validity tests.
pub fn integral_z<S: Scalar>(n: usize, order: &[DocIdx]) -> Vec<Vec<S>> {
    let mut z = vec![vec![S::zero(); n]; n];
    for (pos, &s) in order.iter().enumerate() {
        for t in pos..n {
            z[s][t] = S::one();
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_group_instance() -> GroupInstance {
        // docs: s1={e1}, s2={e2}, s3={e3}
        // u1: groups ({e1},1) and ({e2},1); u2: single group ({e3},1)
        GroupInstance::from_indexed(
            3,
            vec![vec![0], vec![1], vec![2]],
            vec![
                vec![(vec![0], 1), (vec![1], 1)],
                vec![(vec![2], 1)],
            ],
        )
    }

    #[test]
    fn evaluate_rgc_single_group_matches_core() {
        let gi = GroupInstance::from_indexed(
            2,
            vec![vec![0], vec![1], vec![0, 1]],
            vec![vec![(vec![0, 1], 2)], vec![(vec![0], 1)]],
        );
        let rdc = gi.as_rdc().unwrap();
        for order in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]] {
            let a = evaluate_rgc(&gi, &order).unwrap();
            let b = crate::model::evaluate(&rdc, &order).unwrap();
            assert_eq!(a.satisfy_times, b.satisfy_times);
            assert_eq!(a.total_cost, b.total_cost);
        }
    }

    #[test]
    fn evaluate_rgc_min_over_groups() {
        let gi = two_group_instance();
        // e2 first: u1's second group satisfied at t=1.
        let r = evaluate_rgc(&gi, &[1, 0, 2]).unwrap();
        assert_eq!(r.satisfy_times[0], 1);
        // both groups need the last document
        let gi2 = GroupInstance::from_indexed(
            2,
            vec![vec![0], vec![1]],
            vec![vec![(vec![1], 1), (vec![1], 1)]],
        );
        let r2 = evaluate_rgc(&gi2, &[0, 1]).unwrap();
        assert_eq!(r2.satisfy_times[0], 2);
    }

    #[test]
    fn rgc_validation() {
        let gi = GroupInstance::from_indexed(2, vec![vec![0], vec![1]], vec![vec![]]);
        assert!(!gi.validate(16).is_empty());
        let gi2 = GroupInstance::from_indexed(
            2,
            vec![vec![0], vec![1]],
            vec![vec![(vec![0], 2)]],
        );
        assert!(!gi2.validate(16).is_empty());
        let ok = two_group_instance();
        assert!(ok.validate(16).is_empty());
        assert!(!ok.validate(1).is_empty(), "cap 1 rejects two groups");
    }

    #[test]
    fn solve_rgc_two_groups_beats_oracle_bound() {
        let gi = two_group_instance();
        let config = ExtConfig::<f64>::default();
        let outcome = solve_rgc(&gi, &config).unwrap();
        let (_, oracle_cost) =
            enumerate_optimum(3, |order| evaluate_rgc(&gi, order)).unwrap();
        assert!(outcome.best.total_cost >= oracle_cost);
        assert!(outcome.lp_bound <= oracle_cost as f64 + 1e-6);
    }

    #[test]
    fn rgc_dominated_groups_equal_single_min_k() {
        // Groups sharing all topics: ({e1,e2},2) and ({e1,e2},1) is
        // equivalent to the single group with K=1.
        let gi = GroupInstance::from_indexed(
            2,
            vec![vec![0], vec![1]],
            vec![vec![(vec![0, 1], 2), (vec![0, 1], 1)]],
        );
        let single = GroupInstance::from_indexed(
            2,
            vec![vec![0], vec![1]],
            vec![vec![(vec![0, 1], 1)]],
        );
        for order in [vec![0, 1], vec![1, 0]] {
            assert_eq!(
                evaluate_rgc(&gi, &order).unwrap().total_cost,
                evaluate_rgc(&single, &order).unwrap().total_cost
            );
        }
    }

    #[test]
    fn evaluate_rxos_examples() {
        // Single function, A=1 on document s2.
        let xi = XosInstance::from_indexed(3, vec![vec![vec![(1, 1.0f64)]]]);
        let r = evaluate_rxos(&xi, &[0, 1, 2]).unwrap();
        assert_eq!(r.satisfy_times[0], 2);

        // Weights 0.6 then 0.5: crosses 1 at the second document.
        let xi = XosInstance::from_indexed(2, vec![vec![vec![(0, 0.6), (1, 0.5)]]]);
        let r = evaluate_rxos(&xi, &[0, 1]).unwrap();
        assert_eq!(r.satisfy_times[0], 2);

        // Two functions, the second one reaches 1 earlier.
        let xi = XosInstance::from_indexed(
            2,
            vec![vec![vec![(0, 0.4), (1, 0.7)], vec![(0, 1.0)]]],
        );
        let r = evaluate_rxos(&xi, &[0, 1]).unwrap();
        assert_eq!(r.satisfy_times[0], 1);
    }

    #[test]
    fn rxos_unsatisfiable_user_detected() {
        let xi = XosInstance::from_indexed(2, vec![vec![vec![(0, 0.4), (1, 0.3)]]]);
        assert!(!xi.validate(16).is_empty());
        assert!(matches!(
            evaluate_rxos(&xi, &[0, 1]),
            Err(ModelError::UnsatisfiableUser(0))
        ));
    }

    #[test]
    fn rxos_separation_zero_coverage() {
        let xi = XosInstance::from_indexed(2, vec![vec![vec![(0, 0.6), (1, 0.6)]]]);
        let z = vec![vec![0.0; 2]; 2];
        let config = RelaxConfig::<f64>::default();
        let g = |_: usize, _: usize, _: usize| 1.0;
        let rows = rxos_separation(&xi, &g, &z, &[1], &config, &HashSet::new());
        assert!(!rows.is_empty());
        let empty_f = rows.iter().find(|(r, _)| r.fixed_docs.is_empty()).unwrap();
        assert!((empty_f.1 - 1.0).abs() < 1e-9, "F=∅ row violated by 1");
    }

    #[test]
    fn rxos_separation_quiet_on_integral() {
        let xi = XosInstance::from_indexed(
            3,
            vec![vec![vec![(0, 0.5), (1, 0.5), (2, 0.2)]]],
        );
        let order = vec![2, 0, 1];
        let z = integral_z::<f64>(3, &order);
        let ranking = evaluate_rxos(&xi, &order).unwrap();
        let t_u = ranking.satisfy_times[0];
        let config = RelaxConfig::<f64>::default();
        let g = |_: usize, _: usize, t: usize| if t >= t_u { 1.0 } else { 0.0 };
        let rows = rxos_separation(&xi, &g, &z, &[1, 2, 3], &config, &HashSet::new());
        assert!(rows.is_empty(), "integral points satisfy the family: {rows:?}");
    }

    #[test]
    fn rxos_zero_function_forces_g_to_zero() {
        let dense = vec![0.0f64];
        let row = make_xos_row(&dense, 0, 1, 1, &[]).unwrap();
        assert!(row.t1.is_empty());
        assert!(row.t2.is_empty());
        // g <= 0 whenever z gives no mass to the (empty) support.
        assert!((row.violation(1.0, &[1.0]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solve_rxos_small_instance() {
        let xi = XosInstance::from_indexed(
            3,
            vec![
                vec![vec![(0, 0.5), (1, 0.5), (2, 0.4)]],
                vec![vec![(2, 1.0)]],
            ],
        );
        let config = ExtConfig::<f64>::default();
        let outcome = solve_rxos(&xi, &config).unwrap();
        let (_, oracle_cost) =
            enumerate_optimum(3, |order| evaluate_rxos(&xi, order)).unwrap();
        assert!(outcome.lp_bound <= oracle_cost as f64 + 1e-6);
        assert!(outcome.best.total_cost >= oracle_cost);
    }

    #[test]
    fn solve_rxos_single_doc_single_function() {
        let xi = XosInstance::from_indexed(1, vec![vec![vec![(0, 1.0f64)]]]);
        let config = ExtConfig::<f64>::default();
        let outcome = solve_rxos(&xi, &config).unwrap();
        assert_eq!(outcome.best.total_cost, 1);
    }
}
