//! The time-indexed LP relaxation with knapsack-cover strengthening.
//!
//! Variables: `x[s][t]` (document `s` picked at time `t`), `z[s][t]`
//! (picked by time `t`), `y[u][t]` (user satisfied by time `t`), all in
//! `[0,1]`. Base rows force `x` to be a fractional permutation matrix
//! and `z` its prefix sums; `y` alone is unconstrained above, so the
//! objective `sum_u sum_t (1 - y_ut)` would collapse to zero. The
//! knapsack-cover rows restore the lower bound: for a user `u`, a time
//! `t` and an already-covered set `F ⊂ I_u`,
//!
//! ```text
//! (K_u-|F|) y_ut <= (K_u-|F|) sum_{s in T1} z_st
//!                   + sum_{s in T2} |C_s ∩ (I_u\F)| z_st
//! ```
//!
//! where `T1` are the documents that alone can finish the user given
//! `F` and `T2` the rest. Every permutation satisfies every such row,
//! so the generated relaxation always lower-bounds the integral
//! optimum, no matter which rows separation happens to add.
//!
//! The full row family is exponential; [`solve_relaxation`] runs a
//! row-generation loop instead, separating at the doubling times
//! `{1, 2, 4, ..., n}` with two heuristic families per (user, time):
//! the nearly-covered set `P(t) ∩ I_u` and greedy coverage prefixes.

use std::collections::HashSet;

use thiserror::Error;

use crate::lp::{Cmp, LinearProgram, LpStatus, RowSpec, Solver, SolveOptions, VarId};
use crate::model::{DocIdx, Instance, TopicIdx, TopicSet, UserIdx, Violation};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("instance is invalid: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("instance has no documents")]
    EmptyInstance,
    #[error("fixed set must be a subset of the user's interests")]
    FixedSetNotInterest,
    #[error("fixed set of size {fixed} is vacuous for threshold {threshold}")]
    VacuousRow { fixed: usize, threshold: usize },
    #[error("LP solve failed with status {0:?}")]
    LpFailed(LpStatus),
    #[error("row generation did not converge within {0} rounds")]
    RowGenerationCap(usize),
    #[error("internal invariant breach: {0}")]
    Internal(String),
}

/// Parameters for building and solving the relaxation.
#[derive(Debug, Clone, Copy)]
pub struct RelaxConfig<S> {
    /// Absolute LP feasibility tolerance.
    pub eps_feas: S,
    /// Separation violation threshold (strictly looser than `eps_feas`).
    pub eps_sep: S,
    /// Coverage scale for the nearly-covered topic set, shared with the
    /// rounding scheme.
    pub scale: S,
    /// Row-generation round cap.
    pub max_rounds: usize,
    /// Simplex pivot cap.
    pub iteration_cap: usize,
    /// Collapse users with identical interests and threshold into one
    /// weighted variable block. Bounds and per-user outputs are
    /// unchanged; the program just gets smaller.
    pub dedupe_users: bool,
    /// Separate at every time step instead of the doubling times. The
    /// bound can only tighten; the default keeps the program small.
    pub all_times: bool,
}

impl<S: Scalar> Default for RelaxConfig<S> {
    fn default() -> Self {
        RelaxConfig {
            eps_feas: S::FEAS_TOL,
            eps_sep: S::SEP_TOL,
            scale: S::from_f64_lossy(50.0),
            max_rounds: 100,
            iteration_cap: 1_000_000,
            dedupe_users: true,
            all_times: false,
        }
    }
}

/// Variable ids of the relaxation, one block per kind.
#[derive(Debug, Clone)]
pub struct VarMap {
    pub n_docs: usize,
    pub n_times: usize,
    pub n_user_rows: usize,
    x0: VarId,
    z0: VarId,
    y0: VarId,
}

impl VarMap {
    /// `x[s][t]`, `t` is 1-based.
    pub fn x(&self, s: DocIdx, t: usize) -> VarId {
        self.x0 + s * self.n_times + (t - 1)
    }
    pub fn z(&self, s: DocIdx, t: usize) -> VarId {
        self.z0 + s * self.n_times + (t - 1)
    }
    /// `y[u][t]` where `u` indexes the built user rows (users or
    /// deduped user classes).
    pub fn y(&self, u: usize, t: usize) -> VarId {
        self.y0 + u * self.n_times + (t - 1)
    }
}

/// One instantiated knapsack-cover row.
#[derive(Debug, Clone)]
pub struct KnapsackRow {
    pub user: UserIdx,
    pub time: usize,
    /// The already-covered topic set `F`.
    pub fixed: TopicSet,
    /// Documents that alone cover at least `K_u - |F|` topics of
    /// `I_u \ F`.
    pub t1: Vec<DocIdx>,
    /// Remaining documents with their coefficient
    /// `|C_s ∩ (I_u \ F)|` (zero coefficients omitted).
    pub t2_coeffs: Vec<(DocIdx, usize)>,
    /// `K_u - |F|`.
    pub need: usize,
}

impl KnapsackRow {
    /// LP row: `need*y - need*sum z_T1 - sum c*z_T2 <= 0` for the given
    /// y-variable owner.
    fn to_row_spec<S: Scalar>(&self, vars: &VarMap, y_owner: usize) -> RowSpec<S> {
        let mut coeffs = Vec::with_capacity(1 + self.t1.len() + self.t2_coeffs.len());
        let need = S::from_usize_lossy(self.need);
        coeffs.push((vars.y(y_owner, self.time), need));
        for &s in &self.t1 {
            coeffs.push((vars.z(s, self.time), -need));
        }
        for &(s, c) in &self.t2_coeffs {
            coeffs.push((vars.z(s, self.time), -S::from_usize_lossy(c)));
        }
        RowSpec::new(coeffs, Cmp::Le, S::zero())
    }

    /// `need*y - covered mass`; positive means violated.
    pub fn violation<S: Scalar>(&self, y_ut: S, z_at_t: &[S]) -> S {
        let need = S::from_usize_lossy(self.need);
        let mut rhs = S::zero();
        for &s in &self.t1 {
            rhs += need * z_at_t[s];
        }
        for &(s, c) in &self.t2_coeffs {
            rhs += S::from_usize_lossy(c) * z_at_t[s];
        }
        need * y_ut - rhs
    }
}

/// Build the knapsack-cover row for `(u, t, F)`.
///
/// Requires `F ⊆ I_u` and `|F| < K_u` (the `|F| = K_u` case is the
/// vacuous `0 <= rhs`).
pub fn make_kc_row(
    instance: &Instance,
    user: UserIdx,
    time: usize,
    fixed: &TopicSet,
) -> Result<KnapsackRow, RelaxError> {
    let interests = instance.interests(user);
    if !fixed.is_subset(interests) {
        return Err(RelaxError::FixedSetNotInterest);
    }
    let threshold = instance.threshold(user);
    let fixed_len = fixed.count();
    if fixed_len >= threshold {
        return Err(RelaxError::VacuousRow {
            fixed: fixed_len,
            threshold,
        });
    }
    let need = threshold - fixed_len;
    let remaining = interests.difference(fixed);
    let (t1, t2_coeffs) = split_t1_t2(instance.all_doc_topics(), &remaining, need);
    Ok(KnapsackRow {
        user,
        time,
        fixed: fixed.clone(),
        t1,
        t2_coeffs,
        need,
    })
}

/// Partition the documents for a covering row: `T1` holds those whose
/// topic sets alone cover at least `need` of `remaining`; the rest keep
/// their (positive) coverage count as coefficient.
pub(crate) fn split_t1_t2(
    doc_topics: &[TopicSet],
    remaining: &TopicSet,
    need: usize,
) -> (Vec<DocIdx>, Vec<(DocIdx, usize)>) {
    let mut t1 = Vec::new();
    let mut t2_coeffs = Vec::new();
    for (s, topics) in doc_topics.iter().enumerate() {
        let covers = topics.intersection_count(remaining);
        if covers >= need {
            t1.push(s);
        } else if covers > 0 {
            t2_coeffs.push((s, covers));
        }
    }
    (t1, t2_coeffs)
}

/// Base program: assignment rows (each document exactly once, one
/// document per time), prefix rows defining `z`, box bounds, the
/// minimized objective `sum_u sum_t (1 - y_ut)` and the `y`
/// monotonicity rows. No knapsack-cover rows yet.
pub fn build_base<S: Scalar>(instance: &Instance) -> (LinearProgram<S>, VarMap) {
    let weights = vec![S::one(); instance.n_users()];
    build_weighted(instance, &weights)
}

/// Add the schedule skeleton shared by all relaxations: `x` and `z`
/// variable blocks, assignment rows (1)-(2) and prefix rows (3).
/// Returns the first variable id of each block; `x[s][t]` lives at
/// `x0 + s*n + (t-1)` and likewise for `z`.
pub(crate) fn add_schedule_core<S: Scalar>(
    lp: &mut LinearProgram<S>,
    n: usize,
) -> (VarId, VarId) {
    let x0 = lp.n_vars();
    for s in 0..n {
        for t in 1..=n {
            lp.add_named_var(format!("x_{s}_{t}"), S::zero(), S::zero(), S::one())
                .unwrap();
        }
    }
    let z0 = lp.n_vars();
    for s in 0..n {
        for t in 1..=n {
            lp.add_named_var(format!("z_{s}_{t}"), S::zero(), S::zero(), S::one())
                .unwrap();
        }
    }
    let x = |s: usize, t: usize| x0 + s * n + (t - 1);
    let z = |s: usize, t: usize| z0 + s * n + (t - 1);
    // (1) each document selected exactly once
    for s in 0..n {
        let coeffs = (1..=n).map(|t| (x(s, t), S::one())).collect();
        lp.add_row(RowSpec::new(coeffs, Cmp::Eq, S::one())).unwrap();
    }
    // (2) one document per time
    for t in 1..=n {
        let coeffs = (0..n).map(|s| (x(s, t), S::one())).collect();
        lp.add_row(RowSpec::new(coeffs, Cmp::Eq, S::one())).unwrap();
    }
    // (3) prefix definition, recursive form
    for s in 0..n {
        for t in 1..=n {
            let mut coeffs = vec![(z(s, t), S::one()), (x(s, t), -S::one())];
            if t > 1 {
                coeffs.push((z(s, t - 1), -S::one()));
            }
            lp.add_row(RowSpec::new(coeffs, Cmp::Eq, S::zero())).unwrap();
        }
    }
    (x0, z0)
}

/// Base program with one y-block per entry of `weights` (used for
/// deduped user classes; `weights[i]` multiplies block `i`'s objective
/// contribution).
fn build_weighted<S: Scalar>(instance: &Instance, weights: &[S]) -> (LinearProgram<S>, VarMap) {
    let n = instance.n_docs();
    let n_blocks = weights.len();
    let mut lp = LinearProgram::new();
    let (first_x, first_z) = add_schedule_core(&mut lp, n);
    let first_y = lp.n_vars();
    for (u, &w) in weights.iter().enumerate() {
        for t in 1..=n {
            lp.add_named_var(format!("y_{u}_{t}"), -w, S::zero(), S::one())
                .unwrap();
        }
    }
    let vars = VarMap {
        n_docs: n,
        n_times: n,
        n_user_rows: n_blocks,
        x0: first_x,
        z0: first_z,
        y0: first_y,
    };
    // Objective offset: sum_u sum_t 1.
    let total_users: S = weights.iter().copied().sum();
    lp.set_objective_offset(total_users * S::from_usize_lossy(n));

    // y monotone in t; valid for integral solutions and keeps the
    // half-time well-defined under partial row generation.
    for u in 0..n_blocks {
        for t in 1..n {
            lp.add_row(RowSpec::new(
                vec![(vars.y(u, t), S::one()), (vars.y(u, t + 1), -S::one())],
                Cmp::Le,
                S::zero(),
            ))
            .unwrap();
        }
    }
    (lp, vars)
}

/// Separation times: powers of two clamped to `n`, plus `n` itself.
pub fn doubling_times(n: usize) -> Vec<usize> {
    let mut times = Vec::new();
    let mut t = 1usize;
    while t < n {
        times.push(t);
        t *= 2;
    }
    times.push(n);
    times
}

/// Per-topic fractional coverage at one time step:
/// `cov[e] = sum_{s: e in C_s} z_st`.
pub fn topic_coverage<S: Scalar>(doc_topics: &[TopicSet], n_topics: usize, z_at_t: &[S]) -> Vec<S> {
    let mut cov = vec![S::zero(); n_topics];
    for (s, topics) in doc_topics.iter().enumerate() {
        let z = z_at_t[s];
        if z != S::zero() {
            for e in topics.iter() {
                cov[e] += z;
            }
        }
    }
    cov
}

/// State handed to [`separate`]: current `y` per user row and `z`
/// columns per time.
pub struct SeparationState<'a, S> {
    /// `y[user_row][t-1]`.
    pub y: &'a [Vec<S>],
    /// `z[s][t-1]`.
    pub z: &'a [Vec<S>],
    /// Maps user rows to a representative instance user.
    pub user_of_row: &'a [UserIdx],
}

fn row_key(user: UserIdx, time: usize, fixed: &TopicSet) -> (UserIdx, usize, TopicSet) {
    (user, time, fixed.clone())
}

/// Find violated knapsack-cover rows at the given times.
///
/// Two families per (user, time): the paper-exact nearly-covered set
/// `F = P(t) ∩ I_u` with `P(t) = {e : scale * cov_e >= 1}`, plus greedy
/// prefixes of the most fractionally covered interest topics. Rows
/// violated by more than `eps_sep` come back most-violated first.
pub fn separate<S: Scalar>(
    instance: &Instance,
    state: &SeparationState<'_, S>,
    times: &[usize],
    config: &RelaxConfig<S>,
    known: &HashSet<(UserIdx, usize, TopicSet)>,
) -> Vec<(KnapsackRow, S)> {
    let n_topics = instance.n_topics();
    let mut found: Vec<(KnapsackRow, S)> = Vec::new();
    let mut seen: HashSet<(UserIdx, usize, TopicSet)> = HashSet::new();
    for &t in times {
        let z_at_t: Vec<S> = state.z.iter().map(|zs| zs[t - 1]).collect();
        let cov = topic_coverage(instance.all_doc_topics(), n_topics, &z_at_t);
        let nearly_covered: TopicSet = {
            let mut p = TopicSet::empty(n_topics);
            for (e, &c) in cov.iter().enumerate() {
                if config.scale * c >= S::one() {
                    p.insert(e);
                }
            }
            p
        };
        for (row_idx, &user) in state.user_of_row.iter().enumerate() {
            let interests = instance.interests(user);
            let threshold = instance.threshold(user);
            let y_ut = state.y[row_idx][t - 1];

            let mut candidates: Vec<TopicSet> = Vec::new();
            let paper_f = nearly_covered.intersection(interests);
            if paper_f.count() < threshold {
                candidates.push(paper_f);
            }
            // Greedy prefixes of I_u by fractional coverage, descending.
            let mut ranked: Vec<TopicIdx> = interests.iter().collect();
            ranked.sort_by(|&a, &b| {
                cov[b].partial_cmp(&cov[a]).unwrap().then(a.cmp(&b))
            });
            for j in 0..threshold.min(ranked.len() + 1) {
                candidates.push(TopicSet::from_indices(n_topics, &ranked[..j]));
            }

            for fixed in candidates {
                let key = row_key(user, t, &fixed);
                if known.contains(&key) || seen.contains(&key) {
                    continue;
                }
                let Ok(row) = make_kc_row(instance, user, t, &fixed) else {
                    continue;
                };
                let violation = row.violation(y_ut, &z_at_t);
                if violation > config.eps_sep {
                    seen.insert(key);
                    found.push((row, violation));
                }
            }
        }
    }
    found.sort_by(|(ra, va), (rb, vb)| {
        vb.partial_cmp(va)
            .unwrap()
            .then(ra.user.cmp(&rb.user))
            .then(ra.time.cmp(&rb.time))
            .then_with(|| {
                let fa: Vec<_> = ra.fixed.iter().collect();
                let fb: Vec<_> = rb.fixed.iter().collect();
                fa.cmp(&fb)
            })
    });
    found
}

/// The optimal fractional solution plus derived quantities.
#[derive(Debug, Clone)]
pub struct FractionalSolution<S> {
    /// `x[s][t-1]`.
    pub x: Vec<Vec<S>>,
    /// `y[u][t-1]`, one row per instance user.
    pub y: Vec<Vec<S>>,
    /// `z[s][t-1]`.
    pub z: Vec<Vec<S>>,
    /// `OPT_LP = sum_u sum_t (1 - y_ut)`.
    pub objective: S,
    /// Per-user half-time `t_u* = max{t : y_ut <= 1/2}` (0 when even
    /// `y_u1` exceeds one half).
    pub t_star: Vec<usize>,
    /// Knapsack-cover rows generated, in generation order, with the
    /// violation observed when added.
    pub generated: Vec<(KnapsackRow, S)>,
    /// Row-generation rounds used.
    pub rounds: usize,
    /// Total simplex pivots.
    pub pivots: usize,
}

impl<S: Scalar> FractionalSolution<S> {
    pub fn n_times(&self) -> usize {
        self.z.first().map_or(0, |zs| zs.len())
    }

    /// Half-time of user `u`.
    pub fn half_time(&self, u: UserIdx) -> usize {
        half_time_of(&self.y[u], S::FEAS_TOL)
    }

    /// Debug table of the generated rows: user, time, F, violation.
    pub fn dump_generated_rows(&self, instance: &Instance) -> String {
        use std::fmt::Write;
        let mut out = String::from("user\tt\tF\tviolation\n");
        for (row, violation) in &self.generated {
            let topics: Vec<&str> = row
                .fixed
                .iter()
                .map(|e| instance.topic_ids()[e].as_str())
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{{{}}}\t{:.3e}",
                instance.user_ids()[row.user],
                row.time,
                topics.join(","),
                violation.to_f64_lossy()
            );
        }
        out
    }
}

/// Largest `t` with `y_t <= 1/2` (within tolerance), scanning the
/// monotone `y` row; 0 when even the first step exceeds one half.
pub fn half_time_of<S: Scalar>(y_row: &[S], tol: S) -> usize {
    let half = S::from_f64_lossy(0.5);
    let mut best = 0;
    for (i, &v) in y_row.iter().enumerate() {
        if v <= half + tol {
            best = i + 1;
        }
    }
    best
}

struct UserClasses {
    /// Representative instance user per row.
    rep: Vec<UserIdx>,
    /// Multiplicity per row.
    weight: Vec<usize>,
    /// Row of each instance user.
    row_of_user: Vec<usize>,
}

fn user_classes(instance: &Instance, dedupe: bool) -> UserClasses {
    if !dedupe {
        return UserClasses {
            rep: (0..instance.n_users()).collect(),
            weight: vec![1; instance.n_users()],
            row_of_user: (0..instance.n_users()).collect(),
        };
    }
    let mut rep = Vec::new();
    let mut weight = Vec::new();
    let mut row_of_user = vec![0usize; instance.n_users()];
    let mut index: std::collections::HashMap<(TopicSet, usize), usize> =
        std::collections::HashMap::new();
    for u in 0..instance.n_users() {
        let key = (instance.interests(u).clone(), instance.threshold(u));
        match index.get(&key) {
            Some(&row) => {
                weight[row] += 1;
                row_of_user[u] = row;
            }
            None => {
                let row = rep.len();
                index.insert(key, row);
                rep.push(u);
                weight.push(1);
                row_of_user[u] = row;
            }
        }
    }
    UserClasses {
        rep,
        weight,
        row_of_user,
    }
}

/// Solve the relaxation by row generation: solve, separate at the
/// doubling times, add violated rows, repeat. The returned objective is
/// a valid lower bound on the integral optimum whether or not the loop
/// separated every possible row.
pub fn solve_relaxation<S: Scalar>(
    instance: &Instance,
    config: &RelaxConfig<S>,
) -> Result<FractionalSolution<S>, RelaxError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(RelaxError::InvalidInstance(violations));
    }
    let n = instance.n_docs();
    if n == 0 {
        return Err(RelaxError::EmptyInstance);
    }
    let classes = user_classes(instance, config.dedupe_users);
    let weights: Vec<S> = classes
        .weight
        .iter()
        .map(|&w| S::from_usize_lossy(w))
        .collect();
    let (lp, vars) = build_weighted::<S>(instance, &weights);
    let opts = SolveOptions {
        tolerance: config.eps_feas,
        iteration_cap: config.iteration_cap,
    };
    let mut solver = Solver::new(&lp, &opts);
    let mut generated: Vec<(KnapsackRow, S)> = Vec::new();
    let mut known: HashSet<(UserIdx, usize, TopicSet)> = HashSet::new();
    let times = if config.all_times {
        (1..=n).collect()
    } else {
        doubling_times(n)
    };
    let mut rounds = 0;

    loop {
        match solver.optimize() {
            LpStatus::Optimal => {}
            status => return Err(RelaxError::LpFailed(status)),
        }
        rounds += 1;

        let y_rows: Vec<Vec<S>> = (0..classes.rep.len())
            .map(|u| (1..=n).map(|t| solver.value(vars.y(u, t))).collect())
            .collect();
        let z_rows: Vec<Vec<S>> = (0..n)
            .map(|s| (1..=n).map(|t| solver.value(vars.z(s, t))).collect())
            .collect();
        let state = SeparationState {
            y: &y_rows,
            z: &z_rows,
            user_of_row: &classes.rep,
        };
        let violated = separate(instance, &state, &times, config, &known);
        if violated.is_empty() {
            let x_rows: Vec<Vec<S>> = (0..n)
                .map(|s| (1..=n).map(|t| solver.value(vars.x(s, t))).collect())
                .collect();
            return assemble(
                instance, config, &classes, x_rows, y_rows, z_rows, generated, rounds,
                solver.iterations(),
            );
        }
        if rounds >= config.max_rounds {
            return Err(RelaxError::RowGenerationCap(config.max_rounds));
        }
        let specs: Vec<RowSpec<S>> = violated
            .iter()
            .map(|(row, _)| {
                let y_owner = classes.row_of_user[row.user];
                row.to_row_spec(&vars, y_owner)
            })
            .collect();
        solver.add_rows(&specs);
        for (row, violation) in violated {
            known.insert(row_key(row.user, row.time, &row.fixed));
            generated.push((row, violation));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: Scalar>(
    instance: &Instance,
    config: &RelaxConfig<S>,
    classes: &UserClasses,
    x: Vec<Vec<S>>,
    y_rows: Vec<Vec<S>>,
    z: Vec<Vec<S>>,
    generated: Vec<(KnapsackRow, S)>,
    rounds: usize,
    pivots: usize,
) -> Result<FractionalSolution<S>, RelaxError> {
    let n = instance.n_docs();
    // Expand class rows back to per-user rows.
    let y: Vec<Vec<S>> = (0..instance.n_users())
        .map(|u| y_rows[classes.row_of_user[u]].clone())
        .collect();
    let mut objective = S::zero();
    for yu in &y {
        for &v in yu {
            objective += S::one() - v;
        }
    }
    let t_star: Vec<usize> = y
        .iter()
        .map(|yu| half_time_of(yu, config.eps_feas))
        .collect();

    // Structural sanity: z monotone with unit mass per step, y monotone,
    // and the half-time bound. All are implied by the rows; breaches
    // mean solver trouble, not caller error.
    let tol = config.eps_feas * S::from_f64_lossy(100.0);
    for t in 1..=n {
        let mass: S = (0..n).map(|s| z[s][t - 1]).sum();
        if (mass - S::from_usize_lossy(t)).abs() > tol * S::from_usize_lossy(n.max(4)) {
            return Err(RelaxError::Internal(format!(
                "z mass at t={t} is {} (expected {t})",
                mass.to_f64_lossy()
            )));
        }
        for zs in &z {
            if t > 1 && zs[t - 1] < zs[t - 2] - tol {
                return Err(RelaxError::Internal("z not monotone".into()));
            }
        }
    }
    for yu in &y {
        for t in 2..=n {
            if yu[t - 1] < yu[t - 2] - tol {
                return Err(RelaxError::Internal("y not monotone".into()));
            }
        }
    }
    let half_sum: S = t_star
        .iter()
        .map(|&t| S::from_usize_lossy(t))
        .sum::<S>()
        * S::from_f64_lossy(0.5);
    if half_sum > objective + tol * S::from_usize_lossy(instance.n_users().max(4)) {
        return Err(RelaxError::Internal(format!(
            "half-time bound breached: 0.5*sum t* = {} > OPT_LP = {}",
            half_sum.to_f64_lossy(),
            objective.to_f64_lossy()
        )));
    }
    Ok(FractionalSolution {
        x,
        y,
        z,
        objective,
        t_star,
        generated,
        rounds,
        pivots,
    })
}

/// The integral `(x, y, z)` point of a permutation, for validity checks
/// against the knapsack-cover family.
#[derive(Debug, Clone)]
pub struct IntegralPoint {
    /// `x[s][t-1]` in `{0,1}`.
    pub x: Vec<Vec<u8>>,
    /// `y[u][t-1]` in `{0,1}`.
    pub y: Vec<Vec<u8>>,
    /// `z[s][t-1]` in `{0,1}`.
    pub z: Vec<Vec<u8>>,
}

pub fn integral_point(instance: &Instance, order: &[DocIdx]) -> IntegralPoint {
    let n = instance.n_docs();
    let mut x = vec![vec![0u8; n]; n];
    let mut z = vec![vec![0u8; n]; n];
    for (pos, &s) in order.iter().enumerate() {
        x[s][pos] = 1;
        for t in pos..n {
            z[s][t] = 1;
        }
    }
    let mut y = vec![vec![0u8; n]; instance.n_users()];
    let mut state = crate::model::CoverageState::new(instance);
    for (pos, &s) in order.iter().enumerate() {
        state.add_doc(instance, s);
        for u in 0..instance.n_users() {
            if state.satisfied(instance, u) {
                y[u][pos] = 1;
            }
        }
    }
    IntegralPoint { x, y, z }
}

/// Exact integer slack of a knapsack-cover row at an integral point;
/// nonnegative means satisfied.
pub fn integral_row_slack(row: &KnapsackRow, point: &IntegralPoint) -> i64 {
    let t = row.time;
    let y = point.y[row.user][t - 1] as i64;
    let need = row.need as i64;
    let mut rhs = 0i64;
    for &s in &row.t1 {
        rhs += need * point.z[s][t - 1] as i64;
    }
    for &(s, c) in &row.t2_coeffs {
        rhs += c as i64 * point.z[s][t - 1] as i64;
    }
    rhs - need * y
}
