//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every constraint row gets a row variable (`a.x + r = b` with `r`
//! bounded by the comparator), so the initial basis is the identity and
//! infeasibility lives entirely in out-of-bounds basic values. Phase 1
//! drives those back into their boxes with a composite infeasibility
//! objective recomputed each iteration; phase 2 is the usual reduced-cost
//! walk. Pricing is most-negative first with a switch to Bland's rule
//! after a stall, which keeps solves deterministic and cycle-free.
//!
//! [`Solver::add_rows`] appends rows to a solved tableau: the new rows
//! are eliminated against the current basis and their row variables
//! enter the basis (usually out of bounds), so the next `optimize` call
//! warm-starts from the previous optimum instead of from scratch.

use crate::scalar::Scalar;

use super::{Cmp, LinearProgram, LpSolution, LpStatus, RowSpec, SolveOptions, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// How many consecutive non-improving pivots before switching to
/// Bland's rule.
const STALL_LIMIT: u32 = 256;
/// Full recompute period for row-variable values.
const REFRESH_PERIOD: usize = 256;

pub struct Solver<S> {
    n_struct: usize,
    /// Structural objective, padded with zeros for row variables.
    obj: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    /// Original rows (structural coefficients only) for refreshes and
    /// row addition.
    rows: Vec<RowSpec<S>>,
    offset: S,

    /// Dense tableau, one `Vec` per row over all variables.
    tab: Vec<Vec<S>>,
    basic: Vec<VarId>,
    vstate: Vec<VState>,
    xval: Vec<S>,
    /// Reduced costs of the true objective, maintained through both
    /// phases.
    dj: Vec<S>,

    tolerance: S,
    pivot_eps: S,
    iteration_cap: usize,
    iterations: usize,
    scratch: Vec<S>,
    status: Option<LpStatus>,
}

enum Step<S> {
    /// Entering variable travels to its opposite bound.
    Flip { delta: S },
    /// Basic variable in `row` blocks; it leaves at `to_upper`.
    Pivot { row: usize, delta: S, to_upper: bool },
    Unbounded,
}

impl<S: Scalar> Solver<S> {
    pub fn new(lp: &LinearProgram<S>, opts: &SolveOptions<S>) -> Self {
        let n_struct = lp.n_vars();
        let mut solver = Solver {
            n_struct,
            obj: (0..n_struct).map(|v| lp.objective_coeff(v)).collect(),
            lower: (0..n_struct).map(|v| lp.bounds(v).0).collect(),
            upper: (0..n_struct).map(|v| lp.bounds(v).1).collect(),
            rows: Vec::new(),
            offset: lp.objective_offset(),
            tab: Vec::new(),
            basic: Vec::new(),
            vstate: (0..n_struct)
                .map(|v| {
                    if lp.bounds(v).0.is_finite() {
                        VState::AtLower
                    } else {
                        VState::AtUpper
                    }
                })
                .collect(),
            xval: (0..n_struct)
                .map(|v| {
                    let (lo, hi) = lp.bounds(v);
                    if lo.is_finite() {
                        lo
                    } else {
                        hi
                    }
                })
                .collect(),
            dj: (0..n_struct).map(|v| lp.objective_coeff(v)).collect(),
            tolerance: opts.tolerance,
            pivot_eps: opts.tolerance * S::from_f64_lossy(1e-2),
            iteration_cap: opts.iteration_cap,
            iterations: 0,
            scratch: Vec::new(),
            status: None,
        };
        solver.add_rows(lp.rows());
        solver
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn row_var_bounds(cmp: Cmp) -> (S, S) {
        match cmp {
            Cmp::Le => (S::zero(), S::infinity()),
            Cmp::Ge => (S::neg_infinity(), S::zero()),
            Cmp::Eq => (S::zero(), S::zero()),
        }
    }

    /// Append rows, eliminating them against the current basis. Their
    /// row variables become basic; the next `optimize` restores
    /// feasibility from there.
    pub fn add_rows(&mut self, rows: &[RowSpec<S>]) {
        if rows.is_empty() {
            return;
        }
        let n_old = self.n_struct + self.rows.len();
        let n_new = n_old + rows.len();
        for row in &mut self.tab {
            row.resize(n_new, S::zero());
        }
        for (offset, spec) in rows.iter().enumerate() {
            let rv = n_old + offset;
            let (lo, hi) = Self::row_var_bounds(spec.cmp);
            self.obj.push(S::zero());
            self.lower.push(lo);
            self.upper.push(hi);
            self.dj.push(S::zero());

            // Dense original row over all columns, row variable included.
            let mut dense = vec![S::zero(); n_new];
            for &(v, c) in &spec.coeffs {
                dense[v] += c;
            }
            dense[rv] = S::one();
            // Eliminate basic columns: basic columns of the tableau are
            // unit vectors, so one pass suffices.
            let mut activity = S::zero();
            for &(v, c) in &spec.coeffs {
                activity += c * self.xval[v];
            }
            for j in 0..n_old {
                let c = dense[j];
                if c == S::zero() {
                    continue;
                }
                if let VState::Basic(r) = self.vstate[j] {
                    let pivot_row = &self.tab[r];
                    for (d, p) in dense.iter_mut().zip(pivot_row.iter()) {
                        *d = *d - c * *p;
                    }
                    dense[j] = S::zero();
                }
            }
            let row_idx = self.tab.len();
            self.tab.push(dense);
            self.basic.push(rv);
            self.vstate.push(VState::Basic(row_idx));
            self.xval.push(spec.rhs - activity);
            self.rows.push(spec.clone());
        }
        self.status = None;
    }

    /// Recompute row-variable values exactly from the structural point.
    fn refresh_row_values(&mut self) {
        for (i, spec) in self.rows.iter().enumerate() {
            let rv = self.n_struct + i;
            let mut activity = S::zero();
            for &(v, c) in &spec.coeffs {
                activity += c * self.xval[v];
            }
            // Nonbasic row variables sit exactly on a bound; leave them
            // pinned.
            if let VState::Basic(_) = self.vstate[rv] {
                self.xval[rv] = spec.rhs - activity;
            }
        }
    }

    fn infeasible_rows(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for (i, &b) in self.basic.iter().enumerate() {
            let x = self.xval[b];
            if x > self.upper[b] + self.tolerance {
                out.push((i, true));
            } else if x < self.lower[b] - self.tolerance {
                out.push((i, false));
            }
        }
        out
    }

    fn total_infeasibility(&self, infeasible: &[(usize, bool)]) -> S {
        let mut total = S::zero();
        for &(i, above) in infeasible {
            let b = self.basic[i];
            total += if above {
                self.xval[b] - self.upper[b]
            } else {
                self.lower[b] - self.xval[b]
            };
        }
        total
    }

    /// Gradient of the total infeasibility with respect to increasing
    /// each variable.
    fn phase1_gradient(&self, infeasible: &[(usize, bool)]) -> Vec<S> {
        let n = self.xval.len();
        let mut grad = vec![S::zero(); n];
        for &(i, above) in infeasible {
            let row = &self.tab[i];
            if above {
                for (g, t) in grad.iter_mut().zip(row.iter()) {
                    *g = *g - *t;
                }
            } else {
                for (g, t) in grad.iter_mut().zip(row.iter()) {
                    *g = *g + *t;
                }
            }
        }
        grad
    }

    fn is_fixed(&self, v: VarId) -> bool {
        self.lower[v] == self.upper[v]
    }

    /// Pick an entering variable from pricing vector `price`: a variable
    /// at lower bound with negative price or at upper bound with
    /// positive price. Returns `(var, dir)` with `dir = +1` or `-1`.
    fn choose_entering(&self, price: &[S], bland: bool) -> Option<(VarId, S)> {
        let mut best: Option<(VarId, S, S)> = None;
        for v in 0..self.xval.len() {
            let dir = match self.vstate[v] {
                VState::Basic(_) => continue,
                VState::AtLower => {
                    if price[v] < -self.tolerance {
                        S::one()
                    } else {
                        continue;
                    }
                }
                VState::AtUpper => {
                    if price[v] > self.tolerance {
                        -S::one()
                    } else {
                        continue;
                    }
                }
            };
            if self.is_fixed(v) {
                continue;
            }
            if bland {
                return Some((v, dir));
            }
            let score = price[v].abs();
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((v, dir, score)),
            }
        }
        best.map(|(v, dir, _)| (v, dir))
    }

    /// Bounded ratio test. `phase1` allows infeasible basics to travel to
    /// (and stop exactly at) their violated bound; feasible basics block
    /// at whichever bound they approach.
    fn ratio_test(&self, entering: VarId, dir: S, phase1: bool, bland: bool) -> Step<S> {
        let own_range = self.upper[entering] - self.lower[entering];
        let mut best_delta = if own_range.is_finite() {
            own_range
        } else {
            S::infinity()
        };
        let mut best: Option<(usize, bool, S)> = None; // row, to_upper, |alpha|

        for (i, row) in self.tab.iter().enumerate() {
            let alpha = row[entering];
            if alpha.abs() <= self.pivot_eps {
                continue;
            }
            let b = self.basic[i];
            let rate = -alpha * dir;
            let x = self.xval[b];
            let above = phase1 && x > self.upper[b] + self.tolerance;
            let below = phase1 && x < self.lower[b] - self.tolerance;
            let (delta, to_upper) = if above {
                if rate < S::zero() {
                    ((x - self.upper[b]) / -rate, true)
                } else {
                    continue;
                }
            } else if below {
                if rate > S::zero() {
                    ((self.lower[b] - x) / rate, false)
                } else {
                    continue;
                }
            } else if rate > S::zero() {
                if self.upper[b].is_finite() {
                    (((self.upper[b] - x).max(S::zero())) / rate, true)
                } else {
                    continue;
                }
            } else if self.lower[b].is_finite() {
                (((x - self.lower[b]).max(S::zero())) / -rate, false)
            } else {
                continue;
            };
            let improves = if delta < best_delta - self.pivot_eps {
                true
            } else if delta <= best_delta + self.pivot_eps {
                match best {
                    None => true,
                    Some((bi, _, ba)) => {
                        if bland {
                            self.basic[i] < self.basic[bi]
                        } else {
                            alpha.abs() > ba
                        }
                    }
                }
            } else {
                false
            };
            if improves {
                best_delta = best_delta.min(delta);
                best = Some((i, to_upper, alpha.abs()));
            }
        }

        match best {
            Some((row, to_upper, _)) => Step::Pivot {
                row,
                delta: best_delta.max(S::zero()),
                to_upper,
            },
            None if best_delta.is_finite() => Step::Flip { delta: best_delta },
            None => Step::Unbounded,
        }
    }

    fn apply_step(&mut self, entering: VarId, dir: S, step: &Step<S>) {
        let delta = match *step {
            Step::Flip { delta } => delta,
            Step::Pivot { delta, .. } => delta,
            Step::Unbounded => unreachable!(),
        };
        if delta > S::zero() {
            for (i, row) in self.tab.iter().enumerate() {
                let alpha = row[entering];
                if alpha != S::zero() {
                    let b = self.basic[i];
                    self.xval[b] = self.xval[b] - alpha * dir * delta;
                }
            }
            self.xval[entering] = self.xval[entering] + dir * delta;
        }
        match *step {
            Step::Flip { .. } => {
                self.vstate[entering] = match self.vstate[entering] {
                    VState::AtLower => {
                        self.xval[entering] = self.upper[entering];
                        VState::AtUpper
                    }
                    VState::AtUpper => {
                        self.xval[entering] = self.lower[entering];
                        VState::AtLower
                    }
                    VState::Basic(_) => unreachable!(),
                };
            }
            Step::Pivot { row, to_upper, .. } => {
                let leaving = self.basic[row];
                // Pin the leaving variable exactly on the bound it hit.
                self.xval[leaving] = if to_upper {
                    self.upper[leaving]
                } else {
                    self.lower[leaving]
                };
                self.vstate[leaving] = if to_upper {
                    VState::AtUpper
                } else {
                    VState::AtLower
                };
                self.pivot(row, entering);
                self.basic[row] = entering;
                self.vstate[entering] = VState::Basic(row);
            }
            Step::Unbounded => unreachable!(),
        }
    }

    fn pivot(&mut self, prow: usize, pcol: VarId) {
        let p = self.tab[prow][pcol];
        debug_assert!(p.abs() > S::zero());
        let inv = S::one() / p;
        for t in self.tab[prow].iter_mut() {
            *t = *t * inv;
        }
        self.tab[prow][pcol] = S::one();
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.tab[prow]);
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == prow {
                continue;
            }
            let factor = row[pcol];
            if factor != S::zero() {
                for (t, s) in row.iter_mut().zip(self.scratch.iter()) {
                    *t = *t - factor * *s;
                }
                row[pcol] = S::zero();
            }
        }
        let factor = self.dj[pcol];
        if factor != S::zero() {
            for (d, s) in self.dj.iter_mut().zip(self.scratch.iter()) {
                *d = *d - factor * *s;
            }
            self.dj[pcol] = S::zero();
        }
    }

    /// Run phases 1 and 2 to completion.
    pub fn optimize(&mut self) -> LpStatus {
        let mut bland = false;
        let mut stall: u32 = 0;
        let mut last_metric = S::infinity();
        let mut refreshes_after_opt = 0usize;

        loop {
            if self.iterations >= self.iteration_cap {
                self.status = Some(LpStatus::IterationLimit);
                return LpStatus::IterationLimit;
            }
            if self.iterations % REFRESH_PERIOD == REFRESH_PERIOD - 1 {
                self.refresh_row_values();
            }
            let infeasible = self.infeasible_rows();
            if !infeasible.is_empty() {
                // Phase 1 step.
                let metric = self.total_infeasibility(&infeasible);
                if metric < last_metric - self.tolerance {
                    stall = 0;
                    bland = false;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        bland = true;
                    }
                }
                last_metric = metric;

                let grad = self.phase1_gradient(&infeasible);
                let Some((entering, dir)) = self.choose_entering(&grad, bland) else {
                    self.status = Some(LpStatus::Infeasible);
                    return LpStatus::Infeasible;
                };
                let step = self.ratio_test(entering, dir, true, bland);
                match step {
                    Step::Unbounded => {
                        // The infeasibility gradient is negative along an
                        // unblocked ray; the violated rows themselves
                        // block, so this cannot happen for a genuine
                        // eligible column. Treat as numerical trouble.
                        self.status = Some(LpStatus::IterationLimit);
                        return LpStatus::IterationLimit;
                    }
                    step => self.apply_step(entering, dir, &step),
                }
                self.iterations += 1;
            } else {
                // Phase 2 step.
                let metric = self.objective_value();
                if metric < last_metric - self.tolerance {
                    stall = 0;
                    bland = false;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        bland = true;
                    }
                }
                last_metric = metric;

                let dj = std::mem::take(&mut self.dj);
                let entering = self.choose_entering(&dj, bland);
                self.dj = dj;
                let Some((entering, dir)) = entering else {
                    // Optimal for the maintained values; verify the row
                    // variables against the original rows before
                    // declaring victory.
                    self.refresh_row_values();
                    if self.infeasible_rows().is_empty() {
                        self.status = Some(LpStatus::Optimal);
                        return LpStatus::Optimal;
                    }
                    refreshes_after_opt += 1;
                    if refreshes_after_opt > 16 {
                        self.status = Some(LpStatus::IterationLimit);
                        return LpStatus::IterationLimit;
                    }
                    continue;
                };
                let step = self.ratio_test(entering, dir, false, bland);
                match step {
                    Step::Unbounded => {
                        self.status = Some(LpStatus::Unbounded);
                        return LpStatus::Unbounded;
                    }
                    step => self.apply_step(entering, dir, &step),
                }
                self.iterations += 1;
            }
        }
    }

    pub fn objective_value(&self) -> S {
        let mut total = self.offset;
        for v in 0..self.n_struct {
            total += self.obj[v] * self.xval[v];
        }
        total
    }

    pub fn value(&self, v: VarId) -> S {
        self.xval[v]
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    pub fn solution(&self) -> LpSolution<S> {
        LpSolution {
            status: self.status.unwrap_or(LpStatus::IterationLimit),
            values: self.xval[..self.n_struct].to_vec(),
            objective: self.objective_value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warm_start_after_add_rows_matches_fresh_solve() {
        // minimize -x - 2y over the unit box, then cut with x + y <= 1.
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(-1.0, 0.0, 1.0).unwrap();
        let y = lp.add_var(-2.0, 0.0, 1.0).unwrap();
        let opts = SolveOptions::default();
        let mut solver = Solver::new(&lp, &opts);
        assert_eq!(solver.optimize(), LpStatus::Optimal);
        assert!((solver.objective_value() + 3.0).abs() < 1e-9);

        let cut = RowSpec::new(vec![(x, 1.0), (y, 1.0)], Cmp::Le, 1.0);
        solver.add_rows(std::slice::from_ref(&cut));
        assert_eq!(solver.optimize(), LpStatus::Optimal);
        assert!((solver.objective_value() + 2.0).abs() < 1e-7);

        lp.add_row(cut).unwrap();
        let fresh = super::super::solve(&lp, &opts);
        assert!((fresh.objective - solver.objective_value()).abs() < 1e-7);
    }

    #[test]
    fn repeated_row_addition_tightens_monotonically() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 10.0).unwrap();
        let opts = SolveOptions::default();
        let mut solver = Solver::new(&lp, &opts);
        solver.optimize();
        let mut last = solver.objective_value();
        for k in 1..=5 {
            solver.add_rows(&[RowSpec::new(vec![(x, 1.0)], Cmp::Ge, k as f64)]);
            assert_eq!(solver.optimize(), LpStatus::Optimal);
            let obj = solver.objective_value();
            assert!(obj >= last - 1e-9);
            assert!((obj - k as f64).abs() < 1e-7);
            last = obj;
        }
    }
}
