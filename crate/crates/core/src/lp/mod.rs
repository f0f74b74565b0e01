//! Self-contained linear-program solver with incremental row addition.
//!
//! Minimization only. Variables carry box bounds (`[0,1]`, `[0,∞)`, or
//! anything with at least one finite bound); rows are sparse with a
//! comparator and right-hand side. The solver is a bounded-variable
//! primal simplex on a dense tableau: deterministic, dependency-free,
//! and sized for desk-scale programs (a few thousand rows).
//!
//! [`solve`] is a pure function; [`Solver`] keeps the tableau alive so a
//! row-generation loop can append violated rows and re-optimize from the
//! previous basis instead of starting over.

mod simplex;

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;

pub use simplex::Solver;

/// Index of a declared variable.
pub type VarId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("row references undeclared variable {0}")]
    UnknownVariable(VarId),
    #[error("variable bounds are empty (lower > upper)")]
    EmptyBounds,
    #[error("variable needs at least one finite bound")]
    FreeVariable,
}

/// Row comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

/// A constraint row: sparse coefficients, comparator, right-hand side.
#[derive(Debug, Clone)]
pub struct RowSpec<S> {
    pub coeffs: Vec<(VarId, S)>,
    pub cmp: Cmp,
    pub rhs: S,
}

impl<S> RowSpec<S> {
    pub fn new(coeffs: Vec<(VarId, S)>, cmp: Cmp, rhs: S) -> Self {
        RowSpec { coeffs, cmp, rhs }
    }
}

/// A linear program under construction (minimization).
#[derive(Debug, Clone, Default)]
pub struct LinearProgram<S> {
    obj: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    names: Vec<Option<String>>,
    rows: Vec<RowSpec<S>>,
    offset: S,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new() -> Self {
        LinearProgram {
            obj: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            names: Vec::new(),
            rows: Vec::new(),
            offset: S::zero(),
        }
    }

    /// Declare a variable with objective coefficient and bounds.
    pub fn add_var(&mut self, obj: S, lower: S, upper: S) -> Result<VarId, LpError> {
        if lower > upper {
            return Err(LpError::EmptyBounds);
        }
        if !lower.is_finite() && !upper.is_finite() {
            return Err(LpError::FreeVariable);
        }
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(None);
        Ok(self.obj.len() - 1)
    }

    pub fn add_named_var(
        &mut self,
        name: impl Into<String>,
        obj: S,
        lower: S,
        upper: S,
    ) -> Result<VarId, LpError> {
        let v = self.add_var(obj, lower, upper)?;
        self.names[v] = Some(name.into());
        Ok(v)
    }

    pub fn add_row(&mut self, row: RowSpec<S>) -> Result<usize, LpError> {
        for &(v, _) in &row.coeffs {
            if v >= self.obj.len() {
                return Err(LpError::UnknownVariable(v));
            }
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    /// Constant added to the reported objective value.
    pub fn set_objective_offset(&mut self, offset: S) {
        self.offset = offset;
    }

    pub fn objective_offset(&self) -> S {
        self.offset
    }

    pub fn n_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[RowSpec<S>] {
        &self.rows
    }

    pub fn objective_coeff(&self, v: VarId) -> S {
        self.obj[v]
    }

    pub fn bounds(&self, v: VarId) -> (S, S) {
        (self.lower[v], self.upper[v])
    }

    fn var_name(&self, v: VarId) -> String {
        match &self.names[v] {
            Some(n) => n.clone(),
            None => format!("v{v}"),
        }
    }

    /// Dump in LP text format for cross-checking against external solvers.
    pub fn dump_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (v, &c) in self.obj.iter().enumerate() {
            if c != S::zero() {
                write_term(&mut out, c, &self.var_name(v), first);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        if self.offset != S::zero() {
            let _ = write!(out, " + {}", self.offset);
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            let mut first = true;
            for &(v, c) in &row.coeffs {
                if c != S::zero() {
                    write_term(&mut out, c, &self.var_name(v), first);
                    first = false;
                }
            }
            if first {
                out.push_str(" 0");
            }
            let _ = writeln!(out, " {} {}", row.cmp.symbol(), row.rhs);
        }
        out.push_str("Bounds\n");
        for v in 0..self.n_vars() {
            let name = self.var_name(v);
            let (lo, hi) = (self.lower[v], self.upper[v]);
            if hi.is_finite() {
                let _ = writeln!(out, " {lo} <= {name} <= {hi}");
            } else {
                let _ = writeln!(out, " {name} >= {lo}");
            }
        }
        out.push_str("End\n");
        out
    }
}

fn write_term<S: Scalar>(out: &mut String, c: S, name: &str, first: bool) {
    let sign = if c < S::zero() { "-" } else if first { "" } else { "+" };
    let mag = c.abs();
    if mag == S::one() {
        let _ = write!(out, " {sign} {name}");
    } else {
        let _ = write!(out, " {sign} {mag} {name}");
    }
}

/// Solve outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solver result: status, value per declared variable, objective value.
#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub values: Vec<S>,
    pub objective: S,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solve parameters: absolute feasibility tolerance and pivot cap.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<S> {
    pub tolerance: S,
    pub iteration_cap: usize,
}

impl<S: Scalar> Default for SolveOptions<S> {
    fn default() -> Self {
        SolveOptions {
            tolerance: S::FEAS_TOL,
            iteration_cap: 1_000_000,
        }
    }
}

/// Solve a program from scratch.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>, opts: &SolveOptions<S>) -> LpSolution<S> {
    let mut solver = Solver::new(lp, opts);
    solver.optimize();
    solver.solution()
}

/// Solve the program augmented with `new_rows`.
///
/// When the previous solution already satisfies every new row the
/// augmented optimum is unchanged and is returned directly; otherwise
/// the augmented program is solved fresh.
pub fn resolve_with_rows<S: Scalar>(
    lp: &LinearProgram<S>,
    previous: &LpSolution<S>,
    new_rows: &[RowSpec<S>],
    opts: &SolveOptions<S>,
) -> LpSolution<S> {
    if previous.status == LpStatus::Optimal {
        let all_satisfied = new_rows.iter().all(|row| {
            let activity: S = row
                .coeffs
                .iter()
                .map(|&(v, c)| c * previous.values[v])
                .sum();
            match row.cmp {
                Cmp::Le => activity <= row.rhs + opts.tolerance,
                Cmp::Ge => activity >= row.rhs - opts.tolerance,
                Cmp::Eq => (activity - row.rhs).abs() <= opts.tolerance,
            }
        });
        if all_satisfied {
            return previous.clone();
        }
    }
    let mut augmented = lp.clone();
    for row in new_rows {
        augmented
            .add_row(row.clone())
            .expect("new rows reference declared variables");
    }
    solve(&augmented, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolveOptions<f64> {
        SolveOptions::default()
    }

    #[test]
    fn single_var_lower_bounded_row() {
        // minimize x s.t. x >= 0.3, x in [0,1]
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 0.3)).unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[x] - 0.3).abs() < 1e-7);
        assert!((sol.objective - 0.3).abs() < 1e-7);
    }

    #[test]
    fn facet_split() {
        // minimize x+y s.t. x+y >= 1, x,y in [0,1]
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 1.0).unwrap();
        let y = lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0), (y, 1.0)], Cmp::Ge, 1.0))
            .unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn cover_lp_of_tiny_instance() {
        // minimize x1+x2+x3 s.t. x1+x3 >= 1, x2+x3 >= 1, x >= 0:
        // optimum 1 at the vertex x3 = 1.
        let mut lp = LinearProgram::<f64>::new();
        let inf = f64::INFINITY;
        let x1 = lp.add_var(1.0, 0.0, inf).unwrap();
        let x2 = lp.add_var(1.0, 0.0, inf).unwrap();
        let x3 = lp.add_var(1.0, 0.0, inf).unwrap();
        lp.add_row(RowSpec::new(vec![(x1, 1.0), (x3, 1.0)], Cmp::Ge, 1.0))
            .unwrap();
        lp.add_row(RowSpec::new(vec![(x2, 1.0), (x3, 1.0)], Cmp::Ge, 1.0))
            .unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.values[x3] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn resolve_keeps_satisfied_row() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 0.3)).unwrap();
        let sol = solve(&lp, &opts());
        let again = resolve_with_rows(
            &lp,
            &sol,
            &[RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 0.2)],
            &opts(),
        );
        assert_eq!(again.status, LpStatus::Optimal);
        assert!((again.objective - sol.objective).abs() < 1e-9);
    }

    #[test]
    fn resolve_moves_objective() {
        // minimize x, x in [0,1], no rows; then add x >= 0.5.
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 1.0).unwrap();
        let sol = solve(&lp, &opts());
        assert!((sol.objective - 0.0).abs() < 1e-9);
        let moved = resolve_with_rows(
            &lp,
            &sol,
            &[RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 0.5)],
            &opts(),
        );
        assert!((moved.objective - 0.5).abs() < 1e-7);
    }

    #[test]
    fn resolve_forces_both_singletons() {
        // Cover LP of the tiny instance, then pin x3 to zero: the two
        // singleton sets must both be picked, objective 1 -> 2.
        let mut lp = LinearProgram::<f64>::new();
        let inf = f64::INFINITY;
        let x1 = lp.add_var(1.0, 0.0, inf).unwrap();
        let x2 = lp.add_var(1.0, 0.0, inf).unwrap();
        let x3 = lp.add_var(1.0, 0.0, inf).unwrap();
        lp.add_row(RowSpec::new(vec![(x1, 1.0), (x3, 1.0)], Cmp::Ge, 1.0))
            .unwrap();
        lp.add_row(RowSpec::new(vec![(x2, 1.0), (x3, 1.0)], Cmp::Ge, 1.0))
            .unwrap();
        let sol = solve(&lp, &opts());
        let pinned = resolve_with_rows(
            &lp,
            &sol,
            &[RowSpec::new(vec![(x3, 1.0)], Cmp::Le, 0.0)],
            &opts(),
        );
        assert_eq!(pinned.status, LpStatus::Optimal);
        assert!((pinned.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 2.0)).unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::<f64>::new();
        lp.add_var(-1.0, 0.0, f64::INFINITY).unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_row() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(2.0, 0.0, 1.0).unwrap();
        let y = lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0), (y, 1.0)], Cmp::Eq, 1.0))
            .unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.values[y] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn objective_offset_reported() {
        let mut lp = LinearProgram::<f64>::new();
        lp.add_var(1.0, 0.0, 1.0).unwrap();
        lp.set_objective_offset(5.0);
        let sol = solve(&lp, &opts());
        assert!((sol.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn negative_cost_var_flips_to_upper() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(-3.0, 0.0, 2.0).unwrap();
        let sol = solve(&lp, &opts());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[x] - 2.0).abs() < 1e-9);
        assert!((sol.objective + 6.0).abs() < 1e-9);
    }

    #[test]
    fn dump_contains_rows_and_bounds() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_named_var("alpha", 1.0, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0)], Cmp::Ge, 0.5)).unwrap();
        let text = lp.dump_lp_text();
        assert!(text.contains("Minimize"));
        assert!(text.contains("alpha"));
        assert!(text.contains(">= 0.5"));
        assert!(text.contains("0 <= alpha <= 1"));
    }

    #[test]
    fn f32_solves_small_program() {
        let mut lp = LinearProgram::<f32>::new();
        let x = lp.add_var(1.0f32, 0.0, 1.0).unwrap();
        lp.add_row(RowSpec::new(vec![(x, 1.0f32)], Cmp::Ge, 0.25))
            .unwrap();
        let sol = solve(&lp, &SolveOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 0.25).abs() < 1e-4);
    }
}
