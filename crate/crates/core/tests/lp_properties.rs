//! Cross-checks of the simplex solver against brute-force vertex
//! enumeration on small programs.

use proptest::prelude::*;

use rdc_core::lp::{self, Cmp, LinearProgram, LpStatus, RowSpec, SolveOptions};

/// Solve a square linear system by Gaussian elimination with partial
/// pivoting. Returns `None` when (numerically) singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[derive(Debug)]
struct TestLp {
    obj: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
}

impl TestLp {
    fn to_program(&self) -> LinearProgram<f64> {
        let mut lp = LinearProgram::new();
        for (j, &c) in self.obj.iter().enumerate() {
            lp.add_var(c, 0.0, self.upper[j]).unwrap();
        }
        for (coeffs, cmp, rhs) in &self.rows {
            let sparse: Vec<(usize, f64)> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(j, &c)| (j, c))
                .collect();
            lp.add_row(RowSpec::new(sparse, *cmp, *rhs)).unwrap();
        }
        lp
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let eps = 1e-7;
        for (j, &v) in x.iter().enumerate() {
            if v < -eps || v > self.upper[j] + eps {
                return false;
            }
        }
        for (coeffs, cmp, rhs) in &self.rows {
            let lhs: f64 = coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            let ok = match cmp {
                Cmp::Le => lhs <= rhs + eps,
                Cmp::Ge => lhs >= rhs - eps,
                Cmp::Eq => (lhs - rhs).abs() <= eps,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Minimum objective over all vertices (basic feasible points) of
    /// the polytope, brute-forced from every n-subset of tight
    /// constraints.
    fn enumerate_optimum(&self) -> Option<f64> {
        let n = self.obj.len();
        // Candidate tight constraints: rows, lower bounds, upper bounds.
        enum C<'a> {
            Row(&'a Vec<f64>, f64),
            Lower(usize),
            Upper(usize),
        }
        let mut cands: Vec<C> = Vec::new();
        for (coeffs, _, rhs) in &self.rows {
            cands.push(C::Row(coeffs, *rhs));
        }
        for j in 0..n {
            cands.push(C::Lower(j));
            if self.upper[j].is_finite() {
                cands.push(C::Upper(j));
            }
        }
        let mut best: Option<f64> = None;
        let m = cands.len();
        let mut pick = vec![0usize; n];
        fn combos(
            start: usize,
            depth: usize,
            n: usize,
            m: usize,
            pick: &mut Vec<usize>,
            visit: &mut impl FnMut(&[usize]),
        ) {
            if depth == n {
                visit(pick);
                return;
            }
            for i in start..m {
                pick[depth] = i;
                combos(i + 1, depth + 1, n, m, pick, visit);
            }
        }
        let mut visit = |subset: &[usize]| {
            let mut a = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for &ci in subset {
                match &cands[ci] {
                    C::Row(coeffs, rhs) => {
                        a.push((*coeffs).clone());
                        b.push(*rhs);
                    }
                    C::Lower(j) => {
                        let mut row = vec![0.0; n];
                        row[*j] = 1.0;
                        a.push(row);
                        b.push(0.0);
                    }
                    C::Upper(j) => {
                        let mut row = vec![0.0; n];
                        row[*j] = 1.0;
                        a.push(row);
                        b.push(self.upper[*j]);
                    }
                }
            }
            if let Some(x) = solve_square(a, b) {
                if self.feasible(&x) {
                    let obj: f64 = self.obj.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
        };
        combos(0, 0, n, m, &mut pick, &mut visit);
        best
    }
}

fn lp_strategy() -> impl Strategy<Value = TestLp> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(n_vars, n_rows)| {
        let obj = proptest::collection::vec(-3i8..=3, n_vars);
        let upper = proptest::collection::vec(1u8..=3, n_vars);
        let rows = proptest::collection::vec(
            (
                proptest::collection::vec(-2i8..=2, n_vars),
                0u8..=2,
                -2i8..=4,
            ),
            n_rows,
        );
        (obj, upper, rows).prop_map(|(obj, upper, rows)| TestLp {
            obj: obj.into_iter().map(|c| c as f64).collect(),
            upper: upper.into_iter().map(|u| u as f64).collect(),
            rows: rows
                .into_iter()
                .map(|(coeffs, cmp, rhs)| {
                    let cmp = match cmp {
                        0 => Cmp::Le,
                        1 => Cmp::Ge,
                        _ => Cmp::Eq,
                    };
                    (
                        coeffs.into_iter().map(|c| c as f64).collect(),
                        cmp,
                        rhs as f64 / 2.0,
                    )
                })
                .collect(),
        })
    })
}

proptest! {
    /// The simplex optimum matches brute-force vertex enumeration
    /// within 10x the feasibility tolerance.
    #[test]
    fn matches_vertex_enumeration(tlp in lp_strategy()) {
        let lp = tlp.to_program();
        let sol = lp::solve(&lp, &SolveOptions::default());
        match tlp.enumerate_optimum() {
            Some(expected) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!(
                    (sol.objective - expected).abs() <= 1e-6,
                    "solver {} vs enumeration {}",
                    sol.objective,
                    expected
                );
            }
            None => {
                prop_assert_eq!(sol.status, LpStatus::Infeasible);
            }
        }
    }

    /// Adding a row never decreases a minimization optimum, and
    /// `resolve_with_rows` agrees with a fresh solve of the augmented
    /// program.
    #[test]
    fn added_row_never_helps(
        tlp in lp_strategy(),
        coeffs in proptest::collection::vec(-2i8..=2, 4),
        rhs in -2i8..=3,
    ) {
        let lp = tlp.to_program();
        let base = lp::solve(&lp, &SolveOptions::default());
        prop_assume!(base.status == LpStatus::Optimal);
        let n = tlp.obj.len();
        let row = RowSpec::new(
            coeffs[..n]
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(j, &c)| (j, c as f64))
                .collect(),
            Cmp::Ge,
            rhs as f64 / 2.0,
        );
        let resolved = lp::resolve_with_rows(&lp, &base, std::slice::from_ref(&row), &SolveOptions::default());
        let mut augmented = lp.clone();
        augmented.add_row(row).unwrap();
        let fresh = lp::solve(&augmented, &SolveOptions::default());
        prop_assert_eq!(resolved.status, fresh.status);
        if fresh.status == LpStatus::Optimal {
            prop_assert!(fresh.objective >= base.objective - 1e-6);
            prop_assert!((resolved.objective - fresh.objective).abs() <= 1e-6);
        }
    }

    /// Raising the iteration cap on an already-optimal solve changes
    /// nothing.
    #[test]
    fn higher_cap_is_stable(tlp in lp_strategy()) {
        let lp = tlp.to_program();
        let normal = lp::solve(&lp, &SolveOptions::default());
        prop_assume!(normal.status == LpStatus::Optimal);
        let roomy = lp::solve(
            &lp,
            &SolveOptions { iteration_cap: 10_000_000, ..SolveOptions::default() },
        );
        prop_assert_eq!(roomy.status, LpStatus::Optimal);
        prop_assert_eq!(normal.objective, roomy.objective);
        prop_assert_eq!(normal.values, roomy.values);
    }
}
