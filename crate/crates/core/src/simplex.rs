//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems here are tiny (a handful of columns, tens of rows), so a dense
//! tableau is both the simplest and the most auditable choice. All variables
//! are nonnegative; free variables are split by the caller.

const PIVOT_EPS: f64 = 1e-11;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { phase_one_residual: f64 },
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Stalled {
    pub iterations: usize,
}

/// `maximize c^T x  s.t.  constraints, x >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Phase-one residual above which the program is declared infeasible.
    pub feasibility_tol: f64,
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.a[r][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[row].clone();
        for (r, line) in self.a.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost^T x` over the columns in `allowed`. Returns `false`
    /// when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<bool, Stalled> {
        loop {
            self.iterations += 1;
            if self.iterations > MAX_ITERATIONS {
                return Err(Stalled {
                    iterations: self.iterations,
                });
            }
            // Reduced costs d_j = c_j - c_B^T a_j; Bland: lowest index with d_j > 0.
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for (r, &b) in self.basis.iter().enumerate() {
                    d -= cost[b] * self.a[r][j];
                }
                if d > PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                let coef = self.a[r][col];
                if coef > PIVOT_EPS {
                    let ratio = self.rhs(r) / coef;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_EPS
                                || ((ratio - lratio).abs() <= PIVOT_EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(row, col);
        }
    }
}

impl LinearProgram {
    pub fn new(n_vars: usize, objective: Vec<f64>) -> Self {
        Self {
            n_vars,
            objective,
            constraints: Vec::new(),
            feasibility_tol: 1e-9,
        }
    }

    pub fn push(&mut self, c: Constraint) {
        debug_assert_eq!(c.coeffs.len(), self.n_vars);
        self.constraints.push(c);
    }

    pub fn solve(&self) -> Result<Outcome, Stalled> {
        let n = self.n_vars;
        let m = self.constraints.len();
        // Column layout: [structural | slack/surplus | artificial].
        let n_slack = self
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let mut n_art = 0;
        let mut rows = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        for c in &self.constraints {
            let (coeffs, rel, rhs) = if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect::<Vec<_>>(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            };
            if rel != Relation::Le {
                n_art += 1;
            }
            rows.push((coeffs, rhs));
            relations.push(rel);
        }
        let cols = n + n_slack + n_art;
        let mut a = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack_at = n;
        let mut art_at = n + n_slack;
        for (r, ((coeffs, rhs), rel)) in rows.iter().zip(&relations).enumerate() {
            a[r][..n].copy_from_slice(coeffs);
            a[r][cols] = *rhs;
            match rel {
                Relation::Le => {
                    a[r][slack_at] = 1.0;
                    basis[r] = slack_at;
                    slack_at += 1;
                }
                Relation::Ge => {
                    a[r][slack_at] = -1.0;
                    slack_at += 1;
                    a[r][art_at] = 1.0;
                    basis[r] = art_at;
                    art_at += 1;
                }
                Relation::Eq => {
                    a[r][art_at] = 1.0;
                    basis[r] = art_at;
                    art_at += 1;
                }
            }
        }
        let first_art = n + n_slack;
        let mut t = Tableau {
            a,
            basis,
            cols,
            iterations: 0,
        };

        if n_art > 0 {
            let mut cost = vec![0.0; cols];
            for c in cost.iter_mut().skip(first_art) {
                *c = -1.0;
            }
            let allowed = vec![true; cols];
            t.optimize(&cost, &allowed)?;
            let residual: f64 = t
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= first_art)
                .map(|(r, _)| t.rhs(r))
                .sum();
            if residual > self.feasibility_tol {
                return Ok(Outcome::Infeasible {
                    phase_one_residual: residual,
                });
            }
            // Drive remaining (zero-level) artificials out of the basis.
            let mut r = 0;
            while r < t.a.len() {
                if t.basis[r] >= first_art {
                    let col = (0..first_art).find(|&j| t.a[r][j].abs() > PIVOT_EPS);
                    match col {
                        Some(j) => t.pivot(r, j),
                        None => {
                            // Redundant row.
                            t.a.remove(r);
                            t.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }

        let mut cost = vec![0.0; cols];
        cost[..n].copy_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
        if !t.optimize(&cost, &allowed)? {
            return Ok(Outcome::Unbounded);
        }
        let mut x = vec![0.0; n];
        for (r, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.rhs(r);
            }
        }
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(Outcome::Optimal { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6).
        let mut lp = LinearProgram::new(2, vec![3.0, 5.0]);
        lp.push(Constraint::new(vec![1.0, 0.0], Relation::Le, 4.0));
        lp.push(Constraint::new(vec![0.0, 2.0], Relation::Le, 12.0));
        lp.push(Constraint::new(vec![3.0, 2.0], Relation::Le, 18.0));
        match lp.solve().unwrap() {
            Outcome::Optimal { x, value } => {
                assert!((value - 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phase_one_detects_infeasibility() {
        let mut lp = LinearProgram::new(2, vec![1.0, 1.0]);
        lp.push(Constraint::new(vec![1.0, 1.0], Relation::Ge, 3.0));
        lp.push(Constraint::new(vec![1.0, 1.0], Relation::Le, 2.0));
        assert!(matches!(lp.solve().unwrap(), Outcome::Infeasible { .. }));
    }

    #[test]
    fn equality_and_negative_rhs() {
        // x + y = 2, x - y >= -4 (i.e. y - x <= 4), max y  ->  y = 2 at x = 0.
        let mut lp = LinearProgram::new(2, vec![0.0, 1.0]);
        lp.push(Constraint::new(vec![1.0, 1.0], Relation::Eq, 2.0));
        lp.push(Constraint::new(vec![1.0, -1.0], Relation::Ge, -4.0));
        match lp.solve().unwrap() {
            Outcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_direction() {
        let mut lp = LinearProgram::new(2, vec![1.0, 0.0]);
        lp.push(Constraint::new(vec![0.0, 1.0], Relation::Le, 1.0));
        assert_eq!(lp.solve().unwrap(), Outcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(4, vec![0.75, -150.0, 0.02, -6.0]);
        lp.push(Constraint::new(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0));
        lp.push(Constraint::new(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0));
        lp.push(Constraint::new(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0));
        match lp.solve().unwrap() {
            Outcome::Optimal { value, .. } => assert!((value - 0.05).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
