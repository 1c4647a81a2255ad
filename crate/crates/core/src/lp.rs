//! Polyhedral cones in R^4 and the max-epsilon feasibility program
//!
//! ```text
//! max eps  s.t.  A y = 0,  w_j^T y >= eps,  u_k^T y >= 0,  eps <= 1,  ||y||_inf <= 1
//! ```
//!
//! Every row is scaled to unit Euclidean norm first and `y` is confined to
//! the unit max-norm ball, so the optimal `eps` is a scale-free margin: the
//! smallest distance-like slack of the witness over all strict rows.

use nalgebra::{DMatrix, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::simplex::{Constraint, LinearProgram, Outcome, Relation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("simplex failed to converge or produced an unverifiable witness: {0}")]
    NumericalFailure(String),
    #[error("row or generator {index} is zero")]
    ZeroRow { index: usize },
    #[error("feasibility problem has no rows")]
    Empty,
    #[error("feasibility problem has no strict rows and does not ask for a nontrivial weak solution")]
    NoStrictRows,
}

/// Default zero band on the optimal margin.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Optima at or below this are treated as exactly zero.
const NOISE_FLOOR: f64 = 1e-14;

fn unit_rows(rows: &[Vector4<f64>], offset: usize) -> Result<Vec<Vector4<f64>>, LpError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let n = r.norm();
            if !(n > 0.0) || !n.is_finite() {
                Err(LpError::ZeroRow { index: offset + i })
            } else {
                Ok(r / n)
            }
        })
        .collect()
}

/// A finitely generated cone `{ sum lambda_i g_i : lambda_i >= 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGenerators {
    generators: Vec<Vector4<f64>>,
}

impl ConeGenerators {
    /// The empty list generates `{0}`.
    pub fn new(generators: Vec<Vector4<f64>>) -> Result<Self, LpError> {
        unit_rows(&generators, 0)?;
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[Vector4<f64>] {
        &self.generators
    }

    pub fn negated(&self) -> Self {
        Self {
            generators: self.generators.iter().map(|g| -g).collect(),
        }
    }

    /// `y^T g >= -tol ||y|| ||g||` for every generator.
    pub fn dual_member(&self, y: &Vector4<f64>, tol: f64) -> bool {
        let ny = y.norm();
        self.generators.iter().all(|g| y.dot(g) >= -tol * ny * g.norm())
    }

    /// `y^T g > tol ||y|| ||g||` for every generator. Only meaningful when the
    /// dual cone is full-dimensional; otherwise callers should pose the
    /// problem through [`solve_feasibility`] with equality rows.
    pub fn dual_interior_member(&self, y: &Vector4<f64>, tol: f64) -> bool {
        let ny = y.norm();
        ny > 0.0 && self.generators.iter().all(|g| y.dot(g) > tol * ny * g.norm())
    }

    /// Whether `x` is a nonnegative combination of the generators.
    pub fn cone_member(&self, x: &Vector4<f64>, tol: f64) -> Result<bool, LpError> {
        let nx = x.norm();
        if nx == 0.0 {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        let gens = unit_rows(&self.generators, 0)?;
        let target = x / nx;
        let mut lp = LinearProgram::new(gens.len(), vec![0.0; gens.len()]);
        lp.feasibility_tol = tol.max(1e-12) * gens.len() as f64;
        for r in 0..4 {
            lp.push(Constraint::new(gens.iter().map(|g| g[r]).collect(), Relation::Eq, target[r]));
        }
        match lp.solve() {
            Ok(Outcome::Optimal { .. }) => Ok(true),
            Ok(Outcome::Infeasible { .. }) => Ok(false),
            Ok(Outcome::Unbounded) => Err(LpError::NumericalFailure("zero objective reported unbounded".into())),
            Err(s) => Err(LpError::NumericalFailure(format!("stalled after {} pivots", s.iterations))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeasibilityStatus {
    /// Some `y` satisfies every strict row with positive slack.
    StrictlyFeasible,
    /// The optimal margin is positive but inside the tolerance band, so the
    /// answer is numerically marginal.
    WeaklyFeasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    #[serde(serialize_with = "serialize_opt_vec4")]
    pub witness: Option<Vector4<f64>>,
    /// Optimal margin of the strict program.
    pub eps: Option<f64>,
}

fn serialize_opt_vec4<S: serde::Serializer>(v: &Option<Vector4<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&[v[0], v[1], v[2], v[3]]),
        None => s.serialize_none(),
    }
}

impl FeasibilityResult {
    pub fn is_strict(&self) -> bool {
        self.status == FeasibilityStatus::StrictlyFeasible
    }
}

/// Rows of the max-epsilon program.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    eq_rows: Vec<Vector4<f64>>,
    strict_rows: Vec<Vector4<f64>>,
    weak_rows: Vec<Vector4<f64>>,
    nontrivial_weak: bool,
    tol: f64,
}

impl FeasibilityProblem {
    /// Rows are stored unit-normalized; zero rows are rejected. Row indices
    /// in errors count equality rows first, then strict, then weak.
    pub fn new(
        eq_rows: Vec<Vector4<f64>>,
        strict_rows: Vec<Vector4<f64>>,
        weak_rows: Vec<Vector4<f64>>,
    ) -> Result<Self, LpError> {
        if eq_rows.is_empty() && strict_rows.is_empty() && weak_rows.is_empty() {
            return Err(LpError::Empty);
        }
        let eq_rows = unit_rows(&eq_rows, 0)?;
        let strict_rows = unit_rows(&strict_rows, eq_rows.len())?;
        let weak_rows = unit_rows(&weak_rows, eq_rows.len() + strict_rows.len())?;
        Ok(Self {
            eq_rows,
            strict_rows,
            weak_rows,
            nontrivial_weak: false,
            tol: DEFAULT_TOL,
        })
    }

    /// Additionally demand that at least one weak row be strictly positive.
    pub fn require_nontrivial_weak(mut self) -> Self {
        self.nontrivial_weak = true;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn eq_rows(&self) -> &[Vector4<f64>] {
        &self.eq_rows
    }

    pub fn strict_rows(&self) -> &[Vector4<f64>] {
        &self.strict_rows
    }

    pub fn weak_rows(&self) -> &[Vector4<f64>] {
        &self.weak_rows
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Strict rows actually posed, including the aggregated weak row when a
    /// nontrivial weak solution is required.
    fn effective_strict(&self) -> Result<Vec<Vector4<f64>>, LpError> {
        let mut rows = self.strict_rows.clone();
        if self.nontrivial_weak {
            let sum: Vector4<f64> = self.weak_rows.iter().sum();
            if sum.norm() <= 1e-12 * (self.weak_rows.len().max(1) as f64) {
                // Weak rows cancel: any solution makes some row negative or all zero.
                return Ok(Vec::new());
            }
            rows.push(sum.normalize());
        }
        Ok(rows)
    }
}

/// Solves `max eps` over `y = y+ - y-`; returns the optimal `(y, eps)`.
fn max_margin(
    eq: &[Vector4<f64>],
    strict: &[Vector4<f64>],
    weak: &[Vector4<f64>],
) -> Result<Option<(Vector4<f64>, f64)>, LpError> {
    // Variables: y+ (0..4), y- (4..8), eps (8).
    let mut obj = vec![0.0; 9];
    obj[8] = 1.0;
    let mut lp = LinearProgram::new(9, obj);
    let split = |r: &Vector4<f64>, eps_coeff: f64| {
        let mut c = vec![0.0; 9];
        for k in 0..4 {
            c[k] = r[k];
            c[k + 4] = -r[k];
        }
        c[8] = eps_coeff;
        c
    };
    for r in eq {
        lp.push(Constraint::new(split(r, 0.0), Relation::Eq, 0.0));
    }
    for r in strict {
        lp.push(Constraint::new(split(r, -1.0), Relation::Ge, 0.0));
    }
    for r in weak {
        lp.push(Constraint::new(split(r, 0.0), Relation::Ge, 0.0));
    }
    let mut cap = vec![0.0; 9];
    cap[8] = 1.0;
    lp.push(Constraint::new(cap, Relation::Le, 1.0));
    for k in 0..4 {
        let mut b = vec![0.0; 9];
        b[k] = 1.0;
        b[k + 4] = 1.0;
        lp.push(Constraint::new(b, Relation::Le, 1.0));
    }
    match lp.solve() {
        Ok(Outcome::Optimal { x, value }) => {
            let y = Vector4::from_fn(|k, _| x[k] - x[k + 4]);
            Ok(Some((y, value)))
        }
        // y = 0, eps = 0 is always feasible.
        Ok(Outcome::Infeasible { .. }) => Ok(None),
        Ok(Outcome::Unbounded) => Err(LpError::NumericalFailure("bounded program reported unbounded".into())),
        Err(s) => Err(LpError::NumericalFailure(format!("stalled after {} pivots", s.iterations))),
    }
}

fn verify(
    y: &Vector4<f64>,
    eps: f64,
    eq: &[Vector4<f64>],
    strict: &[Vector4<f64>],
    weak: &[Vector4<f64>],
) -> Result<(), LpError> {
    let slack = 1e-10;
    if let Some(r) = eq.iter().find(|r| r.dot(y).abs() > 1e-9) {
        return Err(LpError::NumericalFailure(format!("equality row violated by {:e}", r.dot(y))));
    }
    if let Some(r) = weak.iter().find(|r| r.dot(y) < -slack) {
        return Err(LpError::NumericalFailure(format!("weak row violated by {:e}", r.dot(y))));
    }
    let margin = strict.iter().map(|r| r.dot(y)).fold(f64::INFINITY, f64::min);
    if strict.is_empty() || margin >= eps * (1.0 - 1e-6) - slack {
        Ok(())
    } else {
        Err(LpError::NumericalFailure(format!(
            "witness margin {margin:e} below reported optimum {eps:e}"
        )))
    }
}

/// Decides the max-epsilon program and classifies the outcome.
pub fn solve_feasibility(p: &FeasibilityProblem) -> Result<FeasibilityResult, LpError> {
    if p.strict_rows.is_empty() && !p.nontrivial_weak {
        return Err(LpError::NoStrictRows);
    }
    let strict = p.effective_strict()?;
    if strict.is_empty() {
        return Ok(FeasibilityResult {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            eps: Some(0.0),
        });
    }
    let Some((y, eps)) = max_margin(&p.eq_rows, &strict, &p.weak_rows)? else {
        return Err(LpError::NumericalFailure("origin reported infeasible".into()));
    };
    verify(&y, eps, &p.eq_rows, &strict, &p.weak_rows)?;
    if eps > p.tol {
        return Ok(FeasibilityResult {
            status: FeasibilityStatus::StrictlyFeasible,
            witness: Some(y),
            eps: Some(eps),
        });
    }
    let status = if eps > NOISE_FLOOR {
        FeasibilityStatus::WeaklyFeasible
    } else {
        FeasibilityStatus::Infeasible
    };
    Ok(FeasibilityResult {
        witness: (status == FeasibilityStatus::WeaklyFeasible).then_some(y),
        status,
        eps: Some(eps.max(0.0)),
    })
}

/// Is there `q` with `q^T N > 0` componentwise? The witness is such a `q`.
pub fn rowspace_meets_positive_orthant(n: &DMatrix<f64>) -> Result<FeasibilityResult, LpError> {
    assert_eq!(n.nrows(), 4, "N must have four rows");
    let cols: Vec<Vector4<f64>> = n.column_iter().map(|c| Vector4::from_fn(|r, _| c[r])).collect();
    solve_feasibility(&FeasibilityProblem::new(Vec::new(), cols, Vec::new())?)
}
