//! Generating families `F = Q + g` on `S¹ × R^K`, quadratic at infinity.
//!
//! A family generates the Legendrian curve traced by `(q, ∂_q F, F)` over
//! the fiber-critical set `{∂_w F = 0}`. That set is followed by
//! pseudo-arclength continuation, so folds over the base (front cusps) are
//! traversed instead of cut.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, Bindings, Expr, ParseError, Var};
use crate::jet::{circle_distance, JetError, JetPoint, LegendrianLoop};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenFamError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("quadratic form entries must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("expression uses `{0}`, which is not a coordinate of S¹ × R^K")]
    ForeignVariable(Var),
    #[error("the differential of g does not look bounded (fiber radius estimate kept growing past {0})")]
    NotQuadraticAtInfinity(f64),
    #[error("fiber-critical branch starting at q = {q} did not close after {steps} steps")]
    BranchNotClosed { q: f64, steps: usize },
    #[error("continuation stalled at q = {q}, w = {w:?}")]
    ContinuationStalled { q: f64, w: Vec<f64> },
    #[error("grid of {0} points is too coarse (need at least {1})")]
    GridTooCoarse(usize, usize),
    #[error("unsupported family schema version {0}")]
    Schema(u32),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// JSON description of a family: `{"K": 1, "Qsigns": [1], "g": "cos(q)", "grid": 256}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(rename = "K")]
    pub fiber_dim: usize,
    #[serde(rename = "Qsigns", default)]
    pub q_signs: Vec<i8>,
    pub g: String,
    #[serde(default)]
    pub grid: Option<usize>,
}

fn schema_v1() -> u32 {
    1
}

impl FamilySpec {
    pub fn to_family(&self) -> Result<GeneratingFamily, GenFamError> {
        if self.schema != 1 {
            return Err(GenFamError::Schema(self.schema));
        }
        let g = expr::parse(&self.g, self.fiber_dim)?;
        let mut signs = self.q_signs.clone();
        if signs.is_empty() {
            signs = vec![1; self.fiber_dim];
        }
        GeneratingFamily::new(signs, g)
    }
}

pub const DEFAULT_GRID: usize = 256;

#[derive(Debug, Clone)]
pub struct GeneratingFamily {
    q_signs: Vec<i8>,
    g: Expr,
    value: Expr,
    d_q: Expr,
    d_w: Vec<Expr>,
    d_qq: Expr,
    d_qw: Vec<Expr>,
    d_ww: Vec<Vec<Expr>>,
    bound_r: f64,
    sup_dg: f64,
    sup_g: f64,
}

fn eval(e: &Expr, q: f64, w: &[f64]) -> f64 {
    e.eval(&Bindings::at(q, w)).unwrap_or(f64::NAN)
}

impl GeneratingFamily {
    /// `F = Σ s_i w_i² + g` with `s_i = q_signs[i]`; `K = q_signs.len()`.
    pub fn new(q_signs: Vec<i8>, g: Expr) -> Result<Self, GenFamError> {
        let mut fam = Self::with_bound(q_signs, g, 1.0)?;
        fam.estimate_bound()?;
        Ok(fam)
    }

    /// Same as [`GeneratingFamily::new`] with a caller-supplied fiber radius
    /// and no boundedness estimate. Meant for local models such as cubic
    /// birth-death normal forms.
    pub fn with_bound(q_signs: Vec<i8>, g: Expr, bound_r: f64) -> Result<Self, GenFamError> {
        for s in &q_signs {
            if *s != 1 && *s != -1 {
                return Err(GenFamError::BadSign(*s));
            }
        }
        let k = q_signs.len();
        for v in g.free_vars() {
            match v {
                Var::Q => {}
                Var::W(i) if i <= k => {}
                other => return Err(GenFamError::ForeignVariable(other)),
            }
        }
        let mut value = g.clone();
        for (i, s) in q_signs.iter().enumerate() {
            let sq = Expr::Pow(Box::new(Expr::Var(Var::W(i + 1))), 2);
            value = if *s > 0 {
                Expr::Add(Box::new(value), Box::new(sq))
            } else {
                Expr::Sub(Box::new(value), Box::new(sq))
            };
        }
        let d_q = value.differentiate(Var::Q);
        let d_w: Vec<Expr> = (1..=k).map(|i| value.differentiate(Var::W(i))).collect();
        let d_qq = d_q.differentiate(Var::Q);
        let d_qw = d_w.iter().map(|e| e.differentiate(Var::Q)).collect();
        let d_ww = d_w
            .iter()
            .map(|e| (1..=k).map(|j| e.differentiate(Var::W(j))).collect())
            .collect();
        Ok(GeneratingFamily {
            q_signs,
            g,
            value,
            d_q,
            d_w,
            d_qq,
            d_qw,
            d_ww,
            bound_r,
            sup_dg: 0.0,
            sup_g: 0.0,
        })
    }

    pub fn parse(q_signs: Vec<i8>, g: &str) -> Result<Self, GenFamError> {
        let k = q_signs.len();
        Self::new(q_signs, expr::parse(g, k)?)
    }

    /// Sup of `|g|` and of `|∂_w g|` on a probe grid, and the fiber radius
    /// `2·sup|∂_w g| + 1`. The probe box grows with the radius until the
    /// estimate settles.
    fn estimate_bound(&mut self) -> Result<(), GenFamError> {
        let k = self.fiber_dim();
        let dg: Vec<Expr> = (1..=k).map(|i| self.g.differentiate(Var::W(i))).collect();
        let mut radius = 1.0;
        for _ in 0..8 {
            let mut sup_dg: f64 = 0.0;
            let mut sup_g: f64 = 0.0;
            let lattice = fiber_lattice(k, 9, radius);
            for iq in 0..64 {
                let q = TAU * iq as f64 / 64.0;
                for w in &lattice {
                    sup_g = sup_g.max(eval(&self.g, q, w).abs());
                    let norm: f64 = dg.iter().map(|d| eval(d, q, w).powi(2)).sum::<f64>().sqrt();
                    sup_dg = sup_dg.max(norm);
                }
            }
            self.sup_dg = sup_dg;
            self.sup_g = sup_g;
            let next = 2.0 * sup_dg + 1.0;
            if next <= radius * 1.01 {
                self.bound_r = next.max(1.0);
                return Ok(());
            }
            radius = next;
        }
        Err(GenFamError::NotQuadraticAtInfinity(radius))
    }

    pub fn fiber_dim(&self) -> usize {
        self.q_signs.len()
    }

    pub fn q_signs(&self) -> &[i8] {
        &self.q_signs
    }

    /// Index of the quadratic form: number of negative squares.
    pub fn index(&self) -> usize {
        self.q_signs.iter().filter(|s| **s < 0).count()
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    /// The whole of `F` as an expression.
    pub fn expression(&self) -> &Expr {
        &self.value
    }

    pub fn bound_r(&self) -> f64 {
        self.bound_r
    }

    pub fn sup_g(&self) -> f64 {
        self.sup_g
    }

    pub fn sup_dg(&self) -> f64 {
        self.sup_dg
    }

    /// Family with one more fiber coordinate, `± w_{K+1}²`.
    pub fn stabilize(&self, sign: i8) -> Result<Self, GenFamError> {
        let mut signs = self.q_signs.clone();
        signs.push(sign);
        Self::new(signs, self.g.clone())
    }

    pub fn value(&self, q: f64, w: &[f64]) -> f64 {
        eval(&self.value, q, w)
    }

    pub fn d_q(&self, q: f64, w: &[f64]) -> f64 {
        eval(&self.d_q, q, w)
    }

    pub fn d_qq(&self, q: f64, w: &[f64]) -> f64 {
        eval(&self.d_qq, q, w)
    }

    pub fn grad_w(&self, q: f64, w: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.fiber_dim(), self.d_w.iter().map(|e| eval(e, q, w)))
    }

    pub fn hessian_ww(&self, q: f64, w: &[f64]) -> DMatrix<f64> {
        let k = self.fiber_dim();
        DMatrix::from_fn(k, k, |i, j| eval(&self.d_ww[i][j], q, w))
    }

    /// The `K × (K+1)` matrix `(F_wq, F_ww)`.
    pub fn jacobian_w(&self, q: f64, w: &[f64]) -> DMatrix<f64> {
        let k = self.fiber_dim();
        DMatrix::from_fn(k, k + 1, |i, j| {
            if j == 0 {
                eval(&self.d_qw[i], q, w)
            } else {
                eval(&self.d_ww[i][j - 1], q, w)
            }
        })
    }

    /// Gradient in all variables, `(F_q, F_w)`.
    pub fn gradient(&self, q: f64, w: &[f64]) -> DVector<f64> {
        let k = self.fiber_dim();
        let mut g = DVector::zeros(k + 1);
        g[0] = self.d_q(q, w);
        for i in 0..k {
            g[i + 1] = eval(&self.d_w[i], q, w);
        }
        g
    }

    /// Hessian in all variables, `q` first.
    pub fn hessian(&self, q: f64, w: &[f64]) -> DMatrix<f64> {
        let k = self.fiber_dim();
        let mut h = DMatrix::zeros(k + 1, k + 1);
        h[(0, 0)] = self.d_qq(q, w);
        for i in 0..k {
            let c = eval(&self.d_qw[i], q, w);
            h[(0, i + 1)] = c;
            h[(i + 1, 0)] = c;
            for j in 0..k {
                h[(i + 1, j + 1)] = eval(&self.d_ww[i][j], q, w);
            }
        }
        h
    }
}

/// Points of the cube `[-r, r]^k` with `per_axis` points per axis.
pub(crate) fn fiber_lattice(k: usize, per_axis: usize, r: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -r + 2.0 * r * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |a| {
                    let mut v = p.clone();
                    v.push(*a);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberCriticalPoint {
    pub q: f64,
    pub w: Vec<f64>,
    pub value: f64,
    pub p: f64,
    pub hessian_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonFailure {
    pub q: f64,
    pub seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FiberCriticalSet {
    pub points: Vec<FiberCriticalPoint>,
    pub failures: Vec<NewtonFailure>,
}

impl GeneratingFamily {
    fn fiber_point(&self, q: f64, w: Vec<f64>) -> FiberCriticalPoint {
        let hessian_det = if w.is_empty() {
            1.0
        } else {
            self.hessian_ww(q, &w).determinant()
        };
        FiberCriticalPoint {
            q,
            value: self.value(q, &w),
            p: self.d_q(q, &w),
            hessian_det,
            w,
        }
    }

    /// Newton iteration for `∂_w F(q, ·) = 0` from `seed`.
    fn fiber_newton(&self, q: f64, seed: &[f64], tol: f64) -> Option<Vec<f64>> {
        let mut w = DVector::from_column_slice(seed);
        for _ in 0..60 {
            let g = self.grad_w(q, w.as_slice());
            if !g.iter().all(|x| x.is_finite()) {
                return None;
            }
            if g.norm() <= tol {
                return Some(w.as_slice().to_vec());
            }
            let h = self.hessian_ww(q, w.as_slice());
            let mut step = h.lu().solve(&g)?;
            let limit = self.bound_r.max(1.0);
            if step.norm() > limit {
                step *= limit / step.norm();
            }
            w -= step;
            if w.norm() > 4.0 * self.bound_r * (self.fiber_dim() as f64).sqrt() + 4.0 {
                return None;
            }
        }
        let g = self.grad_w(q, w.as_slice());
        (g.norm() <= tol).then(|| w.as_slice().to_vec())
    }
}

/// Solutions of `∂_w F = 0` over an `n_q`-point grid of the circle.
///
/// For `K = 0` every grid angle is fiber-critical. Otherwise each grid angle
/// seeds Newton from a lattice of 5 points per axis in the fiber ball;
/// converged roots within `10·tol_newton` are merged.
pub fn fiber_critical_set(
    fam: &GeneratingFamily,
    n_q: usize,
    tol_newton: f64,
) -> Result<FiberCriticalSet, GenFamError> {
    use rayon::prelude::*;
    if n_q < 64 {
        return Err(GenFamError::GridTooCoarse(n_q, 64));
    }
    let seeds = fiber_lattice(fam.fiber_dim(), 5, fam.bound_r());
    let per_q: Vec<FiberCriticalSet> = (0..n_q)
        .into_par_iter()
        .map(|i| {
            let q = TAU * i as f64 / n_q as f64;
            fiber_roots(fam, q, &seeds, tol_newton)
        })
        .collect();
    let mut set = FiberCriticalSet::default();
    for s in per_q {
        set.points.extend(s.points);
        set.failures.extend(s.failures);
    }
    set.points.sort_by(|a, b| a.q.total_cmp(&b.q).then(a.value.total_cmp(&b.value)));
    Ok(set)
}

fn fiber_roots(fam: &GeneratingFamily, q: f64, seeds: &[Vec<f64>], tol_newton: f64) -> FiberCriticalSet {
    let mut out = FiberCriticalSet::default();
    if fam.fiber_dim() == 0 {
        out.points.push(fam.fiber_point(q, Vec::new()));
        return out;
    }
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for seed in seeds {
        match fam.fiber_newton(q, seed, tol_newton) {
            Some(w) => {
                let dup = roots.iter().any(|r| dist(r, &w) <= 10.0 * tol_newton);
                if !dup {
                    roots.push(w);
                }
            }
            None => out.failures.push(NewtonFailure {
                q,
                seed: seed.clone(),
            }),
        }
    }
    out.points = roots.into_iter().map(|w| fam.fiber_point(q, w)).collect();
    out.points.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Fiber-critical points over a single base angle.
pub fn fiber_critical_points_at(fam: &GeneratingFamily, q: f64, tol_newton: f64) -> FiberCriticalSet {
    let seeds = fiber_lattice(fam.fiber_dim(), 5, fam.bound_r());
    fiber_roots(fam, q, &seeds, tol_newton)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// A closed component of the fiber-critical set, as `(q, w)` samples with
/// `q` lifted to the real line along the branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<(f64, Vec<f64>)>,
}

fn point_distance(q1: f64, w1: &[f64], q2: f64, w2: &[f64]) -> f64 {
    let dq = circle_distance(q1, q2);
    (dq * dq + w1.iter().zip(w2).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt()
}

/// Unit null vector of a `K × (K+1)` matrix by signed maximal minors.
fn null_vector(j: &DMatrix<f64>) -> Option<DVector<f64>> {
    let k = j.nrows();
    let mut t = DVector::zeros(k + 1);
    for c in 0..=k {
        let minor = j.clone().remove_column(c);
        let det = if k == 0 { 1.0 } else { minor.determinant() };
        t[c] = if c % 2 == 0 { det } else { -det };
    }
    let n = t.norm();
    (n > 1e-300 && n.is_finite()).then(|| t / n)
}

/// Follows the fiber-critical curve through `(q0, w0)` by predictor-corrector
/// continuation with arclength step `h0` until it returns to the start.
fn trace_branch(
    fam: &GeneratingFamily,
    q0: f64,
    w0: &[f64],
    h0: f64,
    tol: f64,
) -> Result<Branch, GenFamError> {
    let k = fam.fiber_dim();
    let start = DVector::from_iterator(k + 1, std::iter::once(q0).chain(w0.iter().copied()));
    let x_of = |x: &DVector<f64>| (x[0], x.as_slice()[1..].to_vec());
    let mut tangent = null_vector(&fam.jacobian_w(q0, w0)).ok_or_else(|| {
        GenFamError::ContinuationStalled {
            q: q0,
            w: w0.to_vec(),
        }
    })?;
    if tangent[0] < 0.0 || (tangent[0] == 0.0 && tangent[1] < 0.0) {
        tangent = -tangent;
    }
    let mut x = start.clone();
    let mut points = vec![x_of(&x)];
    let mut h = h0;
    let mut travelled = 0.0;
    let max_steps = 200_000;
    for _ in 0..max_steps {
        let (q, w) = x_of(&x);
        // Close once the start lies within one step ahead.
        let back = point_distance(q, &w, q0, w0);
        if travelled > 2.5 * h0 && back < 1.05 * h0 {
            let mut ahead = start.clone() - &x;
            ahead[0] = crate::jet::wrap_delta(ahead[0]);
            if ahead.dot(&tangent) > 0.0 {
                if back < 1e-3 * h0 {
                    points.pop();
                }
                return Ok(Branch { points });
            }
        }
        let mut accepted = None;
        while h >= h0 / 4096.0 {
            let pred = &x + &tangent * h;
            if let Some((y, t_new)) = correct(fam, &pred, &tangent, tol) {
                let t_new = if t_new.dot(&tangent) < 0.0 { -t_new } else { t_new };
                if t_new.dot(&tangent) > 0.95 && (&y - &x).norm() < 2.0 * h {
                    accepted = Some((y, t_new));
                    break;
                }
            }
            h *= 0.5;
        }
        let Some((y, t_new)) = accepted else {
            return Err(GenFamError::ContinuationStalled { q, w });
        };
        travelled += (&y - &x).norm();
        x = y;
        tangent = t_new;
        points.push(x_of(&x));
        h = (h * 2.0).min(h0);
    }
    Err(GenFamError::BranchNotClosed {
        q: q0,
        steps: max_steps,
    })
}

/// Newton corrector on `{∂_w F = 0, tangent·(x - pred) = 0}`.
fn correct(
    fam: &GeneratingFamily,
    pred: &DVector<f64>,
    tangent: &DVector<f64>,
    tol: f64,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let k = fam.fiber_dim();
    let mut x = pred.clone();
    for _ in 0..20 {
        let (q, w) = (x[0], &x.as_slice()[1..]);
        let g = fam.grad_w(q, w);
        let offset = tangent.dot(&(&x - pred));
        if g.norm() <= tol && offset.abs() <= tol {
            let t = null_vector(&fam.jacobian_w(q, w))?;
            return Some((x, t));
        }
        let j = fam.jacobian_w(q, w);
        let mut a = DMatrix::zeros(k + 1, k + 1);
        let mut r = DVector::zeros(k + 1);
        for i in 0..k {
            for c in 0..=k {
                a[(i, c)] = j[(i, c)];
            }
            r[i] = g[i];
        }
        for c in 0..=k {
            a[(k, c)] = tangent[c];
        }
        r[k] = offset;
        let step = a.lu().solve(&r)?;
        if !step.iter().all(|s| s.is_finite()) {
            return None;
        }
        x -= step;
    }
    None
}

/// Closed components of the fiber-critical set. For `K = 0` this is the
/// whole circle sampled at `n_q` points.
pub fn fiber_critical_branches(
    fam: &GeneratingFamily,
    n_q: usize,
) -> Result<Vec<Branch>, GenFamError> {
    if n_q < 64 {
        return Err(GenFamError::GridTooCoarse(n_q, 64));
    }
    if fam.fiber_dim() == 0 {
        let points = (0..n_q)
            .map(|i| (TAU * i as f64 / n_q as f64, Vec::new()))
            .collect();
        return Ok(vec![Branch { points }]);
    }
    let tol = 1e-11;
    let h0 = TAU / n_q as f64;
    let set = fiber_critical_set(fam, n_q, tol)?;
    let mut branches: Vec<Branch> = Vec::new();
    for pt in &set.points {
        let covered = branches.iter().any(|b| {
            b.points
                .iter()
                .any(|(q, w)| point_distance(*q, w, pt.q, &pt.w) < h0)
        });
        if covered {
            continue;
        }
        branches.push(trace_branch(fam, pt.q, &pt.w, h0, tol)?);
    }
    Ok(branches)
}

/// Legendrian loops `(q, ∂_q F, F)` over the components of the
/// fiber-critical set.
pub fn legendrian_from_family(
    fam: &GeneratingFamily,
    n_q: usize,
) -> Result<Vec<LegendrianLoop>, GenFamError> {
    fiber_critical_branches(fam, n_q)?
        .into_iter()
        .map(|b| {
            let samples = b
                .points
                .iter()
                .map(|(q, w)| JetPoint::new(*q, fam.d_q(*q, w), fam.value(*q, w)))
                .collect();
            LegendrianLoop::new(samples).map_err(GenFamError::from)
        })
        .collect()
}

/// Default threshold on the smallest singular value in the rank test.
pub const TOL_RANK: f64 = 1e-8;

/// Whether `(F_wq, F_ww)` has full rank `K` at `pt`.
pub fn rank_condition_check(fam: &GeneratingFamily, pt: &FiberCriticalPoint) -> bool {
    rank_condition_check_tol(fam, pt, TOL_RANK)
}

pub fn rank_condition_check_tol(fam: &GeneratingFamily, pt: &FiberCriticalPoint, tol: f64) -> bool {
    if fam.fiber_dim() == 0 {
        return true;
    }
    let j = fam.jacobian_w(pt.q, &pt.w);
    // σ_min(J)² is the smallest eigenvalue of J Jᵀ.
    let jjt = &j * j.transpose();
    let smallest = jjt
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    smallest.max(0.0).sqrt() > tol
}

/// A point where every partial derivative of `F` vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub q: f64,
    pub w: Vec<f64>,
    pub value: f64,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    pub multiplicity: usize,
    pub nondegenerate: bool,
}

const GRAD_TOL: f64 = 1e-9;

impl GeneratingFamily {
    fn is_nondegenerate(&self, q: f64, w: &[f64]) -> bool {
        let h = self.hessian(q, w);
        let scale = h.norm().max(1.0);
        let smallest = h
            .symmetric_eigenvalues()
            .iter()
            .map(|e| e.abs())
            .fold(f64::INFINITY, f64::min);
        smallest > 1e-7 * scale
    }

    /// Newton on the full gradient, steps capped at `cap`.
    fn full_newton(&self, q: f64, w: &[f64], cap: f64) -> Option<(f64, Vec<f64>)> {
        let k = self.fiber_dim();
        let mut x = DVector::from_iterator(k + 1, std::iter::once(q).chain(w.iter().copied()));
        for _ in 0..60 {
            let g = self.gradient(x[0], &x.as_slice()[1..]);
            if !g.iter().all(|v| v.is_finite()) {
                return None;
            }
            if g.norm() <= 1e-13 * (1.0 + self.sup_g) {
                break;
            }
            let h = self.hessian(x[0], &x.as_slice()[1..]);
            let mut step = h.lu().solve(&g)?;
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            x -= step;
        }
        let g = self.gradient(x[0], &x.as_slice()[1..]);
        (g.norm() <= GRAD_TOL).then(|| (x[0], x.as_slice()[1..].to_vec()))
    }
}

/// Critical points of `F` found along the fiber-critical branches:
/// sign changes of `p = ∂_q F`, refined in all variables.
pub fn critical_points(fam: &GeneratingFamily, n_q: usize) -> Result<Vec<CriticalPoint>, GenFamError> {
    let branches = fiber_critical_branches(fam, n_q)?;
    let h0 = TAU / n_q as f64;
    let mut found: Vec<CriticalPoint> = Vec::new();
    let push = |q: f64, w: Vec<f64>, found: &mut Vec<CriticalPoint>| {
        let q = crate::jet::reduce_angle(q);
        if found
            .iter()
            .any(|c| point_distance(c.q, &c.w, q, &w) < 1e-7)
        {
            return;
        }
        let nondegenerate = fam.is_nondegenerate(q, &w);
        found.push(CriticalPoint {
            q,
            value: fam.value(q, &w),
            nondegenerate,
            w,
        });
    };
    for b in &branches {
        let n = b.points.len();
        let ps: Vec<f64> = b.points.iter().map(|(q, w)| fam.d_q(*q, w)).collect();
        for i in 0..n {
            let j = (i + 1) % n;
            let (qa, wa) = &b.points[i];
            let (qb, wb) = &b.points[j];
            if ps[i].abs() <= GRAD_TOL {
                // Sample already critical; polish when possible.
                match fam.full_newton(*qa, wa, h0) {
                    Some((q, w)) => push(q, w, &mut found),
                    None => push(*qa, wa.clone(), &mut found),
                }
                continue;
            }
            if ps[j].abs() <= GRAD_TOL || ps[i].signum() == ps[j].signum() {
                continue;
            }
            if fam.fiber_dim() == 0 {
                let q = bisect_root(|q| fam.d_q(q, &[]), *qa, *qa + crate::jet::wrap_delta(*qb - *qa));
                push(q, Vec::new(), &mut found);
            } else {
                let (q, w) = if ps[i].abs() <= ps[j].abs() { (qa, wa) } else { (qb, wb) };
                if let Some((q, w)) = fam.full_newton(*q, w, h0) {
                    push(q, w, &mut found);
                }
            }
        }
    }
    found.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.q.total_cmp(&b.q)));
    Ok(found)
}

/// Root of `f` bracketed by `[a, b]` (endpoints of opposite sign).
pub(crate) fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Distinct critical values with multiplicities, ascending.
pub fn critical_values(fam: &GeneratingFamily) -> Result<Vec<CriticalValue>, GenFamError> {
    critical_values_with_grid(fam, DEFAULT_GRID)
}

pub fn critical_values_with_grid(
    fam: &GeneratingFamily,
    n_q: usize,
) -> Result<Vec<CriticalValue>, GenFamError> {
    Ok(group_values(&critical_points(fam, n_q)?))
}

pub(crate) fn group_values(points: &[CriticalPoint]) -> Vec<CriticalValue> {
    let mut out: Vec<CriticalValue> = Vec::new();
    for c in points {
        match out.last_mut() {
            Some(last) if (c.value - last.value).abs() <= 1e-9 * (1.0 + c.value.abs()) => {
                last.multiplicity += 1;
                last.nondegenerate &= c.nondegenerate;
            }
            _ => out.push(CriticalValue {
                value: c.value,
                multiplicity: 1,
                nondegenerate: c.nondegenerate,
            }),
        }
    }
    out
}
