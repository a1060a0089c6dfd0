//! Worked constructions: a positive loop of Legendrians, intersections with
//! the surfaces swept by `j¹(λf)`, and the λ-scan that produces them from
//! min-max values over `{f ≥ 0}`.

use std::f64::consts::TAU;
use std::io;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cerf::{self, CerfError, FamilyPath};
use crate::expr::{Bindings, Expr, Func, Var};
use crate::genfam::{self, bisect_root, GenFamError, GeneratingFamily};
use crate::jet::{
    check_legendrian, check_positive_isotopy, default_tol_leg, front_projection, min_separation,
    wrap_delta, Isotopy, JetError, JetPoint, LegendrianLoop,
};
use crate::spectra::{self, Grids, SpectraError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("construction infeasible: {0}")]
    Infeasible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lambda_max = {lambda_max} too small: final values {values:?} are not all negative")]
    LambdaMaxTooSmall { lambda_max: f64, values: Vec<f64> },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Family(#[from] GenFamError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Cerf(#[from] CerfError),
}

/// The contact flow `(q, p, u) ↦ (q - t, p, u - tε)`.
pub fn flow_phi(l: &LegendrianLoop, t: f64, eps: f64) -> LegendrianLoop {
    l.map(|s| JetPoint::new(s.q - t, s.p, s.u - t * eps))
}

pub fn translate_vertical(l: &LegendrianLoop, c: f64) -> LegendrianLoop {
    l.map(|s| JetPoint::new(s.q, s.p, s.u + c))
}

/// Samples per loop in the constructions below.
pub const LOOP_SAMPLES: usize = 512;

/// An embedded Legendrian loop of winding one lying in `{p ≥ 2ε + margin}`.
///
/// `q(s) = s + 2 sin s` turns back twice, so the front has two cusps, and
/// `p(s) = m + β(1 - cos s)²` with `m = 2ε + margin`. The weight `β` is
/// solved on the sample grid so that the midpoint sums `Σ p̄ Δq` vanish;
/// `u` is their running sum, which makes every edge exactly Legendrian and
/// closes `u` up.
pub fn build_high_p_loop(eps: f64, margin: f64, n: usize) -> Result<LegendrianLoop, ScenarioError> {
    if !(eps > 0.0 && margin > 0.0) {
        return Err(ScenarioError::Infeasible(format!("need eps > 0 and margin > 0, got {eps}, {margin}")));
    }
    let m = 2.0 * eps + margin;
    let s: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
    let q: Vec<f64> = s.iter().map(|s| s + 2.0 * s.sin()).collect();
    let bump: Vec<f64> = s.iter().map(|s| (1.0 - s.cos()).powi(2)).collect();
    let dq: Vec<f64> = (0..n).map(|i| q[i + 1] - q[i]).collect();
    let base: f64 = dq.iter().sum();
    let weighted: f64 = (0..n).map(|i| 0.5 * (bump[i] + bump[i + 1]) * dq[i]).sum();
    if weighted >= 0.0 {
        return Err(ScenarioError::Infeasible("p-weighting cannot cancel the winding term".into()));
    }
    let beta = -m * base / weighted;
    let p: Vec<f64> = bump.iter().map(|b| m + beta * b).collect();
    let mut u = 0.0;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        samples.push(JetPoint::new(q[i], p[i], u));
        u += 0.5 * (p[i] + p[i + 1]) * dq[i];
    }
    Ok(LegendrianLoop::new(samples)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub eps: f64,
    pub frames: usize,
    pub min_p: f64,
    pub min_alpha: f64,
    pub max_legendrian_defect: f64,
    pub all_legendrian: bool,
    pub min_separation: f64,
    pub all_embedded: bool,
    /// Largest coordinate difference between the first and last frame.
    pub closure_gap: f64,
    pub front_cusps: usize,
    pub pass: bool,
}

/// Frames in the flow part and in the vertical part of the positive loop.
const FLOW_STEPS: usize = 128;
const RAISE_STEPS: usize = 8;

/// `φ_t(L)` for `t ∈ [0, 2π]` followed by raising `φ_{2π}(L)` at unit speed
/// back to `L`, where `L = build_high_p_loop(ε, ε)`. The contact form on the
/// velocity is `p - ε ≥ 2ε` along the flow and `1` along the raise.
pub fn build_positive_loop(eps: f64) -> Result<Isotopy, ScenarioError> {
    let l = build_high_p_loop(eps, eps, LOOP_SAMPLES)?;
    let mut frames = Vec::with_capacity(FLOW_STEPS + RAISE_STEPS + 1);
    let mut times = Vec::with_capacity(FLOW_STEPS + RAISE_STEPS + 1);
    for i in 0..=FLOW_STEPS {
        let t = TAU * i as f64 / FLOW_STEPS as f64;
        frames.push(flow_phi(&l, t, eps));
        times.push(t);
    }
    let end = frames[FLOW_STEPS].clone();
    let rise = TAU * eps;
    for i in 1..=RAISE_STEPS {
        let c = rise * i as f64 / RAISE_STEPS as f64;
        frames.push(translate_vertical(&end, c));
        times.push(TAU + c);
    }
    Ok(Isotopy::new(frames, times)?)
}

/// Positivity, Legendrian, embedding and closure checks for an isotopy.
pub fn verify_loop(iso: &Isotopy, eps: f64) -> LoopReport {
    let frames = iso.frames();
    let n = frames[0].len();
    let tol = default_tol_leg(n);
    let checks: Vec<(f64, f64)> = frames
        .par_iter()
        .map(|f| {
            let d = check_legendrian(f, tol).map(|r| r.max_defect).unwrap_or(f64::INFINITY);
            (d, min_separation(f))
        })
        .collect();
    let max_defect = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let sep = checks.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let (a, b) = (&frames[0], &frames[frames.len() - 1]);
    let closure_gap = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| wrap_delta(y.q - x.q).abs().max((y.p - x.p).abs()).max((y.u - x.u).abs()))
        .fold(0.0, f64::max);
    let pos = check_positive_isotopy(iso);
    let embedded_tol = 1e-3;
    let report = LoopReport {
        eps,
        frames: frames.len(),
        min_p: frames.iter().map(|f| f.min_p()).fold(f64::INFINITY, f64::min),
        min_alpha: pos.min_alpha,
        max_legendrian_defect: max_defect,
        all_legendrian: max_defect < 1e-6,
        min_separation: sep,
        all_embedded: sep >= embedded_tol,
        closure_gap,
        front_cusps: front_projection(a).cusps.len(),
        pass: false,
    };
    LoopReport {
        pass: report.min_alpha >= eps
            && report.all_legendrian
            && report.all_embedded
            && report.closure_gap < 1e-12,
        ..report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaKPoint {
    /// Loop parameter in `[0, 1)`.
    pub s: f64,
    pub q: f64,
    pub p: f64,
    pub u: f64,
    pub lambda: f64,
    /// `max(|p + λk sin kq|, |u - λ cos kq|)`.
    pub residual: f64,
    /// `g` crosses zero with negligible slope.
    pub tangential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaKIntersections {
    pub k: u32,
    pub count: usize,
    pub points: Vec<LambdaKPoint>,
    /// The loop lies in the surface (g vanishes identically).
    pub degenerate: bool,
    /// Samples where `|g|` has a local minimum close to zero without a sign
    /// change, i.e. suspected tangencies that were not counted.
    pub touching: Vec<f64>,
}

fn lambda_at(k: f64, q: f64, p: f64, u: f64) -> (f64, f64) {
    let (s, c) = (k * q).sin_cos();
    let lambda = (u * c - p * k * s) / (c * c + k * k * s * s);
    let residual = (p + lambda * k * s).abs().max((u - lambda * c).abs());
    (lambda, residual)
}

/// Points of the loop on `{(q, -λk sin kq, λ cos kq)}`: sign changes of
/// `g = p cos kq + u k sin kq` along the polygon, refined by bisection.
pub fn lambda_k_intersections(l: &LegendrianLoop, k: u32) -> LambdaKIntersections {
    let kf = k as f64;
    let pts = l.samples();
    let n = pts.len();
    let g = |q: f64, p: f64, u: f64| p * (kf * q).cos() + u * kf * (kf * q).sin();
    let gs: Vec<f64> = pts.iter().map(|s| g(s.q, s.p, s.u)).collect();
    let scale = pts
        .iter()
        .map(|s| s.p.abs() + kf * s.u.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut out = LambdaKIntersections { k, count: 0, points: Vec::new(), degenerate: false, touching: Vec::new() };
    if gs.iter().all(|v| v.abs() <= 1e-12 * scale) {
        out.degenerate = true;
        return out;
    }
    let slope_floor = 1e-8 * scale / n as f64;
    for i in 0..n {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        let dq = wrap_delta(b.q - a.q);
        let at = |tau: f64| (a.q + tau * dq, a.p + tau * (b.p - a.p), a.u + tau * (b.u - a.u));
        let (ga, gb) = (gs[i], gs[(i + 1) % n]);
        let tau = if ga == 0.0 {
            0.0
        } else if gb != 0.0 && ga.signum() != gb.signum() {
            bisect_root(
                |tau| {
                    let (q, p, u) = at(tau);
                    g(q, p, u)
                },
                0.0,
                1.0,
            )
        } else {
            let prev = gs[(i + n - 1) % n];
            if ga.abs() <= 1e-6 * scale && ga.abs() < prev.abs() && ga.abs() < gb.abs() && prev.signum() == gb.signum() {
                out.touching.push(i as f64 / n as f64);
            }
            continue;
        };
        let (q, p, u) = at(tau);
        let (lambda, residual) = lambda_at(kf, q, p, u);
        out.points.push(LambdaKPoint {
            s: (i as f64 + tau) / n as f64,
            q: crate::jet::reduce_angle(q),
            p,
            u,
            lambda,
            residual,
            tangential: (gb - ga).abs() <= slope_floor,
        });
    }
    out.count = out.points.len();
    out
}

/// A zero of `λ ↦ c_{k,M}(H_λ)` with its first-jet witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCrossing {
    pub k: usize,
    pub lambda: f64,
    pub q: f64,
    pub w: Vec<f64>,
    /// `f(q) > 0` at the witness.
    pub interior: bool,
    /// The minimizing class sat on the boundary of the region at the grid
    /// crossing; reported as non-generic.
    pub boundary_witness: bool,
    pub oracle_converged: bool,
    /// `|F₁ - λf|` at the witness.
    pub residual_value: f64,
    /// `|∂_q F₁ - λf'|` at the witness.
    pub residual_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaScan {
    pub b: usize,
    pub lambdas: Vec<f64>,
    /// `curves[k][i] = c_{k+1,M}(H_{λ_i})`.
    pub curves: Vec<Vec<f64>>,
    pub crossings: Vec<LambdaCrossing>,
    /// Distinct positive `λ*` among the crossings that passed the oracle.
    pub distinct_positive: Vec<f64>,
    pub monotone_decreasing: bool,
}

impl LambdaScan {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["lambda".to_string()];
        header.extend((1..=self.b).map(|k| format!("c_{k}")));
        w.write_record(&header)?;
        for (i, l) in self.lambdas.iter().enumerate() {
            let mut row = vec![l.to_string()];
            row.extend(self.curves.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn lambda_family(f1: &GeneratingFamily, f: &Expr, lambda: f64) -> Result<GeneratingFamily, GenFamError> {
    let g = Expr::Sub(
        Box::new(f1.g().clone()),
        Box::new(Expr::Mul(Box::new(Expr::Const(lambda)), Box::new(f.clone()))),
    );
    GeneratingFamily::new(f1.q_signs().to_vec(), g)
}

struct Oracle<'a> {
    f1: &'a GeneratingFamily,
    f: &'a Expr,
    df: Expr,
    ddf: Expr,
}

impl Oracle<'_> {
    fn fq(&self, e: &Expr, q: f64) -> f64 {
        e.eval(&Bindings::at(q, &[])).unwrap_or(f64::NAN)
    }

    /// `[F₁ - λf, ∂_q F₁ - λf', ∂_w F₁]` at `(q, w, λ)`.
    fn residual(&self, q: f64, w: &[f64], lambda: f64) -> DVector<f64> {
        let k = w.len();
        let mut r = DVector::zeros(k + 2);
        r[0] = self.f1.value(q, w) - lambda * self.fq(self.f, q);
        let grad = self.f1.gradient(q, w);
        r[1] = grad[0] - lambda * self.fq(&self.df, q);
        for a in 0..k {
            r[2 + a] = grad[1 + a];
        }
        r
    }

    /// Newton on the residual in `(q, w, λ)`.
    fn solve(&self, q: f64, w: &[f64], lambda: f64) -> Option<(f64, Vec<f64>, f64)> {
        let k = w.len();
        let mut x = DVector::zeros(k + 2);
        x[0] = q;
        x[k + 1] = lambda;
        for a in 0..k {
            x[1 + a] = w[a];
        }
        let unpack = |x: &DVector<f64>| (x[0], x.as_slice()[1..=k].to_vec(), x[k + 1]);
        for _ in 0..60 {
            let (q, w, l) = unpack(&x);
            let r = self.residual(q, &w, l);
            if !r.iter().all(|v| v.is_finite()) {
                return None;
            }
            if r.amax() <= 1e-14 * (1.0 + l.abs()) {
                break;
            }
            let grad = self.f1.gradient(q, &w);
            let hess = self.f1.hessian(q, &w);
            let mut j = DMatrix::zeros(k + 2, k + 2);
            // Row 0: d(F₁ - λf).
            j[(0, 0)] = grad[0] - l * self.fq(&self.df, q);
            for a in 0..k {
                j[(0, 1 + a)] = grad[1 + a];
            }
            j[(0, k + 1)] = -self.fq(self.f, q);
            // Row 1: d(∂_q F₁ - λf').
            j[(1, 0)] = hess[(0, 0)] - l * self.fq(&self.ddf, q);
            for a in 0..k {
                j[(1, 1 + a)] = hess[(0, 1 + a)];
            }
            j[(1, k + 1)] = -self.fq(&self.df, q);
            // Rows 2..: d(∂_w F₁).
            for a in 0..k {
                for c in 0..=k {
                    j[(2 + a, c)] = hess[(1 + a, c)];
                }
            }
            let step = j.lu().solve(&r)?;
            let limit = 0.5;
            let scale = if step.amax() > limit { limit / step.amax() } else { 1.0 };
            x -= step * scale;
        }
        let (q, w, l) = unpack(&x);
        let r = self.residual(q, &w, l);
        (r.amax() <= 1e-9).then_some((crate::jet::reduce_angle(q), w, l))
    }
}

/// `c_{k,M}(F₁ - λf)` for `λ` on `[0, λ_max]`, its zeros and their witnesses.
pub fn lambda_scan(
    f1: &GeneratingFamily,
    f: &Expr,
    lambda_max: f64,
    n_lambda: usize,
    grids: Grids,
) -> Result<LambdaScan, ScenarioError> {
    if !(lambda_max > 0.0) || n_lambda < 2 {
        return Err(ScenarioError::Precondition(format!(
            "need lambda_max > 0 and n_lambda >= 2, got {lambda_max}, {n_lambda}"
        )));
    }
    let b = spectra::betti_of_region(f, grids.n_q)?;
    let lambdas: Vec<f64> = (0..n_lambda)
        .map(|i| lambda_max * i as f64 / (n_lambda - 1) as f64)
        .collect();
    let spectra: Vec<spectra::ViterboSpectrum> = lambdas
        .par_iter()
        .map(|l| -> Result<_, ScenarioError> {
            let h = lambda_family(f1, f, *l)?;
            Ok(spectra::viterbo_numbers_with_boundary(&h, f, grids)?)
        })
        .collect::<Result<_, _>>()?;
    if let Some(bad) = spectra[0].values.iter().find(|v| **v <= 0.0) {
        return Err(ScenarioError::Precondition(format!(
            "c_k,M(H_0) must be positive for every k, found {bad}"
        )));
    }
    let last = &spectra[n_lambda - 1].values;
    if last.iter().any(|v| *v >= 0.0) {
        return Err(ScenarioError::LambdaMaxTooSmall { lambda_max, values: last.clone() });
    }
    let curves: Vec<Vec<f64>> = (0..b).map(|k| spectra.iter().map(|s| s.values[k]).collect()).collect();
    let monotone_decreasing = curves
        .iter()
        .all(|c| c.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs())));
    let oracle = Oracle { f1, f, df: f.differentiate(Var::Q), ddf: f.differentiate(Var::Q).differentiate(Var::Q) };
    let mut crossings = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        for i in 0..n_lambda - 1 {
            if !(c[i] > 0.0 && c[i + 1] <= 0.0) {
                continue;
            }
            let guess_l = lambdas[i] + (lambdas[i + 1] - lambdas[i]) * c[i] / (c[i] - c[i + 1]);
            let wit = &spectra[i + 1].witnesses[k];
            let solved = oracle.solve(wit.q, &wit.w, guess_l);
            let (q, w, lambda, converged) = match solved {
                Some((q, w, l)) => (q, w, l, true),
                None => (wit.q, wit.w.clone(), guess_l, false),
            };
            let r = oracle.residual(q, &w, lambda);
            crossings.push(LambdaCrossing {
                k: k + 1,
                lambda,
                interior: oracle.fq(f, q) > 0.0,
                boundary_witness: wit.on_boundary,
                oracle_converged: converged,
                residual_value: r[0].abs(),
                residual_slope: r[1].abs(),
                q,
                w,
            });
        }
    }
    let mut distinct: Vec<f64> = Vec::new();
    for c in &crossings {
        if c.oracle_converged && c.interior && c.lambda > 0.0
            && !distinct.iter().any(|d| (d - c.lambda).abs() <= 1e-9 * (1.0 + d.abs()))
        {
            distinct.push(c.lambda);
        }
    }
    distinct.sort_by(f64::total_cmp);
    Ok(LambdaScan { b, lambdas, curves, crossings, distinct_positive: distinct, monotone_decreasing })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem5Report {
    pub positivity: cerf::PositiveFamilyReport,
    /// Crossings with the positive part of the surface of `j¹(λf)`.
    pub plus: Vec<LambdaCrossing>,
    /// Crossings with the positive part of the surface of `j¹(-λf)`.
    pub minus: Vec<LambdaCrossing>,
    pub count: usize,
    pub pass: bool,
}

/// `⟨d, (cos q, sin q)⟩` as an expression.
pub fn linear_restriction(d: [f64; 2]) -> Expr {
    let term = |c: f64, func: Func| {
        Expr::Mul(Box::new(Expr::Const(c)), Box::new(Expr::Call(func, Box::new(Expr::Var(Var::Q)))))
    };
    Expr::Add(Box::new(term(d[0], Func::Cos)), Box::new(term(d[1], Func::Sin)))
}

/// Deforms the fiber over `x` positively and counts the intersections of the
/// end Legendrian with the parts `λ > 0` of the surfaces of `j¹(±λf)`, where
/// `f` restricts the linear form `⟨direction, ·⟩` to the circle.
pub fn theorem5_experiment(
    x_fiber: [f64; 2],
    direction: [f64; 2],
    deformation: &FamilyPath,
    lambda_max: f64,
    n_lambda: usize,
    grids: Grids,
) -> Result<Theorem5Report, ScenarioError> {
    let norm = direction[0].hypot(direction[1]);
    if !(norm > 0.0) {
        return Err(ScenarioError::Precondition("direction must be nonzero".into()));
    }
    let d = [direction[0] / norm, direction[1] / norm];
    let (a, b) = deformation.range();
    let start = deformation.slice(a)?;
    let set = genfam::fiber_critical_set(&start, grids.n_q, 1e-12)?;
    for pt in &set.points {
        let (s, c) = pt.q.sin_cos();
        let (u, p) = (x_fiber[0] * c + x_fiber[1] * s, -x_fiber[0] * s + x_fiber[1] * c);
        if (pt.value - u).abs() > 1e-8 || (pt.p - p).abs() > 1e-8 {
            return Err(ScenarioError::Precondition(format!(
                "deformation does not start at the fiber over {x_fiber:?} (q = {})",
                pt.q
            )));
        }
    }
    let positivity = cerf::check_positive_family(deformation, grids.n_q)?;
    if !positivity.pass {
        return Err(ScenarioError::Precondition(format!(
            "deformation is not positive (min vertical speed {})",
            positivity.min_speed
        )));
    }
    let end = deformation.slice(b)?;
    let f = linear_restriction(d);
    let minus_f = linear_restriction([-d[0], -d[1]]);
    let plus = lambda_scan(&end, &f, lambda_max, n_lambda, grids)?;
    let minus = lambda_scan(&end, &minus_f, lambda_max, n_lambda, grids)?;
    let keep = |s: LambdaScan| -> Vec<LambdaCrossing> {
        let mut out: Vec<LambdaCrossing> = Vec::new();
        for c in s.crossings {
            if c.oracle_converged && c.interior && c.lambda > 0.0
                && !out.iter().any(|o| (o.lambda - c.lambda).abs() < 1e-9 && crate::jet::circle_distance(o.q, c.q) < 1e-9)
            {
                out.push(c);
            }
        }
        out
    };
    let plus = keep(plus);
    let minus = keep(minus);
    let count = plus.len() + minus.len();
    Ok(Theorem5Report {
        pass: count >= 2 && !plus.is_empty() && !minus.is_empty(),
        positivity,
        plus,
        minus,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::check_embedded;
    use std::f64::consts::PI;

    #[test]
    fn flow_and_raise() {
        let l = build_high_p_loop(0.1, 0.1, 256).unwrap();
        assert_eq!(flow_phi(&l, 0.0, 0.1), l);
        let back = translate_vertical(&flow_phi(&l, TAU, 0.1), TAU * 0.1);
        for (a, b) in l.samples().iter().zip(back.samples()) {
            assert!(wrap_delta(a.q - b.q).abs() < 1e-14);
            assert_eq!(a.p, b.p);
            assert!((a.u - b.u).abs() < 1e-14);
        }
        let z = LegendrianLoop::zero_section(64).unwrap();
        let moved = flow_phi(&z, PI, 0.1);
        for (a, b) in z.samples().iter().zip(moved.samples()) {
            assert!(wrap_delta(b.q - (a.q - PI)).abs() < 1e-15);
            assert!((b.u + 0.1 * PI).abs() < 1e-15 && b.p == 0.0);
        }
        assert_eq!(translate_vertical(&z, 0.0), z);
        assert!(translate_vertical(&z, 1.0).samples().iter().all(|s| s.u == 1.0));
    }

    #[test]
    fn high_p_loop() {
        let l = build_high_p_loop(0.1, 0.1, LOOP_SAMPLES).unwrap();
        assert!(l.min_p() >= 0.3 - 1e-15);
        assert_eq!(l.winding(), 1);
        assert_eq!(front_projection(&l).cusps.len(), 2);
        assert!(check_embedded(&l, 1e-3));
        let r = check_legendrian(&l, default_tol_leg(LOOP_SAMPLES)).unwrap();
        assert!(r.max_defect < 1e-12);
        // u closes up: the last edge is Legendrian too.
        assert!(r.accumulated_defect < 1e-9);
        assert!(build_high_p_loop(0.0, 0.1, 64).is_err());
    }

    #[test]
    fn positive_loop() {
        let iso = build_positive_loop(0.1).unwrap();
        let r = verify_loop(&iso, 0.1);
        assert!(r.pass, "{r:?}");
        assert!(r.min_alpha >= 0.1);
        assert!(r.closure_gap < 1e-12);
    }

    #[test]
    fn lambda_k_for_constants() {
        for k in 1..=5u32 {
            let l = LegendrianLoop::one_jet(720, |_| (2.0, 0.0)).unwrap();
            let r = lambda_k_intersections(&l, k);
            assert_eq!(r.count, 2 * k as usize);
            for p in &r.points {
                assert!(p.residual < 1e-8);
                let kq = (k as f64 * p.q).rem_euclid(TAU);
                if p.lambda > 0.0 {
                    assert!((p.lambda - 2.0).abs() < 1e-8);
                    assert!(kq.min(TAU - kq) < 1e-8);
                } else {
                    assert!((p.lambda + 2.0).abs() < 1e-8);
                    assert!((kq - PI).abs() < 1e-8);
                }
            }
        }
        let l = LegendrianLoop::one_jet(720, |_| (1.0, 0.0)).unwrap();
        let r = lambda_k_intersections(&l, 3);
        assert_eq!(r.points.iter().filter(|p| p.lambda > 0.0).count(), 3);
    }

    #[test]
    fn lambda_k_degenerate_and_perturbed() {
        let z = LegendrianLoop::zero_section(64).unwrap();
        let r = lambda_k_intersections(&z, 2);
        assert!(r.degenerate && r.count == 0);
        let l = LegendrianLoop::one_jet(1024, |q| (2.0 + 0.3 * q.sin(), 0.3 * q.cos())).unwrap();
        let r = lambda_k_intersections(&l, 1);
        assert!(r.count >= 2);
        assert!(r.points.iter().all(|p| p.residual < 1e-8));
    }

    #[test]
    fn lambda_scan_constant() {
        let f1 = GeneratingFamily::parse(vec![], "1.5").unwrap();
        let f = parse("cos(q)", 0).unwrap();
        let s = lambda_scan(&f1, &f, 4.0, 81, Grids::new(128, 33)).unwrap();
        assert_eq!(s.b, 1);
        assert_eq!(s.distinct_positive.len(), 1);
        assert!((s.distinct_positive[0] - 1.5).abs() < 1e-10);
        let c = &s.crossings[0];
        assert!(c.q.min(TAU - c.q) < 1e-8 && c.interior);
        assert!(s.monotone_decreasing);
    }

    #[test]
    fn lambda_scan_three_arcs() {
        let f1 = GeneratingFamily::parse(vec![], "2 + 0.3*sin(q)").unwrap();
        let f = parse("cos(3*q)", 0).unwrap();
        let s = lambda_scan(&f1, &f, 10.0, 200, Grids::new(256, 33)).unwrap();
        assert_eq!(s.b, 3);
        assert_eq!(s.distinct_positive.len(), 3, "{:?}", s.crossings);
        for c in &s.crossings {
            assert!(c.oracle_converged && c.interior);
            assert!(c.residual_value < 1e-10 && c.residual_slope < 1e-10);
        }
    }

    #[test]
    fn lambda_scan_preconditions() {
        let f = parse("cos(q)", 0).unwrap();
        let neg = GeneratingFamily::parse(vec![], "-1").unwrap();
        assert!(matches!(
            lambda_scan(&neg, &f, 10.0, 50, Grids::new(64, 33)),
            Err(ScenarioError::Precondition(_))
        ));
        let pos = GeneratingFamily::parse(vec![], "5").unwrap();
        assert!(matches!(
            lambda_scan(&pos, &f, 2.0, 50, Grids::new(64, 33)),
            Err(ScenarioError::LambdaMaxTooSmall { .. })
        ));
    }

    #[test]
    fn lambda_scan_with_fiber_variable() {
        // Stabilized: same crossing as the constant K=0 case.
        let f1 = GeneratingFamily::parse(vec![1], "1.5 + 0.1*w1*cos(q)").unwrap();
        let f = parse("cos(q)", 0).unwrap();
        let s = lambda_scan(&f1, &f, 4.0, 41, Grids::new(64, 33)).unwrap();
        assert_eq!(s.distinct_positive.len(), 1);
        let c = &s.crossings[0];
        assert!(c.oracle_converged && c.residual_value < 1e-10);
    }

    #[test]
    fn theorem5_raise() {
        let path = FamilyPath::parse(vec![], "t", (0.0, 1.0), 8).unwrap();
        let r = theorem5_experiment([0.0, 0.0], [1.0, 0.0], &path, 3.0, 61, Grids::new(128, 33)).unwrap();
        assert!(r.pass);
        assert_eq!(r.count, 2);
        assert!((r.plus[0].lambda - 1.0).abs() < 1e-10 && (r.minus[0].lambda - 1.0).abs() < 1e-10);
        assert!(r.plus[0].q.min(TAU - r.plus[0].q) < 1e-8);
        assert!((r.minus[0].q - PI).abs() < 1e-8);

        let bumpy = FamilyPath::parse(vec![], "t + 0.05*t*sin(2*q)", (0.0, 1.0), 8).unwrap();
        let r = theorem5_experiment([0.0, 0.0], [0.0, 1.0], &bumpy, 3.0, 61, Grids::new(128, 33)).unwrap();
        assert!(r.pass && r.count >= 2);
        for c in r.plus.iter().chain(&r.minus) {
            assert!(c.residual_value < 1e-6 && c.residual_slope < 1e-6);
        }

        let negative = FamilyPath::parse(vec![], "t*sin(q)", (0.0, 1.0), 8).unwrap();
        assert!(matches!(
            theorem5_experiment([0.0, 0.0], [1.0, 0.0], &negative, 3.0, 61, Grids::new(128, 33)),
            Err(ScenarioError::Precondition(_))
        ));
        let elsewhere = FamilyPath::parse(vec![], "cos(q) + t", (0.0, 1.0), 8).unwrap();
        assert!(matches!(
            theorem5_experiment([0.0, 0.0], [1.0, 0.0], &elsewhere, 3.0, 61, Grids::new(128, 33)),
            Err(ScenarioError::Precondition(_))
        ));
    }
}
