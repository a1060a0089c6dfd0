//! Points, Legendrian loops and isotopies in the 1-jet space of the circle,
//! with the contact form `du - p dq`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

/// Smallest sample count a loop may have.
pub const MIN_LOOP_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("a loop needs at least {MIN_LOOP_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("loop is not closed: closing edge has length {gap}, typical edge {typical}")]
    NotClosed { gap: f64, typical: f64 },
    #[error("an isotopy needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("frame {frame} does not match frame 0 (samples or winding differ)")]
    FrameMismatch { frame: usize },
    #[error("time stamps must be strictly increasing (at frame {0})")]
    NonIncreasingTimes(usize),
    #[error("time stamps and frames differ in length ({times} vs {frames})")]
    TimeCountMismatch { times: usize, frames: usize },
}

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(q: f64) -> f64 {
    let r = q.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of an angle difference in `(-π, π]`.
pub fn wrap_delta(d: f64) -> f64 {
    let r = (d + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_delta(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetPoint {
    pub q: f64,
    pub p: f64,
    pub u: f64,
}

/// A tangent vector `(v_q, v_p, v_u)` at a point of the jet space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tangent {
    pub dq: f64,
    pub dp: f64,
    pub du: f64,
}

impl Tangent {
    pub fn new(dq: f64, dp: f64, du: f64) -> Self {
        Tangent { dq, dp, du }
    }
}

impl JetPoint {
    pub fn new(q: f64, p: f64, u: f64) -> Self {
        JetPoint {
            q: reduce_angle(q),
            p,
            u,
        }
    }

    /// Evaluates `du - p dq` on `tangent`.
    pub fn contact_form(&self, tangent: Tangent) -> f64 {
        contact_form(self, tangent)
    }
}

pub fn contact_form(point: &JetPoint, tangent: Tangent) -> f64 {
    tangent.du - point.p * tangent.dq
}

/// A closed, cyclically ordered sampling of a Legendrian curve.
///
/// The last sample connects back to the first; the start point is not
/// repeated.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendrianLoop {
    samples: Vec<JetPoint>,
    winding: i64,
}

impl LegendrianLoop {
    pub fn new(samples: Vec<JetPoint>) -> Result<Self, JetError> {
        if samples.len() < MIN_LOOP_SAMPLES {
            return Err(JetError::TooFewSamples(samples.len()));
        }
        let samples: Vec<JetPoint> = samples
            .into_iter()
            .map(|s| JetPoint::new(s.q, s.p, s.u))
            .collect();
        let n = samples.len();
        let total: f64 = (0..n)
            .map(|i| wrap_delta(samples[(i + 1) % n].q - samples[i].q))
            .sum();
        let winding = (total / TAU).round() as i64;
        Ok(LegendrianLoop { samples, winding })
    }

    /// `j¹f` sampled at `n` equally spaced angles, from `f` returning
    /// `(f(q), f'(q))`.
    pub fn one_jet(n: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self, JetError> {
        let samples = (0..n)
            .map(|i| {
                let q = TAU * i as f64 / n as f64;
                let (u, p) = f(q);
                JetPoint::new(q, p, u)
            })
            .collect();
        Self::new(samples)
    }

    pub fn zero_section(n: usize) -> Result<Self, JetError> {
        Self::one_jet(n, |_| (0.0, 0.0))
    }

    pub fn samples(&self) -> &[JetPoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Degree of `s ↦ q(s)`.
    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// Edges `(i, i+1 mod n)` with their lift-consistent `Δq`.
    pub fn edges(&self) -> impl Iterator<Item = (&JetPoint, &JetPoint, f64)> + '_ {
        let n = self.samples.len();
        (0..n).map(move |i| {
            let a = &self.samples[i];
            let b = &self.samples[(i + 1) % n];
            (a, b, wrap_delta(b.q - a.q))
        })
    }

    pub fn map(&self, f: impl Fn(&JetPoint) -> JetPoint) -> LegendrianLoop {
        LegendrianLoop {
            samples: self.samples.iter().map(|s| {
                let m = f(s);
                JetPoint::new(m.q, m.p, m.u)
            }).collect(),
            winding: self.winding,
        }
    }

    pub fn min_p(&self) -> f64 {
        self.samples.iter().map(|s| s.p).fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `s, q, p, u`, `s = i / n`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "q", "p", "u"])?;
        let n = self.len() as f64;
        for (i, s) in self.samples.iter().enumerate() {
            w.write_record(&[
                (i as f64 / n).to_string(),
                s.q.to_string(),
                s.p.to_string(),
                s.u.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn edge_length(a: &JetPoint, b: &JetPoint) -> f64 {
    let dq = wrap_delta(b.q - a.q);
    (dq * dq + (b.p - a.p).powi(2) + (b.u - a.u).powi(2)).sqrt()
}

/// Fails when the closing edge is far longer than every other edge, which is
/// how an open polyline handed in as a loop shows up.
pub(crate) fn check_closed<T>(
    points: &[T],
    len: impl Fn(&T, &T) -> f64,
) -> Result<(), JetError> {
    let n = points.len();
    let gap = len(&points[n - 1], &points[0]);
    let typical = (0..n - 1)
        .map(|i| len(&points[i], &points[i + 1]))
        .fold(0.0, f64::max);
    if gap > 10.0 * typical.max(1e-12) {
        return Err(JetError::NotClosed { gap, typical });
    }
    Ok(())
}

/// Default Legendrian tolerance for a loop of `n` samples: a tenth of the
/// squared angular grid step.
pub fn default_tol_leg(n: usize) -> f64 {
    0.1 * (TAU / n as f64).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendrianReport {
    /// Largest normalized edge defect `|Δu - p̄Δq| / (1 + |Δq| + |Δu|)`.
    pub max_defect: f64,
    /// Sum of the unnormalized edge defects `|Δu - p̄Δq|`; the discrete
    /// analogue of `∮ |du - p dq|`.
    pub accumulated_defect: f64,
    pub worst_edge: usize,
    pub pass: bool,
}

pub fn check_legendrian(l: &LegendrianLoop, tol_leg: f64) -> Result<LegendrianReport, JetError> {
    check_closed(l.samples(), edge_length)?;
    let mut max_defect = 0.0;
    let mut worst_edge = 0;
    let mut accumulated = 0.0;
    for (i, (a, b, dq)) in l.edges().enumerate() {
        let du = b.u - a.u;
        let raw = (du - 0.5 * (a.p + b.p) * dq).abs();
        accumulated += raw;
        let d = raw / (1.0 + dq.abs() + du.abs());
        if d > max_defect {
            max_defect = d;
            worst_edge = i;
        }
    }
    Ok(LegendrianReport {
        max_defect,
        accumulated_defect: accumulated,
        worst_edge,
        pass: max_defect <= tol_leg,
    })
}

/// A discretized Legendrian isotopy: frames over strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotopy {
    frames: Vec<LegendrianLoop>,
    times: Vec<f64>,
}

impl Isotopy {
    pub fn new(frames: Vec<LegendrianLoop>, times: Vec<f64>) -> Result<Self, JetError> {
        if frames.len() < 2 {
            return Err(JetError::TooFewFrames(frames.len()));
        }
        if times.len() != frames.len() {
            return Err(JetError::TimeCountMismatch {
                times: times.len(),
                frames: frames.len(),
            });
        }
        for (i, f) in frames.iter().enumerate().skip(1) {
            if f.len() != frames[0].len() || f.winding() != frames[0].winding() {
                return Err(JetError::FrameMismatch { frame: i });
            }
        }
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                return Err(JetError::NonIncreasingTimes(i));
            }
        }
        Ok(Isotopy { frames, times })
    }

    pub fn frames(&self) -> &[LegendrianLoop] {
        &self.frames
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Same frames over times multiplied by `factor > 0`.
    pub fn rescale_time(&self, factor: f64) -> Isotopy {
        Isotopy {
            frames: self.frames.clone(),
            times: self.times.iter().map(|t| t * factor).collect(),
        }
    }

    /// Velocity of sample `j` at frame `i`.
    ///
    /// Centered differences inside, three-point one-sided stencils at the
    /// ends (two-point when there are only two frames). Angle differences
    /// are lifted through consecutive frames.
    pub fn velocity(&self, i: usize, j: usize) -> Tangent {
        let m = self.frames.len();
        let pt = |k: usize| self.frames[k].samples()[j];
        // Coordinates of frame k relative to frame `base`, with q lifted.
        let rel = |base: usize, k: usize| -> [f64; 3] {
            let mut dq = 0.0;
            if k > base {
                for s in base..k {
                    dq += wrap_delta(pt(s + 1).q - pt(s).q);
                }
            } else {
                for s in k..base {
                    dq -= wrap_delta(pt(s + 1).q - pt(s).q);
                }
            }
            [dq, pt(k).p - pt(base).p, pt(k).u - pt(base).u]
        };
        let t = &self.times;
        let v = if m == 2 {
            let d = rel(0, 1);
            let h = t[1] - t[0];
            [d[0] / h, d[1] / h, d[2] / h]
        } else if i == 0 || i == m - 1 {
            let (k1, k2) = if i == 0 { (1, 2) } else { (m - 2, m - 3) };
            let h1 = t[k1] - t[i];
            let h2 = t[k2] - t[i];
            let f1 = rel(i, k1);
            let f2 = rel(i, k2);
            let w1 = h2 / (h1 * (h2 - h1));
            let w2 = -h1 / (h2 * (h2 - h1));
            [
                w1 * f1[0] + w2 * f2[0],
                w1 * f1[1] + w2 * f2[1],
                w1 * f1[2] + w2 * f2[2],
            ]
        } else {
            let d = rel(i - 1, i + 1);
            let h = t[i + 1] - t[i - 1];
            [d[0] / h, d[1] / h, d[2] / h]
        };
        Tangent::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_alpha: f64,
    pub argmin_frame: usize,
    pub argmin_sample: usize,
    pub pass: bool,
}

/// Minimum over frames and samples of the contact form on the estimated
/// velocity. Positive iff the minimum is strictly positive.
pub fn check_positive_isotopy(iso: &Isotopy) -> PositivityReport {
    use rayon::prelude::*;
    let n = iso.frames()[0].len();
    let per_frame: Vec<(f64, usize)> = (0..iso.frames().len())
        .into_par_iter()
        .map(|i| {
            let frame = &iso.frames()[i];
            (0..n)
                .map(|j| (contact_form(&frame.samples()[j], iso.velocity(i, j)), j))
                .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
        })
        .collect();
    let (argmin_frame, &(min_alpha, argmin_sample)) = per_frame
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &(f64, usize))>, (i, x)| match acc {
            Some((_, best)) if best.0 <= x.0 => acc,
            _ => Some((i, x)),
        })
        .expect("at least two frames");
    PositivityReport {
        min_alpha,
        argmin_frame,
        argmin_sample,
        pass: min_alpha > 0.0,
    }
}

/// Front projection `(q, u)` with cusp marks.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    pub points: Vec<(f64, f64)>,
    /// Indices where `Δq` changes sign.
    pub cusps: Vec<usize>,
}

pub fn front_projection(l: &LegendrianLoop) -> Front {
    let dqs: Vec<f64> = l.edges().map(|(_, _, dq)| dq).collect();
    let n = dqs.len();
    // Sign of the incoming edge at each sample; zero steps inherit the sign
    // of the previous nonzero step.
    let mut last = dqs.iter().rev().copied().find(|d| *d != 0.0).unwrap_or(0.0).signum();
    let mut signs = Vec::with_capacity(n);
    for d in &dqs {
        if *d != 0.0 {
            last = d.signum();
        }
        signs.push(last);
    }
    let cusps = (0..n)
        .filter(|&i| {
            let incoming = signs[(i + n - 1) % n];
            let outgoing = signs[i];
            incoming != 0.0 && outgoing != 0.0 && incoming != outgoing
        })
        .collect();
    Front {
        points: l.samples().iter().map(|s| (s.q, s.u)).collect(),
        cusps,
    }
}

impl Front {
    /// The front drawn with `q` lifted along the loop, cusps marked.
    pub fn to_svg(&self) -> String {
        let mut c = crate::svg::Canvas::new(800.0, 400.0);
        let mut lifted = Vec::with_capacity(self.points.len() + 1);
        let mut q = self.points.first().map(|p| p.0).unwrap_or(0.0);
        for (i, (pq, u)) in self.points.iter().enumerate() {
            if i > 0 {
                q += wrap_delta(pq - self.points[i - 1].0);
            }
            lifted.push((q, *u));
        }
        if let (Some(first), Some(last)) = (self.points.first(), lifted.last().copied()) {
            lifted.push((last.0 + wrap_delta(first.0 - self.points[self.points.len() - 1].0), first.1));
        }
        for i in &self.cusps {
            c.dot(lifted[*i], 3.0, "#cc0000");
        }
        c.polyline(lifted, "black", 1.5);
        c.render()
    }
}

/// Smallest `(q, p, u)` distance between non-adjacent samples, with the
/// `q` component measured on the circle.
pub fn min_separation(l: &LegendrianLoop) -> f64 {
    use rayon::prelude::*;
    let s = l.samples();
    let n = s.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let dq = circle_distance(s[i].q, s[j].q);
                let d = (dq * dq + (s[i].p - s[j].p).powi(2) + (s[i].u - s[j].u).powi(2)).sqrt();
                best = best.min(d);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

pub fn check_embedded(l: &LegendrianLoop, tol: f64) -> bool {
    min_separation(l) >= tol
}
