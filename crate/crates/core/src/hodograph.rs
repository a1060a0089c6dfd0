//! The identification of `J¹(S¹)` with cooriented contact elements of the
//! plane: `(q, p, u)` goes to the element at `u·e(q) + p·e(q)^⊥`
//! cooriented by `e(q) = (cos q, sin q)`, with `e^⊥ = (-sin q, cos q)`.

use std::f64::consts::TAU;
use std::io;

use serde::Serialize;

use crate::jet::{check_closed, reduce_angle, wrap_delta, JetError, JetPoint, LegendrianLoop, MIN_LOOP_SAMPLES};
use crate::svg::Canvas;

/// A point `x` of the plane with the unit covector `(cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactElement {
    pub x: [f64; 2],
    pub theta: f64,
}

impl ContactElement {
    pub fn new(x: [f64; 2], theta: f64) -> Self {
        ContactElement { x, theta: reduce_angle(theta) }
    }

    pub fn normal(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }
}

pub fn hodograph_fwd(pt: &JetPoint) -> ContactElement {
    let (s, c) = pt.q.sin_cos();
    ContactElement::new([pt.u * c - pt.p * s, pt.u * s + pt.p * c], pt.q)
}

pub fn hodograph_inv(el: &ContactElement) -> JetPoint {
    let (s, c) = el.theta.sin_cos();
    let [x1, x2] = el.x;
    JetPoint::new(el.theta, -x1 * s + x2 * c, x1 * c + x2 * s)
}

pub fn hodograph_loop(l: &LegendrianLoop) -> Vec<ContactElement> {
    l.samples().iter().map(hodograph_fwd).collect()
}

/// The 1-jet of `q ↦ ⟨x, e(q)⟩` at `n` equally spaced angles: the fiber of
/// the contact elements over `x`.
pub fn fiber_as_jet(x: [f64; 2], n: usize) -> Result<LegendrianLoop, JetError> {
    LegendrianLoop::one_jet(n, |q| {
        let (s, c) = q.sin_cos();
        (x[0] * c + x[1] * s, -x[0] * s + x[1] * c)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StLegendrianReport {
    /// Largest `|⟨e(θ̄), Δx⟩| / (1 + |Δθ| + |Δx|)` over the edges, with
    /// `θ̄` the midpoint angle.
    pub max_defect: f64,
    pub worst_edge: usize,
    pub pass: bool,
}

fn element_gap(a: &ContactElement, b: &ContactElement) -> f64 {
    let dx = ((b.x[0] - a.x[0]).powi(2) + (b.x[1] - a.x[1]).powi(2)).sqrt();
    wrap_delta(b.theta - a.theta).abs() + dx
}

/// Tangency of a closed curve of contact elements to the contact planes:
/// the base velocity must be annihilated by the coorienting covector.
pub fn check_legendrian_st(curve: &[ContactElement], tol: f64) -> Result<StLegendrianReport, JetError> {
    if curve.len() < MIN_LOOP_SAMPLES {
        return Err(JetError::TooFewSamples(curve.len()));
    }
    check_closed(curve, element_gap)?;
    let n = curve.len();
    let mut r = StLegendrianReport { max_defect: 0.0, worst_edge: 0, pass: false };
    for i in 0..n {
        let (a, b) = (&curve[i], &curve[(i + 1) % n]);
        let dth = wrap_delta(b.theta - a.theta);
        let mid = a.theta + 0.5 * dth;
        let dx = [b.x[0] - a.x[0], b.x[1] - a.x[1]];
        let raw = (mid.cos() * dx[0] + mid.sin() * dx[1]).abs();
        let d = raw / (1.0 + dth.abs() + (dx[0].powi(2) + dx[1].powi(2)).sqrt());
        if d > r.max_defect {
            r.max_defect = d;
            r.worst_edge = i;
        }
    }
    r.pass = r.max_defect <= tol;
    Ok(r)
}

/// CSV with columns `s, x1, x2, theta`, `s = i/n`.
pub fn write_elements_csv<W: io::Write>(curve: &[ContactElement], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "x1", "x2", "theta"])?;
    let n = curve.len();
    for (i, e) in curve.iter().enumerate() {
        w.write_record(&[
            (i as f64 / n as f64).to_string(),
            e.x[0].to_string(),
            e.x[1].to_string(),
            e.theta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Base curve with a short coorientation tick every `n / ticks` samples.
pub fn elements_svg(curve: &[ContactElement], ticks: usize) -> String {
    let mut c = Canvas::new(600.0, 600.0);
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|e| (e.x[0], e.x[1])).collect();
    if let Some(first) = pts.first().copied() {
        pts.push(first);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for e in curve {
        for a in 0..2 {
            lo[a] = lo[a].min(e.x[a]);
            hi[a] = hi[a].max(e.x[a]);
        }
    }
    let len = 0.08 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
    c.polyline(pts, "black", 1.5);
    let every = (curve.len() / ticks.max(1)).max(1);
    for e in curve.iter().step_by(every) {
        let nrm = e.normal();
        c.segment((e.x[0], e.x[1]), (e.x[0] + len * nrm[0], e.x[1] + len * nrm[1]), "#cc0000", 1.0);
    }
    c.render()
}

/// Angles of `n` equally spaced samples, for building element curves.
pub fn sample_angles(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| TAU * i as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{check_legendrian, default_tol_leg};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn forward_examples() {
        let e = hodograph_fwd(&JetPoint::new(0.0, 0.0, 0.0));
        assert_eq!((e.x, e.theta), ([0.0, 0.0], 0.0));
        let e = hodograph_fwd(&JetPoint::new(0.0, 0.0, 1.0));
        assert_eq!((e.x, e.theta), ([1.0, 0.0], 0.0));
        let e = hodograph_fwd(&JetPoint::new(FRAC_PI_2, 2.0, 3.0));
        assert!((e.x[0] + 2.0).abs() < 1e-15 && (e.x[1] - 3.0).abs() < 1e-15);
        assert_eq!(e.theta, FRAC_PI_2);
    }

    #[test]
    fn inverse_examples() {
        for th in [0.0, 1.0, 4.0] {
            let p = hodograph_inv(&ContactElement::new([0.0, 0.0], th));
            assert_eq!((p.q, p.p, p.u), (th, 0.0, 0.0));
        }
        let p = hodograph_inv(&ContactElement::new([1.0, 0.0], 0.0));
        assert_eq!((p.q, p.p, p.u), (0.0, 0.0, 1.0));
        let p = hodograph_inv(&ContactElement::new([-2.0, 3.0], FRAC_PI_2));
        assert_eq!(p.q, FRAC_PI_2);
        assert!((p.p - 2.0).abs() < 1e-15 && (p.u - 3.0).abs() < 1e-15);
    }

    #[test]
    fn fibers() {
        let zero = fiber_as_jet([0.0, 0.0], 64).unwrap();
        assert!(zero.samples().iter().all(|s| s.p == 0.0 && s.u == 0.0));
        let l = fiber_as_jet([3.0, 4.0], 720).unwrap();
        let (lo, hi) = l
            .samples()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.u), b.max(s.u)));
        assert!((lo + 5.0).abs() < 1e-3 && (hi - 5.0).abs() < 1e-3);
        for e in hodograph_loop(&l) {
            assert!((e.x[0] - 3.0).abs() < 1e-14 && (e.x[1] - 4.0).abs() < 1e-14);
        }
        let l = fiber_as_jet([1.0, 0.0], 64).unwrap();
        for s in l.samples() {
            assert!((s.u - s.q.cos()).abs() < 1e-15 && (s.p + s.q.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn legendrian_on_both_sides() {
        let zero = hodograph_loop(&fiber_as_jet([0.0, 0.0], 64).unwrap());
        assert!(check_legendrian_st(&zero, 1e-12).unwrap().pass);

        let n = 256;
        let l = LegendrianLoop::one_jet(n, |q| (1.0 + 0.3 * (2.0 * q).sin(), 0.6 * (2.0 * q).cos())).unwrap();
        assert!(check_legendrian(&l, default_tol_leg(n)).unwrap().pass);
        assert!(check_legendrian_st(&hodograph_loop(&l), default_tol_leg(n)).unwrap().pass);

        let translating: Vec<ContactElement> = sample_angles(64)
            .map(|s| ContactElement::new([s.cos(), s.sin()], 0.0))
            .collect();
        assert!(!check_legendrian_st(&translating, default_tol_leg(64)).unwrap().pass);
    }

    #[test]
    fn open_or_short_curves_rejected() {
        let short: Vec<ContactElement> = sample_angles(8).map(|s| ContactElement::new([0.0, 0.0], s)).collect();
        assert!(matches!(check_legendrian_st(&short, 1.0), Err(JetError::TooFewSamples(8))));
        let open: Vec<ContactElement> = (0..32).map(|i| ContactElement::new([i as f64, 0.0], FRAC_PI_2)).collect();
        assert!(matches!(check_legendrian_st(&open, 1.0), Err(JetError::NotClosed { .. })));
    }

    #[test]
    fn outputs() {
        let curve = hodograph_loop(&fiber_as_jet([1.0, 0.0], 16).unwrap());
        let mut buf = Vec::new();
        write_elements_csv(&curve, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("s,x1,x2,theta\n0,1,0,0\n"));
        let svg = elements_svg(&curve, 8);
        assert_eq!(svg.matches("<line").count(), 8);
    }
}
