//! One-parameter families `F_t`: Cerf diagrams, vertical speeds and the
//! behaviour of the min-max values along the path.

use std::io;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{self, Bindings, Expr, Var};
use crate::genfam::{self, FiberCriticalPoint, GenFamError, GeneratingFamily};
use crate::jet::circle_distance;
use crate::spectra::{self, Grids, Region, SpectraError};
use crate::svg::Canvas;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CerfError {
    #[error("need at least {min} samples in t, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("empty parameter range [{0}, {1}]")]
    BadRange(f64, f64),
    #[error("family uses `{0}`, which is not q, t or a fiber coordinate")]
    ForeignVariable(Var),
    #[error("lost track of a critical point near t = {t}, q = {q}")]
    LostBranch { t: f64, q: f64 },
    #[error("point q = {q} is vertical (fiber Hessian determinant {det})")]
    Vertical { q: f64, det: f64 },
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Family(#[from] GenFamError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// `F_t = Q + g(q, w, t)` for `t` in `[a, b]`, sampled at `n_t` points.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPath {
    q_signs: Vec<i8>,
    g: Expr,
    speed: Expr,
    range: (f64, f64),
    n_t: usize,
}

impl FamilyPath {
    pub fn new(q_signs: Vec<i8>, g: Expr, range: (f64, f64), n_t: usize) -> Result<Self, CerfError> {
        if !(range.0 < range.1) {
            return Err(CerfError::BadRange(range.0, range.1));
        }
        if n_t < 2 {
            return Err(CerfError::TooFewSamples { got: n_t, min: 2 });
        }
        let k = q_signs.len();
        for v in g.free_vars() {
            match v {
                Var::Q | Var::T => {}
                Var::W(i) if i <= k => {}
                other => return Err(CerfError::ForeignVariable(other)),
            }
        }
        let speed = g.differentiate(Var::T);
        Ok(FamilyPath { q_signs, g, speed, range, n_t })
    }

    pub fn parse(q_signs: Vec<i8>, g: &str, range: (f64, f64), n_t: usize) -> Result<Self, CerfError> {
        let k = q_signs.len();
        Self::new(q_signs, expr::parse(g, k)?, range, n_t)
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn q_signs(&self) -> &[i8] {
        &self.q_signs
    }

    pub fn expression(&self) -> &Expr {
        &self.g
    }

    /// The sample times, endpoints included.
    pub fn times(&self) -> Vec<f64> {
        let (a, b) = self.range;
        (0..self.n_t)
            .map(|i| {
                if i + 1 == self.n_t {
                    b
                } else {
                    a + (b - a) * i as f64 / (self.n_t - 1) as f64
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.range.1 - self.range.0) / (self.n_t - 1) as f64
    }

    pub fn slice(&self, t: f64) -> Result<GeneratingFamily, GenFamError> {
        GeneratingFamily::new(self.q_signs.clone(), self.g.substitute(Var::T, t))
    }

    /// `∂F_t/∂t` at `(q, w, t)`.
    pub fn time_derivative(&self, q: f64, w: &[f64], t: f64) -> f64 {
        self.speed.eval(&Bindings::at(q, w).with_t(t)).unwrap_or(f64::NAN)
    }
}

/// Fiber Hessian determinants below this count as vertical.
pub const TOL_VERTICAL: f64 = 1e-9;

/// Speed of the front at a non-vertical point of the fiber-critical set.
pub fn vertical_speed(path: &FamilyPath, pt: &FiberCriticalPoint, t0: f64) -> Result<f64, CerfError> {
    if pt.hessian_det.abs() <= TOL_VERTICAL {
        return Err(CerfError::Vertical { q: pt.q, det: pt.hessian_det });
    }
    Ok(path.time_derivative(pt.q, &pt.w, t0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveFamilyReport {
    pub min_speed: f64,
    pub argmin_t: f64,
    pub argmin_q: f64,
    pub checked_points: usize,
    pub vertical_points: usize,
    pub pass: bool,
}

/// Minimum vertical speed over the sampled fiber-critical sets.
pub fn check_positive_family(path: &FamilyPath, n_q: usize) -> Result<PositiveFamilyReport, CerfError> {
    let per_t: Vec<(f64, f64, f64, usize, usize)> = path
        .times()
        .into_par_iter()
        .map(|t| -> Result<_, CerfError> {
            let fam = path.slice(t)?;
            let set = genfam::fiber_critical_set(&fam, n_q, 1e-12)?;
            let mut best = (f64::INFINITY, t, f64::NAN, 0, 0);
            for pt in &set.points {
                match vertical_speed(path, pt, t) {
                    Ok(v) => {
                        best.3 += 1;
                        if v < best.0 {
                            best.0 = v;
                            best.2 = pt.q;
                        }
                    }
                    Err(_) => best.4 += 1,
                }
            }
            Ok(best)
        })
        .collect::<Result<_, _>>()?;
    let mut report = PositiveFamilyReport {
        min_speed: f64::INFINITY,
        argmin_t: f64::NAN,
        argmin_q: f64::NAN,
        checked_points: 0,
        vertical_points: 0,
        pass: false,
    };
    for (v, t, q, n, nv) in per_t {
        report.checked_points += n;
        report.vertical_points += nv;
        if v < report.min_speed {
            report.min_speed = v;
            report.argmin_t = t;
            report.argmin_q = q;
        }
    }
    report.pass = report.checked_points > 0 && report.min_speed > 0.0;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Crossing,
    Cusp,
    BoundaryTangency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CerfEvent {
    pub t: f64,
    pub kind: EventKind,
    pub q: f64,
    pub z: f64,
}

/// Whether a branch follows interior critical points or the fiber-critical
/// points over one endpoint of the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Interior,
    Boundary { endpoint: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CerfBranch {
    pub id: usize,
    pub kind: BranchKind,
    /// `(t, z)` samples in increasing `t`.
    pub points: Vec<(f64, f64)>,
    /// Base angle of the tracked critical point at each sample.
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CerfDiagram {
    pub branches: Vec<CerfBranch>,
    pub events: Vec<CerfEvent>,
    /// Base sample spacing in `t`.
    pub step: f64,
    /// Sample times, refinements included.
    pub times: Vec<f64>,
    /// Times at which a degenerate critical point sat exactly on a sample
    /// and was left out of the matching.
    pub degenerate_samples: Vec<f64>,
}

impl CerfDiagram {
    /// CSV with columns `branch_id, t, z`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["branch_id", "t", "z"])?;
        for b in &self.branches {
            for (t, z) in &b.points {
                w.write_record(&[b.id.to_string(), t.to_string(), z.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Branches in grey, min-max curves (if given) in red, events as dots.
    pub fn to_svg(&self, trajectory: Option<&ViterboTrajectory>) -> String {
        let mut c = Canvas::new(800.0, 500.0);
        for b in &self.branches {
            let color = match b.kind {
                BranchKind::Interior => "#555555",
                BranchKind::Boundary { .. } => "#3366cc",
            };
            c.polyline(b.points.clone(), color, 1.0);
        }
        if let Some(tr) = trajectory {
            for curve in &tr.curves {
                c.polyline(tr.times.iter().copied().zip(curve.iter().copied()).collect(), "#cc0000", 2.5);
            }
        }
        for e in &self.events {
            let color = match e.kind {
                EventKind::Crossing => "#008800",
                EventKind::Cusp => "#aa00aa",
                EventKind::BoundaryTangency => "#ff8800",
            };
            c.dot((e.t, e.z), 3.5, color);
        }
        c.render()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    q: f64,
    w: Vec<f64>,
    z: f64,
    kind: BranchKind,
}

impl Node {
    fn distance(&self, other: &Node) -> f64 {
        let dw: f64 = self
            .w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        circle_distance(self.q, other.q) + dw + (self.z - other.z).abs()
    }
}

/// Refinement depth for intervals where matching is ambiguous.
const MAX_HALVINGS: usize = 6;

struct Tracker<'a> {
    path: &'a FamilyPath,
    f: Option<&'a Expr>,
    endpoints: Vec<f64>,
    n_q: usize,
    h_q: f64,
    rates: Vec<f64>,
    times: Vec<f64>,
    branches: Vec<CerfBranch>,
    /// Branch id of each node of the latest sample.
    active: Vec<usize>,
    events: Vec<CerfEvent>,
    degenerate: Vec<f64>,
}

struct Link {
    pairs: Vec<(usize, usize)>,
    max_cost: f64,
    lost: Vec<usize>,
    born: Vec<usize>,
}

impl Tracker<'_> {
    fn nodes(&self, t: f64) -> Result<(Vec<Node>, bool), CerfError> {
        let fam = self.path.slice(t)?;
        let mut degenerate = false;
        let mut out = Vec::new();
        for c in genfam::critical_points(&fam, self.n_q)? {
            if !c.nondegenerate {
                degenerate = true;
                continue;
            }
            if let Some(f) = self.f {
                if f.eval(&Bindings::at(c.q, &[])).unwrap_or(f64::NAN) <= 0.0 {
                    continue;
                }
            }
            out.push(Node { q: c.q, z: c.value, w: c.w, kind: BranchKind::Interior });
        }
        for (j, qb) in self.endpoints.iter().enumerate() {
            for pt in genfam::fiber_critical_points_at(&fam, *qb, 1e-12).points {
                out.push(Node {
                    q: *qb,
                    z: pt.value,
                    w: pt.w,
                    kind: BranchKind::Boundary { endpoint: j },
                });
            }
        }
        Ok((out, degenerate))
    }

    fn gate(&self, dt: f64) -> f64 {
        if self.rates.is_empty() {
            return f64::INFINITY;
        }
        let mut r = self.rates.clone();
        r.sort_by(f64::total_cmp);
        5.0 * r[r.len() / 2] * dt + self.h_q
    }

    fn link(a: &[Node], b: &[Node], gate: f64) -> Link {
        let mut cand: Vec<(f64, usize, usize)> = Vec::new();
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if x.kind == y.kind {
                    cand.push((x.distance(y), i, j));
                }
            }
        }
        cand.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut used_a = vec![false; a.len()];
        let mut used_b = vec![false; b.len()];
        let mut pairs = Vec::new();
        let mut max_cost: f64 = 0.0;
        for (c, i, j) in cand {
            if c > gate || used_a[i] || used_b[j] {
                continue;
            }
            used_a[i] = true;
            used_b[j] = true;
            max_cost = max_cost.max(c);
            pairs.push((i, j));
        }
        Link {
            pairs,
            max_cost,
            lost: (0..a.len()).filter(|i| !used_a[*i]).collect(),
            born: (0..b.len()).filter(|j| !used_b[*j]).collect(),
        }
    }

    fn advance(&mut self, t0: f64, a: &[Node], t1: f64, b: Vec<Node>, depth: usize) -> Result<(), CerfError> {
        let dt = t1 - t0;
        let gate = self.gate(dt);
        let link = Self::link(a, &b, gate);
        let clean = link.lost.is_empty() && link.born.is_empty() && link.max_cost <= gate;
        if !clean && depth < MAX_HALVINGS {
            let tm = 0.5 * (t0 + t1);
            let (mid, degenerate) = self.nodes(tm)?;
            if degenerate {
                self.degenerate.push(tm);
            }
            self.advance(t0, a, tm, mid.clone(), depth + 1)?;
            return self.advance(tm, &mid, t1, b, depth + 1);
        }
        self.commit(t0, a, t1, b, link, dt)
    }

    fn near_boundary(&self, q: f64, dt: f64) -> bool {
        let radius = 3.0 * self.h_q + self.gate(dt).min(1.0);
        self.endpoints.iter().any(|e| circle_distance(*e, q) <= radius)
    }

    fn commit(&mut self, t0: f64, a: &[Node], t1: f64, b: Vec<Node>, link: Link, dt: f64) -> Result<(), CerfError> {
        let tm = 0.5 * (t0 + t1);
        self.times.push(t1);
        let mut next_active = vec![usize::MAX; b.len()];
        for (i, j) in &link.pairs {
            let id = self.active[*i];
            let br = &mut self.branches[id];
            br.points.push((t1, b[*j].z));
            br.q.push(b[*j].q);
            next_active[*j] = id;
            if dt > 0.0 {
                self.rates.push(a[*i].distance(&b[*j]) / dt);
            }
        }
        for (side, t_side) in [(&link.lost, t0), (&link.born, t1)] {
            let nodes: Vec<&Node> = side
                .iter()
                .map(|i| if t_side == t0 { &a[*i] } else { &b[*i] })
                .collect();
            let mut free: Vec<usize> = Vec::new();
            for (k, n) in nodes.iter().enumerate() {
                if self.f.is_some() && n.kind == BranchKind::Interior && self.near_boundary(n.q, dt) {
                    self.events.push(CerfEvent { t: tm, kind: EventKind::BoundaryTangency, q: n.q, z: n.z });
                } else {
                    free.push(k);
                }
            }
            while free.len() >= 2 {
                let (mut bi, mut bj, mut bd) = (0, 1, f64::INFINITY);
                for x in 0..free.len() {
                    for y in x + 1..free.len() {
                        let d = nodes[free[x]].distance(nodes[free[y]]);
                        if d < bd {
                            (bi, bj, bd) = (x, y, d);
                        }
                    }
                }
                let (p, r) = (nodes[free[bi]], nodes[free[bj]]);
                self.events.push(CerfEvent {
                    t: tm,
                    kind: EventKind::Cusp,
                    q: p.q + 0.5 * crate::jet::wrap_delta(r.q - p.q),
                    z: 0.5 * (p.z + r.z),
                });
                free.remove(bj);
                free.remove(bi);
            }
            if let Some(k) = free.first() {
                return Err(CerfError::LostBranch { t: tm, q: nodes[*k].q });
            }
        }
        for j in link.born {
            let id = self.branches.len();
            self.branches.push(CerfBranch {
                id,
                kind: b[j].kind,
                points: vec![(t1, b[j].z)],
                q: vec![b[j].q],
            });
            next_active[j] = id;
        }
        self.active = next_active;
        Ok(())
    }
}

/// Critical values of `F_t` followed in `t`, with crossings, cusps and (for
/// a region `{f ≥ 0}`) points where an interior critical point meets the
/// boundary.
pub fn cerf_diagram(path: &FamilyPath, region: &Region, n_q: usize) -> Result<CerfDiagram, CerfError> {
    if path.n_t < 32 {
        return Err(CerfError::TooFewSamples { got: path.n_t, min: 32 });
    }
    let (f, endpoints) = match region {
        Region::All => (None, Vec::new()),
        Region::NonNegative(f) => {
            let ends = match spectra::positive_arcs(f, n_q)? {
                None => Vec::new(),
                Some(arcs) => arcs
                    .iter()
                    .flat_map(|(a, b)| [crate::jet::reduce_angle(*a), crate::jet::reduce_angle(*b)])
                    .collect(),
            };
            (Some(f), ends)
        }
    };
    let mut tracker = Tracker {
        path,
        f,
        endpoints,
        n_q,
        h_q: std::f64::consts::TAU / n_q as f64,
        rates: Vec::new(),
        times: Vec::new(),
        branches: Vec::new(),
        active: Vec::new(),
        events: Vec::new(),
        degenerate: Vec::new(),
    };
    let times = path.times();
    let samples: Vec<(Vec<Node>, bool)> = times
        .par_iter()
        .map(|t| tracker.nodes(*t))
        .collect::<Result<_, _>>()?;
    for (t, (_, d)) in times.iter().zip(&samples) {
        if *d {
            tracker.degenerate.push(*t);
        }
    }
    let mut samples = samples.into_iter().map(|(n, _)| n);
    let mut prev = samples.next().unwrap_or_default();
    tracker.times.push(times[0]);
    for (id, n) in prev.iter().enumerate() {
        tracker.branches.push(CerfBranch {
            id,
            kind: n.kind,
            points: vec![(times[0], n.z)],
            q: vec![n.q],
        });
        tracker.active.push(id);
    }
    for (i, next) in samples.enumerate() {
        tracker.advance(times[i], &prev, times[i + 1], next.clone(), 0)?;
        prev = next;
    }
    let mut events = tracker.events;
    events.extend(crossings(&tracker.branches));
    events.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.z.total_cmp(&b.z)));
    tracker.degenerate.sort_by(f64::total_cmp);
    Ok(CerfDiagram {
        branches: tracker.branches,
        events,
        step: path.step(),
        times: tracker.times,
        degenerate_samples: tracker.degenerate,
    })
}

/// Strict sign changes of `z_a - z_b` between two consecutive shared samples
/// at which the two values are distinguishable.
fn crossings(branches: &[CerfBranch]) -> Vec<CerfEvent> {
    let mut out = Vec::new();
    for (ia, a) in branches.iter().enumerate() {
        for b in &branches[ia + 1..] {
            let mut j = 0;
            let mut prev: Option<(f64, f64, f64)> = None;
            for (i, (t, za)) in a.points.iter().enumerate() {
                while j < b.points.len() && b.points[j].0 < *t {
                    j += 1;
                }
                if j == b.points.len() {
                    break;
                }
                if b.points[j].0 != *t {
                    prev = None;
                    continue;
                }
                let d = za - b.points[j].1;
                if d.abs() <= 1e-9 * (1.0 + za.abs()) {
                    // Coincident values (symmetric families) are not crossings.
                    prev = None;
                    continue;
                }
                if let Some((t0, d0, q0)) = prev {
                    if d0 * d < 0.0 {
                        let s = d0 / (d0 - d);
                        let z0 = a.points[i - 1].1;
                        out.push(CerfEvent {
                            t: t0 + s * (t - t0),
                            kind: EventKind::Crossing,
                            q: q0,
                            z: z0 + s * (za - z0),
                        });
                    }
                }
                prev = Some((*t, d, a.q[i]));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub min_slope: f64,
    pub max_slope: f64,
    pub checked_segments: usize,
    pub excluded_segments: usize,
    /// `None` when the path was not claimed positive.
    pub pass: Option<bool>,
}

/// Finite-difference slopes along every branch, skipping segments within
/// two base samples of an event.
pub fn slope_check(diagram: &CerfDiagram, positive: bool) -> SlopeReport {
    let radius = 2.0 * diagram.step;
    let mut r = SlopeReport {
        min_slope: f64::INFINITY,
        max_slope: f64::NEG_INFINITY,
        checked_segments: 0,
        excluded_segments: 0,
        pass: None,
    };
    for b in &diagram.branches {
        for w in b.points.windows(2) {
            let ((t0, z0), (t1, z1)) = (w[0], w[1]);
            let near = diagram
                .events
                .iter()
                .any(|e| e.t >= t0 - radius && e.t <= t1 + radius);
            if near || t1 <= t0 {
                r.excluded_segments += 1;
                continue;
            }
            let s = (z1 - z0) / (t1 - t0);
            r.min_slope = r.min_slope.min(s);
            r.max_slope = r.max_slope.max(s);
            r.checked_segments += 1;
        }
    }
    if positive {
        r.pass = Some(r.checked_segments > 0 && r.min_slope > 0.0);
    }
    r
}

/// The min-max values `c_k(F_t)` at every sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViterboTrajectory {
    pub times: Vec<f64>,
    /// `curves[k][i] = c_{k+1}(F_{t_i})`.
    pub curves: Vec<Vec<f64>>,
    /// `c_k(F_b) > c_k(F_a)` for every `k`.
    pub strict_increase: bool,
    /// `c_k` never decreases from one sample to the next.
    pub weakly_monotone: bool,
    /// `c_k` increases at every step.
    pub strictly_monotone: bool,
    /// Smallest and largest `c_k(F_b) - c_k(F_a)`.
    pub min_increase: f64,
    pub max_increase: f64,
}

impl ViterboTrajectory {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.curves.len()).map(|k| format!("c_{k}")));
        w.write_record(&header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.curves.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn viterbo_trajectory(path: &FamilyPath, region: &Region, grids: Grids) -> Result<ViterboTrajectory, CerfError> {
    let times = path.times();
    let spectra: Vec<Vec<f64>> = times
        .par_iter()
        .map(|t| -> Result<Vec<f64>, CerfError> {
            let fam = path.slice(*t)?;
            Ok(spectra::spectrum_over(&fam, region, grids)?.values)
        })
        .collect::<Result<_, _>>()?;
    let b = spectra[0].len();
    let curves: Vec<Vec<f64>> = (0..b).map(|k| spectra.iter().map(|s| s[k]).collect()).collect();
    let mut weakly = true;
    let mut strictly = true;
    for c in &curves {
        for w in c.windows(2) {
            weakly &= w[1] >= w[0];
            strictly &= w[1] > w[0];
        }
    }
    let incs: Vec<f64> = curves.iter().map(|c| c[c.len() - 1] - c[0]).collect();
    Ok(ViterboTrajectory {
        times,
        strict_increase: incs.iter().all(|d| *d > 0.0),
        weakly_monotone: weakly,
        strictly_monotone: strictly,
        min_increase: incs.iter().copied().fold(f64::INFINITY, f64::min),
        max_increase: incs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn path(g: &str, range: (f64, f64), n_t: usize) -> FamilyPath {
        FamilyPath::parse(vec![], g, range, n_t).unwrap()
    }

    #[test]
    fn rigid_shift_has_two_parallel_lines() {
        let d = cerf_diagram(&path("cos(q) + t", (0.0, 1.0), 32), &Region::All, 128).unwrap();
        assert_eq!(d.branches.len(), 2);
        assert!(d.events.is_empty());
        for b in &d.branches {
            assert_eq!(b.points.len(), 32);
            let z0 = b.points[0].1;
            for (t, z) in &b.points {
                assert!((z - z0 - t).abs() < 1e-12);
            }
        }
        let s = slope_check(&d, true);
        assert_eq!(s.pass, Some(true));
        assert!((s.min_slope - 1.0).abs() < 1e-9 && (s.max_slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotating_cosine_branches() {
        let d = cerf_diagram(&path("cos(q) + t*sin(q)", (0.0, 1.0), 40), &Region::All, 128).unwrap();
        assert_eq!(d.branches.len(), 2);
        assert!(d.events.is_empty());
        for b in &d.branches {
            for (t, z) in &b.points {
                assert!((z.abs() - (1.0 + t * t).sqrt()).abs() < 1e-10);
            }
        }
        let s = slope_check(&d, false);
        assert_eq!(s.pass, None);
        assert!(s.min_slope < 0.0 && s.max_slope > 0.0);
    }

    #[test]
    fn birth_death_cusps() {
        // Critical points sin q = ±√t appear at t = 0 near q = 0 and q = π,
        // with values ∓2 t^{3/2}.
        let p = path("sin(q)^3 - 3*t*sin(q)", (-0.5, 0.2), 64);
        let d = cerf_diagram(&p, &Region::All, 256).unwrap();
        let cusps: Vec<&CerfEvent> = d.events.iter().filter(|e| e.kind == EventKind::Cusp).collect();
        assert_eq!(cusps.len(), 2, "{:?}", d.events);
        for c in &cusps {
            assert!(c.t.abs() <= p.step(), "{c:?}");
            assert!(c.z.abs() < 1e-3);
        }
        assert!(d.events.iter().all(|e| e.kind == EventKind::Cusp));
        assert_eq!(d.branches.len(), 6);
        for b in d.branches.iter().filter(|b| b.points[0].0 > -0.5) {
            for (t, z) in &b.points {
                assert!((z.abs() - 2.0 * t.powf(1.5)).abs() < 1e-9, "{t} {z}");
            }
        }
    }

    #[test]
    fn crossing_detected() {
        // Branches ±(1 - 3t) cross at t = 1/3.
        let d = cerf_diagram(&path("(1 - 3*t)*cos(q)", (0.0, 0.7), 32), &Region::All, 128).unwrap();
        let x: Vec<&CerfEvent> = d.events.iter().filter(|e| e.kind == EventKind::Crossing).collect();
        assert_eq!(x.len(), 1);
        assert!((x[0].t - 1.0 / 3.0).abs() < 1e-9);
        assert!(x[0].z.abs() < 1e-9);
    }

    #[test]
    fn boundary_tangencies() {
        // The maximum q = t of cos(q - t) leaves [-π/2, π/2] at t = π/2 and
        // the minimum q = t - π enters there.
        let f = expr::parse("cos(q)", 0).unwrap();
        let d = cerf_diagram(&path("cos(q - t)", (0.0, 2.0), 40), &Region::NonNegative(f), 256).unwrap();
        let tang: Vec<&CerfEvent> =
            d.events.iter().filter(|e| e.kind == EventKind::BoundaryTangency).collect();
        assert_eq!(tang.len(), 2, "{:?}", d.events);
        for e in &tang {
            assert!((e.t - FRAC_PI_2).abs() < 2.0 / 39.0);
        }
        let boundary = d
            .branches
            .iter()
            .filter(|b| matches!(b.kind, BranchKind::Boundary { .. }))
            .count();
        assert_eq!(boundary, 2);
    }

    #[test]
    fn vertical_speed_examples() {
        let p = path("cos(q) + t*(2 + sin(q))", (0.0, 1.0), 32);
        let fam = p.slice(0.3).unwrap();
        let at = |q: f64| genfam::fiber_critical_points_at(&fam, q, 1e-12).points[0].clone();
        assert_eq!(vertical_speed(&p, &at(FRAC_PI_2), 0.3).unwrap(), 3.0);
        assert_eq!(vertical_speed(&p, &at(-FRAC_PI_2), 0.3).unwrap(), 1.0);
        let shift = path("cos(q) + t", (0.0, 1.0), 32);
        assert_eq!(vertical_speed(&shift, &at(1.0), 0.0).unwrap(), 1.0);
        let vertical = FiberCriticalPoint { q: 0.0, w: vec![0.0], value: 0.0, p: 0.0, hessian_det: 0.0 };
        assert!(matches!(vertical_speed(&p, &vertical, 0.0), Err(CerfError::Vertical { .. })));
    }

    #[test]
    fn positivity_certificates() {
        let r = check_positive_family(&path("cos(q) + t*(2 + sin(q))", (0.0, 1.0), 32), 128).unwrap();
        assert!(r.pass);
        assert!((r.min_speed - 1.0).abs() < 1e-12);
        assert!((r.argmin_q - 1.5 * PI).abs() < 1e-12);
        let r = check_positive_family(&path("cos(q) + t*sin(q)", (0.0, 1.0), 32), 128).unwrap();
        assert!(!r.pass && r.min_speed < 0.0);
        let r = check_positive_family(&path("cos(q) + t", (0.0, 1.0), 32), 128).unwrap();
        assert!(r.pass && r.min_speed == 1.0);
    }

    #[test]
    fn stabilized_family_positivity() {
        let p = FamilyPath::parse(vec![1, -1], "cos(q) + t*(2 + sin(q)) + 0.1*w1*sin(q)", (0.0, 1.0), 8).unwrap();
        let r = check_positive_family(&p, 64).unwrap();
        assert!(r.pass);
        assert!(r.vertical_points == 0);
    }

    #[test]
    fn trajectories() {
        let grids = Grids::new(256, 33);
        let tr = viterbo_trajectory(&path("cos(q) + t", (0.0, 1.0), 16), &Region::All, grids).unwrap();
        assert_eq!(tr.curves[0][0], -1.0);
        assert_eq!(*tr.curves[1].last().unwrap(), 2.0);
        assert!((tr.curves[0].last().unwrap() - 0.0).abs() < 1e-12);
        assert!(tr.strict_increase && tr.strictly_monotone);

        let flat = viterbo_trajectory(&path("cos(q) + 0*t", (0.0, 1.0), 8), &Region::All, grids).unwrap();
        assert!(!flat.strict_increase && flat.weakly_monotone && !flat.strictly_monotone);

        let tr = viterbo_trajectory(&path("cos(q) + t*(2 + sin(q))", (0.0, 1.0), 16), &Region::All, grids).unwrap();
        assert!(tr.strict_increase && tr.strictly_monotone);
        assert!(tr.min_increase >= 1.0 - 1e-9 && tr.max_increase <= 3.0 + 1e-9);
    }

    #[test]
    fn branch_points_are_critical_values() {
        let p = path("cos(q) + t*sin(2*q)", (0.0, 0.4), 32);
        let d = cerf_diagram(&p, &Region::All, 256).unwrap();
        for b in &d.branches {
            for (t, z) in b.points.iter().step_by(5) {
                let cv = genfam::critical_values_with_grid(&p.slice(*t).unwrap(), 256).unwrap();
                assert!(cv.iter().any(|c| (c.value - z).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn csv_and_svg() {
        let d = cerf_diagram(&path("cos(q) + t", (0.0, 1.0), 32), &Region::All, 64).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("branch_id,t,z\n0,0,-1\n"));
        assert_eq!(s.lines().count(), 65);
        let svg = d.to_svg(None);
        assert_eq!(svg, d.to_svg(None));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn path_validation() {
        assert!(matches!(
            FamilyPath::parse(vec![], "cos(q) + lambda", (0.0, 1.0), 32),
            Err(CerfError::ForeignVariable(Var::Lambda))
        ));
        assert!(matches!(FamilyPath::parse(vec![], "t", (1.0, 0.0), 32), Err(CerfError::BadRange(..))));
        assert!(matches!(
            cerf_diagram(&path("cos(q)", (0.0, 1.0), 16), &Region::All, 64),
            Err(CerfError::TooFewSamples { .. })
        ));
    }
}
