//! Sublevel-set homology of generating families and their min-max values.
//!
//! `F` is sampled on a cubical grid over (the circle or a union of arcs)
//! times the fiber cube `[-R, R]^K`, every cell takes the largest value of
//! its vertices, and the filtration is reduced over the two-element field
//! relative to the bottom `{F ≤ -C}` together with the faces of the cube in
//! the negative directions of the quadratic form. The essential classes then
//! form a basis of the homology of the base shifted up by `ind Q`, and the
//! min-max values are their birth values.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Bindings, Expr, Var};
use crate::genfam::{self, bisect_root, GenFamError, GeneratingFamily};
use crate::persistence;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("region {{f >= 0}} is empty")]
    EmptyRegion,
    #[error("0 is not a regular value of f near q = {q}")]
    Regularity { q: f64 },
    #[error("region function may only depend on q, found `{0}`")]
    RegionVariable(Var),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("expected {expected} essential classes, found {found}; refine the grid or enlarge the bounds")]
    EssentialCount { expected: usize, found: usize },
    #[error(transparent)]
    Family(#[from] GenFamError),
}

/// Where the base coordinate lives: the whole circle or `{f ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    NonNegative(Expr),
}

/// One connected piece of the base: the whole circle (periodic) or an arc
/// whose first and last samples are its exact endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseComponent {
    pub qs: Vec<f64>,
    pub periodic: bool,
}

fn eval_q(f: &Expr, q: f64) -> f64 {
    f.eval(&Bindings::at(q, &[])).unwrap_or(f64::NAN)
}

/// Tolerance below which both `|f|` and `|f'|` signal a critical zero.
pub const TOL_REGULAR: f64 = 1e-8;

/// Arcs `[a, b]` (with `a < b`, `b` possibly past `2π`) where `f ≥ 0`, or
/// `None` when `f > 0` on the whole circle.
pub fn positive_arcs(f: &Expr, n_q: usize) -> Result<Option<Vec<(f64, f64)>>, SpectraError> {
    for v in f.free_vars() {
        if v != Var::Q {
            return Err(SpectraError::RegionVariable(v));
        }
    }
    let df = f.differentiate(Var::Q);
    let n = 16 * n_q.max(64);
    let qs: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let vals: Vec<f64> = qs.iter().map(|q| eval_q(f, *q)).collect();
    for (q, v) in qs.iter().zip(&vals) {
        if v.abs() < TOL_REGULAR && eval_q(&df, *q).abs() < TOL_REGULAR {
            return Err(SpectraError::Regularity { q: *q });
        }
    }
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (qs[i], if i + 1 < n { qs[i + 1] } else { TAU });
        let (fa, fb) = (vals[i], vals[(i + 1) % n]);
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            roots.push(bisect_root(|q| eval_q(f, q), a, b));
        }
    }
    for r in &roots {
        if eval_q(&df, *r).abs() < TOL_REGULAR {
            return Err(SpectraError::Regularity { q: *r });
        }
    }
    if roots.is_empty() {
        return if vals[0] > 0.0 {
            Ok(None)
        } else {
            Err(SpectraError::EmptyRegion)
        };
    }
    let m = roots.len();
    let mut arcs = Vec::new();
    for i in 0..m {
        let a = roots[i];
        let b = if i + 1 < m { roots[i + 1] } else { roots[0] + TAU };
        if eval_q(f, 0.5 * (a + b)) > 0.0 {
            arcs.push((a, b));
        }
    }
    if arcs.is_empty() {
        return Err(SpectraError::EmptyRegion);
    }
    Ok(Some(arcs))
}

/// Base components of `region`, sampled at about `n_q` points per `2π`.
pub fn region_components(region: &Region, n_q: usize) -> Result<Vec<BaseComponent>, SpectraError> {
    let whole = || BaseComponent {
        qs: (0..n_q).map(|i| TAU * i as f64 / n_q as f64).collect(),
        periodic: true,
    };
    match region {
        Region::All => Ok(vec![whole()]),
        Region::NonNegative(f) => Ok(match positive_arcs(f, n_q)? {
            None => vec![whole()],
            Some(arcs) => arcs
                .into_iter()
                .map(|(a, b)| {
                    let m = ((n_q as f64 * (b - a) / TAU).ceil() as usize).max(16);
                    let qs = (0..=m)
                        .map(|i| {
                            if i == m {
                                b
                            } else {
                                a + (b - a) * i as f64 / m as f64
                            }
                        })
                        .collect();
                    BaseComponent { qs, periodic: false }
                })
                .collect(),
        }),
    }
}

/// Total Betti number of `{f ≥ 0}` over the two-element field.
pub fn betti_of_region(f: &Expr, n_q: usize) -> Result<usize, SpectraError> {
    Ok(match positive_arcs(f, n_q)? {
        None => 2,
        Some(arcs) => arcs.len(),
    })
}

/// Grid sizes: `n_q` base samples per `2π`, `n_w` samples per fiber axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grids {
    pub n_q: usize,
    pub n_w: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { n_q: 256, n_w: 33 }
    }
}

impl Grids {
    pub fn new(n_q: usize, n_w: usize) -> Self {
        Grids { n_q, n_w }
    }
}

/// Levels bracketing every generalized critical value: `{F ≤ -c}` is the
/// coned-off bottom, `a` lies above everything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiltrationBounds {
    pub c: f64,
    pub a: f64,
}

/// A grid vertex `(q, w)` and where it sits in the base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub q: f64,
    pub w: Vec<f64>,
    /// The vertex is an endpoint of an arc of the base.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct VertexRef {
    component: u32,
    base: u32,
    fiber: u32,
}

struct Layout {
    components: Vec<BaseComponent>,
    fiber_dim: usize,
    n_w: usize,
    bound_r: f64,
    neg_axes: Vec<bool>,
    /// Cells per component and their running offsets.
    offsets: Vec<usize>,
    /// Vertex values per component, row-major over (base, fiber...).
    vertex_values: Vec<Vec<f64>>,
}

impl Layout {
    fn base_cells(&self, c: usize) -> usize {
        let m = self.components[c].qs.len();
        if self.components[c].periodic {
            2 * m
        } else {
            2 * m - 1
        }
    }

    fn fiber_cells(&self) -> usize {
        2 * self.n_w - 1
    }

    fn cells_in(&self, c: usize) -> usize {
        self.base_cells(c) * self.fiber_cells().pow(self.fiber_dim as u32)
    }

    fn locate(&self, global: usize) -> (usize, usize) {
        let c = self.offsets.partition_point(|&o| o <= global) - 1;
        (c, global - self.offsets[c])
    }

    /// Cell coordinates `(c_0, c_1..c_K)` of a local index.
    fn coords(&self, c: usize, mut local: usize, out: &mut [usize]) {
        let fc = self.fiber_cells();
        for a in (1..=self.fiber_dim).rev() {
            out[a] = local % fc;
            local /= fc;
        }
        out[0] = local;
        debug_assert!(out[0] < self.base_cells(c));
    }

    fn index(&self, coords: &[usize]) -> usize {
        let fc = self.fiber_cells();
        let mut idx = coords[0];
        for a in 1..=self.fiber_dim {
            idx = idx * fc + coords[a];
        }
        idx
    }

    fn fiber_w(&self, fiber: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.fiber_dim];
        let mut f = fiber;
        for a in (0..self.fiber_dim).rev() {
            let i = f % self.n_w;
            f /= self.n_w;
            w[a] = -self.bound_r + 2.0 * self.bound_r * i as f64 / (self.n_w - 1) as f64;
        }
        w
    }

    /// Largest vertex value of a cell and the vertex attaining it (first in
    /// lexicographic order on ties).
    fn cell_max(&self, c: usize, coords: &[usize]) -> (f64, VertexRef) {
        let m = self.components[c].qs.len();
        let k = self.fiber_dim;
        let odd: Vec<usize> = (0..=k).filter(|&a| coords[a] % 2 == 1).collect();
        let mut best = (f64::NEG_INFINITY, VertexRef { component: 0, base: 0, fiber: 0 });
        for mask in 0..(1usize << odd.len()) {
            let mut v = vec![0usize; k + 1];
            for a in 0..=k {
                v[a] = coords[a] / 2;
            }
            for (bit, &a) in odd.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    v[a] += 1;
                }
            }
            if v[0] == m {
                v[0] = 0;
            }
            let mut fiber = 0;
            for a in 1..=k {
                fiber = fiber * self.n_w + v[a];
            }
            let val = self.vertex_values[c][v[0] * self.n_w.pow(k as u32) + fiber];
            let vr = VertexRef {
                component: c as u32,
                base: v[0] as u32,
                fiber: fiber as u32,
            };
            if val > best.0 || (val == best.0 && mask == 0) {
                best = (val, vr);
            }
        }
        best
    }

    fn on_negative_face(&self, coords: &[usize]) -> bool {
        let top = 2 * (self.n_w - 1);
        (0..self.fiber_dim).any(|a| {
            self.neg_axes[a] && (coords[a + 1] == 0 || coords[a + 1] == top)
        })
    }

    fn witness(&self, v: VertexRef) -> Witness {
        let comp = &self.components[v.component as usize];
        let on_boundary = !comp.periodic
            && (v.base == 0 || v.base as usize == comp.qs.len() - 1);
        Witness {
            q: crate::jet::reduce_angle(comp.qs[v.base as usize]),
            w: self.fiber_w(v.fiber as usize),
            on_boundary,
        }
    }
}

/// Cubical lower-star filtration relative to its bottom, in filtration order.
pub struct FilteredComplex {
    layout: Layout,
    dims: Vec<u8>,
    values: Vec<f64>,
    max_vertex: Vec<VertexRef>,
    boundaries: Vec<Vec<u32>>,
    relative_cells: usize,
    bounds: FiltrationBounds,
    index: usize,
}

impl FilteredComplex {
    /// Cells outside the relative subcomplex.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn relative_cells(&self) -> usize {
        self.relative_cells
    }

    pub fn bounds(&self) -> FiltrationBounds {
        self.bounds
    }

    /// Index of the quadratic form of the family the complex was built from.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn components(&self) -> &[BaseComponent] {
        &self.layout.components
    }

    pub fn dims(&self) -> &[u8] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundaries(&self) -> &[Vec<u32>] {
        &self.boundaries
    }

    pub fn witness(&self, cell: usize) -> Witness {
        self.layout.witness(self.max_vertex[cell])
    }

    /// Largest difference between the values of two adjacent vertices.
    pub fn value_step(&self) -> f64 {
        self.boundaries
            .iter()
            .zip(&self.dims)
            .filter(|(_, d)| **d == 1)
            .filter_map(|(b, _)| match b.as_slice() {
                [x, y] => Some((self.values[*x as usize] - self.values[*y as usize]).abs()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Lower-star cubical filtration of `fam` over `region × [-R, R]^K`.
pub fn build_filtration(
    fam: &GeneratingFamily,
    region: &Region,
    grids: Grids,
) -> Result<FilteredComplex, SpectraError> {
    if grids.n_q < 64 {
        return Err(SpectraError::GridTooCoarse(format!("n_q = {} < 64", grids.n_q)));
    }
    let k = fam.fiber_dim();
    if k > 0 && grids.n_w < 33 {
        return Err(SpectraError::GridTooCoarse(format!("n_w = {} < 33", grids.n_w)));
    }
    let n_w = if k == 0 { 1 } else { grids.n_w };
    let components = region_components(region, grids.n_q)?;
    let bound_r = fam.bound_r();
    let mut layout = Layout {
        components,
        fiber_dim: k,
        n_w,
        bound_r,
        neg_axes: fam.q_signs().iter().map(|s| *s < 0).collect(),
        offsets: Vec::new(),
        vertex_values: Vec::new(),
    };
    let fiber_points: Vec<Vec<f64>> = (0..n_w.pow(k as u32)).map(|f| layout.fiber_w(f)).collect();
    let quad = |w: &[f64]| -> f64 {
        w.iter()
            .zip(fam.q_signs())
            .map(|(x, s)| *s as f64 * x * x)
            .sum()
    };
    let mut sup_g: f64 = 0.0;
    for comp in &layout.components {
        let vals: Vec<f64> = comp
            .qs
            .par_iter()
            .flat_map_iter(|q| fiber_points.iter().map(move |w| fam.value(*q, w)))
            .collect();
        for (i, v) in vals.iter().enumerate() {
            let w = &fiber_points[i % fiber_points.len()];
            sup_g = sup_g.max((v - quad(w)).abs());
        }
        layout.vertex_values.push(vals);
    }
    let c_bound = 2.0 * sup_g + 1.0;
    let bounds = FiltrationBounds {
        c: c_bound,
        a: c_bound,
    };
    let mut total = 0;
    for c in 0..layout.components.len() {
        layout.offsets.push(total);
        total += layout.cells_in(c);
    }

    // Per cell: filtration value, maximizing vertex, dimension, membership
    // in the relative subcomplex.
    let info: Vec<(f64, VertexRef, u8, bool)> = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0usize; k + 1],
            |coords, g| {
                let (c, local) = layout.locate(g);
                layout.coords(c, local, coords);
                let (value, vr) = layout.cell_max(c, coords);
                let dim = coords.iter().filter(|x| **x % 2 == 1).count() as u8;
                let relative = value <= -c_bound || layout.on_negative_face(coords);
                (value, vr, dim, relative)
            },
        )
        .collect();
    let mut order: Vec<u32> = (0..total as u32).filter(|g| !info[*g as usize].3).collect();
    let relative_cells = total - order.len();
    order.par_sort_unstable_by(|a, b| {
        let (ia, ib) = (&info[*a as usize], &info[*b as usize]);
        ia.0.total_cmp(&ib.0).then(ia.2.cmp(&ib.2)).then(a.cmp(b))
    });
    let mut position = vec![u32::MAX; total];
    for (pos, g) in order.iter().enumerate() {
        position[*g as usize] = pos as u32;
    }
    let boundaries: Vec<Vec<u32>> = order
        .par_iter()
        .map_init(
            || (vec![0usize; k + 1], vec![0usize; k + 1]),
            |(coords, face), g| {
                let (c, local) = layout.locate(*g as usize);
                layout.coords(c, local, coords);
                let base_cells = layout.base_cells(c);
                let mut out = Vec::with_capacity(2 * (k + 1));
                for a in 0..=k {
                    if coords[a] % 2 == 0 {
                        continue;
                    }
                    for delta in [-1i64, 1] {
                        face.copy_from_slice(coords);
                        let mut x = coords[a] as i64 + delta;
                        if a == 0 && layout.components[c].periodic {
                            x = x.rem_euclid(base_cells as i64);
                        }
                        face[a] = x as usize;
                        let p = position[layout.offsets[c] + layout.index(face)];
                        if p != u32::MAX {
                            out.push(p);
                        }
                    }
                }
                out.sort_unstable();
                out
            },
        )
        .collect();
    let dims = order.iter().map(|g| info[*g as usize].2).collect();
    let values = order.iter().map(|g| info[*g as usize].0).collect();
    let max_vertex = order.iter().map(|g| info[*g as usize].1).collect();
    Ok(FilteredComplex {
        layout,
        dims,
        values,
        max_vertex,
        boundaries,
        relative_cells,
        bounds,
        index: fam.index(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialClass {
    pub dim: usize,
    pub birth: f64,
    pub witness: Witness,
}

/// Finite pairs of positive length and classes that never die, in raw
/// (unshifted) homological degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub essentials: Vec<EssentialClass>,
}

pub fn persistence(x: &FilteredComplex) -> PersistenceDiagram {
    let red = persistence::reduce(&x.dims, x.boundaries.clone());
    let mut pairs: Vec<PersistencePair> = red
        .pairs
        .iter()
        .filter(|(b, d)| x.values[*d as usize] > x.values[*b as usize])
        .map(|(b, d)| PersistencePair {
            dim: x.dims[*b as usize] as usize,
            birth: x.values[*b as usize],
            death: x.values[*d as usize],
        })
        .collect();
    pairs.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    let essentials = red
        .essentials
        .iter()
        .map(|e| EssentialClass {
            dim: x.dims[*e as usize] as usize,
            birth: x.values[*e as usize],
            witness: x.witness(*e as usize),
        })
        .collect();
    PersistenceDiagram { pairs, essentials }
}

/// Min-max values `c_1 ≤ … ≤ c_b` with the degree of each witnessing class
/// after the shift by `ind Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViterboSpectrum {
    pub values: Vec<f64>,
    pub degrees: Vec<i64>,
    pub boundary: Vec<bool>,
    pub witnesses: Vec<Witness>,
    pub b: usize,
    /// Largest value jump across one grid edge; bounds the discretization
    /// error of every `c_k`.
    pub value_step: f64,
}

impl ViterboSpectrum {
    /// CSV with columns `k, c_k, degree, boundary_flag`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "c_k", "degree", "boundary_flag"])?;
        for i in 0..self.values.len() {
            w.write_record(&[
                (i + 1).to_string(),
                self.values[i].to_string(),
                self.degrees[i].to_string(),
                self.boundary[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn spectrum_of(x: &FilteredComplex, expected: usize) -> Result<ViterboSpectrum, SpectraError> {
    let diag = persistence(x);
    if diag.essentials.len() != expected {
        return Err(SpectraError::EssentialCount {
            expected,
            found: diag.essentials.len(),
        });
    }
    let mut ess = diag.essentials;
    ess.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.dim.cmp(&b.dim)));
    let shift = x.index as i64;
    Ok(ViterboSpectrum {
        values: ess.iter().map(|e| e.birth).collect(),
        degrees: ess.iter().map(|e| e.dim as i64 - shift).collect(),
        boundary: ess.iter().map(|e| e.witness.on_boundary).collect(),
        witnesses: ess.into_iter().map(|e| e.witness).collect(),
        b: expected,
        value_step: x.value_step(),
    })
}

/// `c_1(F) ≤ c_2(F)` over the whole circle.
pub fn viterbo_numbers(fam: &GeneratingFamily, grids: Grids) -> Result<ViterboSpectrum, SpectraError> {
    let x = build_filtration(fam, &Region::All, grids)?;
    spectrum_of(&x, 2)
}

/// `c_{1,M}(F) ≤ … ≤ c_{b(f),M}(F)` for `M = {f ≥ 0}`.
pub fn viterbo_numbers_with_boundary(
    fam: &GeneratingFamily,
    f: &Expr,
    grids: Grids,
) -> Result<ViterboSpectrum, SpectraError> {
    let b = betti_of_region(f, grids.n_q)?;
    let x = build_filtration(fam, &Region::NonNegative(f.clone()), grids)?;
    spectrum_of(&x, b)
}

/// Spectrum over an arbitrary region.
pub fn spectrum_over(
    fam: &GeneratingFamily,
    region: &Region,
    grids: Grids,
) -> Result<ViterboSpectrum, SpectraError> {
    match region {
        Region::All => viterbo_numbers(fam, grids),
        Region::NonNegative(f) => viterbo_numbers_with_boundary(fam, f, grids),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedCriticalValue {
    pub value: f64,
    pub q: f64,
    pub w: Vec<f64>,
    /// Critical for the restriction to the boundary of the region.
    pub boundary: bool,
}

/// Critical values of `F` inside `{f > 0}` together with those of `F`
/// restricted to the fibers over the boundary points `{f = 0}`.
pub fn generalized_critical_values(
    fam: &GeneratingFamily,
    f: &Expr,
    n_q: usize,
) -> Result<Vec<GeneralizedCriticalValue>, SpectraError> {
    let arcs = positive_arcs(f, n_q)?;
    let mut out: Vec<GeneralizedCriticalValue> = genfam::critical_points(fam, n_q)?
        .into_iter()
        .filter(|c| eval_q(f, c.q) > 0.0)
        .map(|c| GeneralizedCriticalValue {
            value: c.value,
            q: c.q,
            w: c.w,
            boundary: false,
        })
        .collect();
    for (a, b) in arcs.unwrap_or_default() {
        for q in [a, b] {
            let q = crate::jet::reduce_angle(q);
            for pt in genfam::fiber_critical_points_at(fam, q, 1e-12).points {
                out.push(GeneralizedCriticalValue {
                    value: pt.value,
                    q,
                    w: pt.w,
                    boundary: true,
                });
            }
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.q.total_cmp(&b.q)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn fam(signs: Vec<i8>, g: &str) -> GeneratingFamily {
        GeneratingFamily::parse(signs, g).unwrap()
    }

    #[test]
    fn circle_filtered_by_cosine() {
        // Sublevel sets of cos: an arc from -1 on, the whole circle at +1.
        let x = build_filtration(&fam(vec![], "cos(q)"), &Region::All, Grids::new(64, 33)).unwrap();
        let d = persistence(&x);
        assert!(d.pairs.is_empty());
        assert_eq!(d.essentials.len(), 2);
        assert_eq!((d.essentials[0].dim, d.essentials[0].birth), (0, -1.0));
        assert_eq!((d.essentials[1].dim, d.essentials[1].birth), (1, 1.0));
    }

    #[test]
    fn interval_filtered_by_increasing_function() {
        let f = parse("cos(q)", 0).unwrap();
        let x = build_filtration(&fam(vec![], "q"), &Region::NonNegative(f), Grids::new(64, 33)).unwrap();
        let d = persistence(&x);
        assert_eq!(d.essentials.len(), 1);
        assert_eq!(d.essentials[0].dim, 0);
        assert!(d.pairs.is_empty());
    }

    #[test]
    fn circle_filtered_by_cos_3q() {
        // Brute force over thresholds: the sublevel set has 3 components on
        // [-1, 1) and is the whole circle at 1. Two H0 classes die at 1.
        let x = build_filtration(&fam(vec![], "cos(3*q)"), &Region::All, Grids::new(96, 33)).unwrap();
        let d = persistence(&x);
        let births: Vec<(usize, f64)> = d.essentials.iter().map(|e| (e.dim, e.birth)).collect();
        assert_eq!(births, vec![(0, -1.0), (1, 1.0)]);
        assert_eq!(d.pairs.len(), 2);
        for p in &d.pairs {
            assert_eq!((p.dim, p.birth, p.death), (0, -1.0, 1.0));
        }
    }

    #[test]
    fn three_arcs_of_cos_3q() {
        let f = parse("cos(3*q)", 0).unwrap();
        let comps = region_components(&Region::NonNegative(f.clone()), 128).unwrap();
        assert_eq!(comps.len(), 3);
        for c in &comps {
            assert!(!c.periodic);
            let (a, b) = (c.qs[0], *c.qs.last().unwrap());
            assert!((b - a - PI / 3.0).abs() < 1e-12);
            // Endpoints at 3q = ±π/2 mod 2π.
            assert!((3.0 * a).cos().abs() < 1e-12 && (3.0 * b).cos().abs() < 1e-12);
        }
        assert_eq!(betti_of_region(&f, 128).unwrap(), 3);
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti_of_region(&parse("1", 0).unwrap(), 64).unwrap(), 2);
        assert_eq!(betti_of_region(&parse("cos(q)", 0).unwrap(), 64).unwrap(), 1);
        assert_eq!(
            betti_of_region(&parse("-1", 0).unwrap(), 64).unwrap_err(),
            SpectraError::EmptyRegion
        );
        assert!(matches!(
            betti_of_region(&parse("cos(q)^2", 0).unwrap(), 64),
            Err(SpectraError::Regularity { .. })
        ));
        assert!(matches!(
            betti_of_region(&parse("cos(q) + t", 0).unwrap(), 64),
            Err(SpectraError::RegionVariable(Var::T))
        ));
    }

    #[test]
    fn betti_matches_homology_of_region() {
        for (text, b) in [("cos(3*q)", 3), ("cos(q)", 1), ("2 + sin(q)", 2), ("cos(2*q) + 0.5", 2)] {
            let f = parse(text, 0).unwrap();
            assert_eq!(betti_of_region(&f, 128).unwrap(), b, "{text}");
            let x = build_filtration(&fam(vec![], "0"), &Region::NonNegative(f), Grids::new(128, 33)).unwrap();
            assert_eq!(persistence(&x).essentials.len(), b, "{text}");
        }
    }

    #[test]
    fn stabilized_annulus_keeps_values() {
        let g = "cos(q)";
        let base = viterbo_numbers(&fam(vec![], g), Grids::new(64, 33)).unwrap();
        let plus = viterbo_numbers(&fam(vec![1], g), Grids::new(64, 33)).unwrap();
        assert_eq!(plus.values, base.values);
        assert_eq!(plus.degrees, vec![0, 1]);
        let minus = viterbo_numbers(&fam(vec![-1], g), Grids::new(64, 33)).unwrap();
        assert_eq!(minus.values, base.values);
        // The witnessing classes sit one degree up before the shift.
        assert_eq!(minus.degrees, vec![0, 1]);
    }

    #[test]
    fn two_fiber_variables_of_mixed_sign() {
        // cos q + w1² - w2²: index 1, same values as cos q.
        let s = viterbo_numbers(&fam(vec![1, -1], "cos(q)"), Grids::new(64, 33)).unwrap();
        assert_eq!(s.values, vec![-1.0, 1.0]);
        assert_eq!(s.degrees, vec![0, 1]);
    }

    #[test]
    fn zero_family_spectrum() {
        let s = viterbo_numbers(&fam(vec![], "0"), Grids::new(64, 33)).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
    }

    #[test]
    fn boundary_spectrum_examples() {
        let f = parse("cos(q)", 0).unwrap();
        let s = viterbo_numbers_with_boundary(&fam(vec![], "cos(q)"), &f, Grids::new(256, 33)).unwrap();
        assert_eq!(s.b, 1);
        assert!(s.values[0].abs() < 1e-12);
        assert!(s.boundary[0]);

        let f3 = parse("cos(3*q)", 0).unwrap();
        let s = viterbo_numbers_with_boundary(&fam(vec![], "-5"), &f3, Grids::new(128, 33)).unwrap();
        assert_eq!(s.values, vec![-5.0; 3]);
    }

    #[test]
    fn boundary_spectrum_is_per_arc_minimum() {
        let f3 = parse("cos(3*q)", 0).unwrap();
        let family = fam(vec![], "2 + 0.3*sin(q)");
        let s = viterbo_numbers_with_boundary(&family, &f3, Grids::new(256, 33)).unwrap();
        let comps = region_components(&Region::NonNegative(f3), 256).unwrap();
        let mut oracle: Vec<f64> = comps
            .iter()
            .map(|c| c.qs.iter().map(|q| 2.0 + 0.3 * q.sin()).fold(f64::INFINITY, f64::min))
            .collect();
        oracle.sort_by(f64::total_cmp);
        assert_eq!(s.values.len(), 3);
        for (a, b) in s.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
            assert!(*a > 0.0);
        }
    }

    #[test]
    fn generalized_values_of_cos_over_three_arcs() {
        let f3 = parse("cos(3*q)", 0).unwrap();
        let gcv = generalized_critical_values(&fam(vec![], "cos(q)"), &f3, 256).unwrap();
        let boundary: Vec<_> = gcv.iter().filter(|v| v.boundary).collect();
        assert_eq!(boundary.len(), 6);
        for v in &boundary {
            assert!((3.0 * v.q).cos().abs() < 1e-12);
            assert!((v.value - v.q.cos()).abs() < 1e-12);
        }
        // cos has its maximum q = 0 inside the arc |3q| < π/2; its minimum
        // q = π has cos 3π = -1 < 0, outside the region.
        let interior: Vec<_> = gcv.iter().filter(|v| !v.boundary).collect();
        assert_eq!(interior.len(), 1);
        assert!((interior[0].value - 1.0).abs() < 1e-12);

        let c = generalized_critical_values(&fam(vec![], "3.5"), &f3, 128).unwrap();
        assert!(c.iter().all(|v| v.value == 3.5));
    }

    #[test]
    fn spectrum_csv() {
        let s = viterbo_numbers(&fam(vec![], "cos(q)"), Grids::new(64, 33)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,c_k,degree,boundary_flag\n1,-1,0,false\n2,1,1,false\n"
        );
    }

    #[test]
    fn coarse_grids_rejected() {
        assert!(matches!(
            viterbo_numbers(&fam(vec![], "cos(q)"), Grids::new(32, 33)),
            Err(SpectraError::GridTooCoarse(_))
        ));
        assert!(matches!(
            viterbo_numbers(&fam(vec![1], "cos(q)"), Grids::new(64, 9)),
            Err(SpectraError::GridTooCoarse(_))
        ));
    }
}
