//! Manifold quadrature in stereographic coordinates.
//!
//! The covering sphere is split into one smooth partition cell per focus. Each cell
//! is integrated in the chart at its focus (hemisphere |w| <= 2) and in the chart at
//! the antipode (the other hemisphere). Radial panels are graded geometrically
//! toward the focus; angular directions use a product Gauss–Legendre rule in the
//! polar angles and the trapezoid rule in the azimuth. When the integrand only
//! depends on the projection onto a few ambient directions, the angles it cannot
//! see are integrated exactly.

use rayon::prelude::*;

use super::quadrature::{gl_on, graded_breaks, pairwise_sum, Estimate};
use super::{chord2, complete_frame, dot, gram_schmidt, omega, ManifoldModel, PointOnM};
use crate::error::{LabError, Result};

/// A scalar field on the covering sphere. Fields on the quotient must be even.
pub trait Field: Sync {
    fn eval(&self, x: &[f64]) -> f64;

    /// Ambient directions spanning the subspace the field depends on, if known.
    /// `None` means the field may depend on every direction.
    fn directions(&self) -> Option<Vec<Vec<f64>>> {
        None
    }
}

/// A field given by a closure.
pub struct GridField<'a> {
    f: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
    dirs: Option<Vec<Vec<f64>>>,
}

impl<'a> GridField<'a> {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Sync + 'a) -> Self {
        GridField { f: Box::new(f), dirs: None }
    }

    pub fn with_directions(mut self, dirs: Vec<Vec<f64>>) -> Self {
        self.dirs = Some(dirs);
        self
    }

    /// Samples the field at the given points.
    pub fn samples(&self, pts: &[Vec<f64>]) -> Vec<f64> {
        pts.iter().map(|p| (self.f)(p)).collect()
    }
}

impl Field for GridField<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn directions(&self) -> Option<Vec<Vec<f64>>> {
        self.dirs.clone()
    }
}

/// A point where the integrand concentrates.
#[derive(Debug, Clone)]
pub struct Focus {
    pub point: Vec<f64>,
    /// Concentration length in flat units; the first radial panel has width scale/4.
    pub scale: f64,
    /// Extra radial breakpoints (flat distance) in the chart at this focus.
    pub breaks: Vec<f64>,
}

impl Focus {
    pub fn new(point: &PointOnM, scale: f64) -> Self {
        Focus { point: point.coords.clone(), scale, breaks: vec![] }
    }

    pub fn with_breaks(mut self, b: &[f64]) -> Self {
        self.breaks = b.to_vec();
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_level: usize,
    pub max_level: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { rel_tol: 1e-8, abs_tol: 1e-300, min_level: 1, max_level: 6 }
    }
}

impl IntegrateOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        IntegrateOptions { rel_tol, ..Default::default() }
    }
}

/// Resolution used at refinement level `l`: (radial order, polar order, azimuth count).
fn resolution(l: usize) -> (usize, usize, usize) {
    let q = 8 + 4 * l;
    let m = 6 + 4 * l;
    (q, m, 2 * m)
}

struct Cell {
    pole: Vec<f64>,
    near_breaks: Vec<f64>,
    frame: Vec<Vec<f64>>,
    /// Number of frame directions the integrand can see; `None` for all of them.
    visible: Option<usize>,
}

/// Integrates `field` over the model with respect to the round volume.
pub fn integrate(
    model: &ManifoldModel,
    field: &dyn Field,
    foci: &[Focus],
    opts: IntegrateOptions,
) -> Result<Estimate> {
    if !(1e-14..=1e-2).contains(&opts.rel_tol) {
        return Err(LabError::InvalidParameter(format!(
            "rel_tol {} outside [1e-14, 1e-2]",
            opts.rel_tol
        )));
    }
    let n = model.n;
    let mut foci: Vec<Focus> = if foci.is_empty() {
        vec![Focus { point: model.basis_point(0).coords, scale: 1.0, breaks: vec![] }]
    } else {
        foci.to_vec()
    };
    for f in foci.iter_mut() {
        let nv = f.point.iter().map(|v| v * v).sum::<f64>().sqrt();
        f.point.iter_mut().for_each(|v| *v /= nv);
    }
    let mut cells_src: Vec<Focus> = Vec::new();
    for f in foci {
        let dup = cells_src.iter_mut().find(|c| {
            chord2(&c.point, &f.point) < 1e-24
                || (model.is_quotient()
                    && c.point.iter().zip(&f.point).map(|(a, b)| (a + b) * (a + b)).sum::<f64>()
                        < 1e-24)
        });
        match dup {
            Some(c) => {
                c.scale = c.scale.min(f.scale);
                c.breaks.extend_from_slice(&f.breaks);
            }
            None => cells_src.push(f),
        }
    }
    // Partition centers on the covering sphere.
    let mut centers: Vec<Vec<f64>> = cells_src.iter().map(|c| c.point.clone()).collect();
    if model.is_quotient() {
        let anti: Vec<Vec<f64>> =
            centers.iter().map(|c| c.iter().map(|v| -v).collect()).collect();
        centers.extend(anti);
    }
    let field_dirs = field.directions();
    let cells: Vec<Cell> = cells_src
        .iter()
        .map(|c| {
            let near_breaks = graded_breaks((c.scale / 4.0).min(0.25), 2.0, 2.0, &c.breaks);
            match &field_dirs {
                Some(dirs) => {
                    let mut all = dirs.clone();
                    all.extend(centers.iter().cloned());
                    let vis = gram_schmidt(&c.point, &all, 1e-10);
                    let j = vis.len();
                    if j >= n {
                        Cell { pole: c.point.clone(), near_breaks, frame: complete_frame(&c.point, vis), visible: None }
                    } else {
                        Cell { pole: c.point.clone(), near_breaks, frame: complete_frame(&c.point, vis), visible: Some(j) }
                    }
                }
                None => Cell {
                    pole: c.point.clone(),
                    near_breaks,
                    frame: complete_frame(&c.point, vec![]),
                    visible: None,
                },
            }
        })
        .collect();

    let far_breaks = graded_breaks(0.0625, 2.0, 2.0, &[]);
    let mut prev: Option<f64> = None;
    let mut last_err = f64::INFINITY;
    let mut value = 0.0;
    for level in 0..=opts.max_level {
        let (q, m, az) = resolution(level);
        let parts: Vec<f64> = cells
            .iter()
            .map(|cell| integrate_cell(n, field, cell, &centers, &far_breaks, q, m, az))
            .collect();
        value = pairwise_sum(&parts);
        if let Some(p) = prev {
            last_err = (value - p).abs();
            if level >= opts.min_level && last_err <= (opts.rel_tol * value.abs()).max(opts.abs_tol) {
                return Ok(Estimate::new(value, last_err));
            }
        }
        prev = Some(value);
    }
    Err(LabError::QuadratureNonConvergence { value, achieved: last_err, requested: opts.rel_tol })
}

/// Smooth partition weight of center `i` among `centers` at x.
fn partition_weight(x: &[f64], i: usize, centers: &[Vec<f64>], p: i32) -> f64 {
    let ci = chord2(x, &centers[i]);
    if ci == 0.0 {
        return 1.0;
    }
    let mut s = 1.0;
    for (l, c) in centers.iter().enumerate() {
        if l == i {
            continue;
        }
        let cl = chord2(x, c);
        if cl == 0.0 {
            return 0.0;
        }
        s += (ci / cl).powi(p);
    }
    1.0 / s
}

#[allow(clippy::too_many_arguments)]
fn integrate_cell(
    n: usize,
    field: &dyn Field,
    cell: &Cell,
    centers: &[Vec<f64>],
    far_breaks: &[f64],
    q: usize,
    m: usize,
    az: usize,
) -> f64 {
    let idx = centers.iter().position(|c| chord2(c, &cell.pole) < 1e-24).unwrap_or(0);
    let ang = angular_nodes(n, &cell.frame, cell.visible, m, az);
    let mut radial: Vec<(f64, f64, f64)> = Vec::new();
    for (sign, breaks) in [(1.0, &cell.near_breaks), (-1.0, &far_breaks.to_vec())] {
        for w in breaks.windows(2) {
            for (r, wr) in gl_on(q, w[0], w[1]) {
                let s = 0.25 * r * r;
                let dens = r.powi(n as i32 - 1) * (1.0 + s).powi(-(n as i32));
                radial.push((sign, r, wr * dens));
            }
        }
    }
    let p = n as i32;
    let vals: Vec<f64> = radial
        .par_iter()
        .map(|&(sign, r, wr)| {
            let s = 0.25 * r * r;
            let mut x = vec![0.0; n + 1];
            let terms: Vec<f64> = ang
                .iter()
                .map(|(theta, wa)| {
                    for ((xi, pi), ti) in x.iter_mut().zip(&cell.pole).zip(theta) {
                        *xi = ((1.0 - s) * sign * pi + r * ti) / (1.0 + s);
                    }
                    let pw = partition_weight(&x, idx, centers, p);
                    if pw == 0.0 {
                        0.0
                    } else {
                        wa * pw * field.eval(&x)
                    }
                })
                .collect();
            wr * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&vals)
}

/// Unit tangent directions with weights integrating over S^{n-1}.
pub(crate) fn angular_nodes(
    n: usize,
    frame: &[Vec<f64>],
    visible: Option<usize>,
    m: usize,
    az: usize,
) -> Vec<(Vec<f64>, f64)> {
    let dim = n + 1;
    let combine = |coef: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (c, e) in coef.iter().zip(frame) {
            v.iter_mut().zip(e).for_each(|(a, b)| *a += c * b);
        }
        v
    };
    let polar: Vec<(f64, f64)> = gl_on(m, 0.0, std::f64::consts::PI).collect();
    match visible {
        Some(j) => {
            // j polar angles; the direction's remaining component lies along frame[j].
            let mut out = Vec::new();
            let mut idx = vec![0usize; j];
            let total = polar.len().pow(j as u32);
            for _ in 0..total {
                let mut coef = vec![0.0; j + 1];
                let mut sprod = 1.0;
                let mut w = omega(n - 1 - j);
                for (a, &ia) in idx.iter().enumerate() {
                    let (phi, wp) = polar[ia];
                    coef[a] = sprod * phi.cos();
                    w *= wp * phi.sin().powi((n - 2 - a) as i32);
                    sprod *= phi.sin();
                }
                coef[j] = sprod;
                out.push((combine(&coef), w));
                for d in idx.iter_mut() {
                    *d += 1;
                    if *d < polar.len() {
                        break;
                    }
                    *d = 0;
                }
            }
            out
        }
        None => {
            let np = n - 2;
            let mut out = Vec::new();
            let mut idx = vec![0usize; np];
            let total = polar.len().pow(np as u32);
            let dphi = 2.0 * std::f64::consts::PI / az as f64;
            for _ in 0..total {
                let mut coef = vec![0.0; n];
                let mut sprod = 1.0;
                let mut w = 1.0;
                for (a, &ia) in idx.iter().enumerate() {
                    let (phi, wp) = polar[ia];
                    coef[a] = sprod * phi.cos();
                    w *= wp * phi.sin().powi((n - 2 - a) as i32);
                    sprod *= phi.sin();
                }
                for t in 0..az {
                    let psi = (t as f64 + 0.5) * dphi;
                    let mut c = coef.clone();
                    c[n - 2] = sprod * psi.cos();
                    c[n - 1] = sprod * psi.sin();
                    out.push((combine(&c), w * dphi));
                }
                for d in idx.iter_mut() {
                    *d += 1;
                    if *d < polar.len() {
                        break;
                    }
                    *d = 0;
                }
            }
            out
        }
    }
}

/// Convenience: the unit vector in the direction of `v`.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let nv = dot(v, v).sqrt();
    v.iter().map(|a| a / nv).collect()
}
