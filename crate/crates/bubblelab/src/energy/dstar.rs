use rayon::prelude::*;
use serde::Serialize;

use super::functional::{sum_energy_report, SumEnergyReport};
use crate::bubbles::{BubbleSpec, Configuration};
use crate::error::{LabError, Result};
use crate::manifold::{IntegrateOptions, ManifoldModel, PointOnM};
use crate::operators::{green, GjmsConstants};

/// Default μ grid for strictness scans: 9 log-spaced values in [1e-3, 1e-1].
pub fn default_mu_grid() -> Vec<f64> {
    (0..9).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect()
}

fn pair_energy(model: &ManifoldModel, c: &GjmsConstants, pts: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            s += green(model, c, &pts[i], &pts[j]).unwrap_or(f64::INFINITY);
        }
    }
    s
}

fn normalize(v: &mut [f64]) {
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= nv);
}

/// d centres spread over the sphere by minimizing Σ G(ξᵢ,ξⱼ), restricted to the
/// first m+1 ambient coordinates (m = d-2 on the sphere, d-1 on the quotient, at most n).
pub fn repulsion_layout(model: &ManifoldModel, c: &GjmsConstants, d: usize) -> Result<Vec<PointOnM>> {
    if d == 0 {
        return Err(LabError::InvalidParameter("need at least one centre".into()));
    }
    let n = model.n;
    if d == 1 {
        return Ok(vec![model.basis_point(0)]);
    }
    let m = if model.is_quotient() { d - 1 } else { d - 2 }.min(n);
    let dim = m + 1;
    // Kronecker start with golden-ratio style increments.
    let alphas: Vec<f64> = (0..dim).map(|a| ((a as f64 + 2.0).sqrt()).fract()).collect();
    let mut pts: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            if dim == 1 {
                v[0] = if i % 2 == 0 { 1.0 } else { -1.0 };
                return v;
            }
            for (a, al) in alphas.iter().enumerate() {
                let u = ((i as f64 + 0.5) * al + 0.5 * i as f64 / d as f64).fract();
                v[a] = (2.0 * std::f64::consts::PI * u).cos() + 0.3 * (a as f64 + 1.0) * (u - 0.5);
            }
            normalize(&mut v);
            v
        })
        .collect();
    if dim > 1 {
        let mut step = 0.5;
        let mut e = pair_energy(model, c, &pts);
        let mut sweeps = 0;
        while step > 1e-9 && sweeps < 2000 {
            sweeps += 1;
            let mut improved = false;
            for i in 0..d {
                for a in 0..dim {
                    for sgn in [1.0, -1.0] {
                        let old = pts[i].clone();
                        pts[i][a] += sgn * step;
                        normalize(&mut pts[i]);
                        let e2 = pair_energy(model, c, &pts);
                        if e2 < e {
                            e = e2;
                            improved = true;
                        } else {
                            pts[i] = old;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    pts.iter().map(|p| model.point_normalized(p)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DStarRow {
    pub d: usize,
    pub mu: f64,
    pub j: f64,
    pub j_error: f64,
    pub threshold_strict: f64,
    pub threshold_loose: f64,
    pub margin_strict: f64,
    pub margin_loose: f64,
    pub margin_error: f64,
    pub strict_resolved: bool,
    pub loose_holds: bool,
    pub epsilon_sum: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DStarTable {
    pub rows: Vec<DStarRow>,
    /// Best strict margin per d (d, μ, margin, resolved).
    pub best: Vec<(usize, f64, f64, bool)>,
    /// Per d: whether the strict margin improves monotonically as μ decreases.
    pub monotone: Vec<(usize, bool)>,
    pub d_star: Option<usize>,
}

fn row_of(d: usize, mu: f64, r: Result<SumEnergyReport>) -> DStarRow {
    match r {
        Ok(r) => DStarRow {
            d,
            mu,
            j: r.energy.j.value,
            j_error: r.energy.j.error,
            threshold_strict: r.energy.threshold_strict,
            threshold_loose: r.energy.threshold_loose,
            margin_strict: r.energy.margin_strict,
            margin_loose: r.energy.margin_loose,
            margin_error: r.energy.margin_error,
            strict_resolved: r.strict_resolved,
            loose_holds: r.loose_bound_holds,
            epsilon_sum: r.epsilon_sum,
            failure: None,
        },
        Err(e) => DStarRow {
            d,
            mu,
            j: f64::NAN,
            j_error: f64::NAN,
            threshold_strict: f64::NAN,
            threshold_loose: f64::NAN,
            margin_strict: f64::NAN,
            margin_loose: f64::NAN,
            margin_error: f64::NAN,
            strict_resolved: false,
            loose_holds: false,
            epsilon_sum: f64::NAN,
            failure: Some(e.to_string()),
        },
    }
}

/// Scans equal-weight configurations over d and μ and returns the least d with a
/// strictly positive, resolved margin below d^{2k/n}Y.
pub fn find_d_star(
    model: &ManifoldModel,
    c: &GjmsConstants,
    d_range: &[usize],
    mu_grid: &[f64],
    delta: f64,
    opts: IntegrateOptions,
) -> Result<DStarTable> {
    if d_range.iter().any(|&d| d == 0 || d > 12) {
        return Err(LabError::InvalidParameter("d must lie in [1, 12]".into()));
    }
    if mu_grid.is_empty() || mu_grid.iter().any(|&m| !(m > 0.0)) {
        return Err(LabError::InvalidParameter("μ grid must be nonempty and positive".into()));
    }
    let mut rows = Vec::new();
    for &d in d_range {
        let centers = repulsion_layout(model, c, d)?;
        let r: Vec<DStarRow> = mu_grid
            .par_iter()
            .map(|&mu| {
                let specs = centers.iter().map(|p| BubbleSpec::new(p.clone(), mu, delta)).collect();
                let rep = Configuration::new(*model, c.clone(), specs).and_then(|cfg| sum_energy_report(&cfg, opts));
                row_of(d, mu, rep)
            })
            .collect();
        rows.extend(r);
    }
    let mut best = Vec::new();
    let mut monotone = Vec::new();
    let mut d_star = None;
    for &d in d_range {
        let mut rs: Vec<&DStarRow> = rows.iter().filter(|r| r.d == d && r.failure.is_none()).collect();
        rs.sort_by(|a, b| b.mu.partial_cmp(&a.mu).unwrap());
        if let Some(b) = rs.iter().max_by(|a, b| a.margin_strict.partial_cmp(&b.margin_strict).unwrap()) {
            best.push((d, b.mu, b.margin_strict, b.strict_resolved));
        }
        monotone.push((d, rs.windows(2).all(|w| w[1].margin_strict >= w[0].margin_strict)));
        if d >= 2 && d_star.is_none() && rs.iter().any(|r| r.margin_strict > 0.0 && r.strict_resolved) {
            d_star = Some(d);
        }
    }
    Ok(DStarTable { rows, best, monotone, d_star })
}
