//! The GJMS operator through conformal covariance: in the chart at ξ the gauged
//! metric is flat, so P_g f = Λ^{(n+2k)/(n-2k)} Δ₀^k (Λ^{-1} f) with Δ₀ = -Σ ∂².

use serde::Serialize;

use super::jet::{radial_polylaplacian, Jet};
use crate::error::{LabError, Result};
use crate::manifold::Chart;

/// 8th-order central stencil for the second derivative, offsets 0..=4.
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    /// Largest trial step.
    pub h0: f64,
    /// Number of step halvings tried.
    pub levels: usize,
    /// Consistency required between the two best steps, relative to the larger of
    /// |P_g f(x)| and |f(x)|.
    pub rel_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { h0: 0.2, levels: 4, rel_tol: 1e-6 }
    }
}

impl FdOptions {
    pub fn with_scale(scale: f64) -> Self {
        FdOptions { h0: scale, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FdResult {
    pub value: f64,
    pub consistency: f64,
    pub step: f64,
}

fn nested_laplacian(g: &dyn Fn(&[f64]) -> f64, w: &mut Vec<f64>, h: f64, k: usize) -> f64 {
    if k == 0 {
        return g(w);
    }
    let n = w.len();
    let center = nested_laplacian(g, w, h, k - 1);
    let mut acc = D2[0] * center * n as f64;
    for a in 0..n {
        let w0 = w[a];
        for (j, c) in D2.iter().enumerate().skip(1) {
            w[a] = w0 + j as f64 * h;
            let p = nested_laplacian(g, w, h, k - 1);
            w[a] = w0 - j as f64 * h;
            let m = nested_laplacian(g, w, h, k - 1);
            acc += c * (p + m);
        }
        w[a] = w0;
    }
    -acc / (h * h)
}

/// Δ₀^k of a function of flat coordinates at `w0`, with adaptive step.
pub fn flat_polylaplacian(
    g: &dyn Fn(&[f64]) -> f64,
    w0: &[f64],
    k: usize,
    opts: FdOptions,
) -> Result<FdResult> {
    let mut vals = Vec::with_capacity(opts.levels + 1);
    let mut buf = w0.to_vec();
    for i in 0..=opts.levels {
        let h = opts.h0 * 0.5f64.powi(i as i32);
        vals.push((h, nested_laplacian(g, &mut buf, h, k)));
    }
    let mut best = FdResult { value: vals[0].1, consistency: f64::INFINITY, step: vals[0].0 };
    for pair in vals.windows(2) {
        let d = (pair[1].1 - pair[0].1).abs();
        if d < best.consistency {
            best = FdResult { value: pair[1].1, consistency: d, step: pair[1].0 };
        }
    }
    if !best.consistency.is_finite() || !best.value.is_finite() {
        return Err(LabError::StepAdaptation { value: best.value, consistency: best.consistency });
    }
    Ok(best)
}

/// P_g applied to `field` at the ambient point `x`, evaluated in `chart`.
pub fn apply_gjms(
    chart: &Chart,
    field: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    opts: FdOptions,
) -> Result<FdResult> {
    let w0 = chart.w(x)?;
    let n = chart.model.n as f64;
    let k = chart.k;
    let a = (n - 2.0 * k as f64) / 2.0;
    let g = |w: &[f64]| {
        let s = 0.25 * w.iter().map(|v| v * v).sum::<f64>();
        field(&chart.inverse(w)) * (1.0 + s).powf(-a)
    };
    let r = flat_polylaplacian(&g, &w0, k, opts)?;
    let lam = chart.lambda_of_rho(w0.iter().map(|v| v * v).sum::<f64>().sqrt());
    let factor = lam.powf((n + 2.0 * k as f64) / (n - 2.0 * k as f64));
    let out = FdResult { value: r.value * factor, consistency: r.consistency * factor, step: r.step };
    let floor = out.value.abs().max(field(x).abs()).max(1e-300);
    if out.consistency > opts.rel_tol * floor {
        return Err(LabError::StepAdaptation { value: out.value, consistency: out.consistency });
    }
    Ok(out)
}

/// Δ₀^k of a radial profile at ρ, given a routine producing its Taylor jet of order 2k.
pub fn radial_polyharmonic(profile: &dyn Fn(&Jet) -> Jet, rho: f64, n: usize, k: usize) -> f64 {
    let r = Jet::variable(rho, 2 * k);
    radial_polylaplacian(&profile(&r), rho, n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{make_model, ModelKind};
    use crate::operators::{gjms_constants, gjms_eigenvalue};

    #[test]
    fn constant_function_on_s5() {
        let m = make_model(ModelKind::RoundSphere, 5).unwrap();
        let pole = m.basis_point(0);
        let chart = Chart::new(m, 1, &pole).unwrap();
        let x = chart.inverse(&[0.3, -0.2, 0.1, 0.0, 0.4]);
        let r = apply_gjms(&chart, &|_| 1.0, &x, FdOptions::default()).unwrap();
        let c = gjms_constants(5, 1).unwrap();
        assert!((r.value - gjms_eigenvalue(&c, 0)).abs() < 1e-5, "{:?}", r);
    }

    #[test]
    fn affine_in_chart_is_annihilated() {
        let m = make_model(ModelKind::RoundSphere, 5).unwrap();
        let pole = m.basis_point(0);
        let chart = Chart::new(m, 1, &pole).unwrap();
        let f = |x: &[f64]| {
            let w = chart.w(x).unwrap();
            chart.lambda_of_rho(w.iter().map(|v| v * v).sum::<f64>().sqrt()) * (1.0 + 2.0 * w[0] - w[3])
        };
        let x = chart.inverse(&[0.2, 0.1, -0.3, 0.2, 0.0]);
        let r = apply_gjms(&chart, &f, &x, FdOptions { rel_tol: 1.0, ..Default::default() }).unwrap();
        assert!(r.value.abs() < 1e-7, "{:?}", r);
    }

    #[test]
    fn radial_route_matches_cartesian_route() {
        let n = 5;
        let prof = |r: &Jet| r.mul(r).add_const(1.0).powf(-1.5);
        let rho = 0.7;
        let radial = radial_polyharmonic(&prof, rho, n, 2);
        let g = |w: &[f64]| (1.0 + w.iter().map(|v| v * v).sum::<f64>()).powf(-1.5);
        let fd = flat_polylaplacian(&g, &[rho, 0.0, 0.0, 0.0, 0.0], 2, FdOptions::default()).unwrap();
        assert!((radial - fd.value).abs() < 1e-6 * radial.abs(), "{radial} {:?}", fd);
    }
}
