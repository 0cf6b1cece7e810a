use serde::Serialize;

use super::constants::GjmsConstants;
use super::jet::Jet;
use crate::error::{LabError, Result};
use crate::manifold::{sphere_distance, Chart, ManifoldModel, PointOnM};

/// Green's function of P on the round sphere, written in the chart at x:
/// G = Λ_x(y)·b·|w_x(y)|^{2k-n} = b·(ρ^{-2} + 1/4)^{(n-2k)/2} with ρ = 2 tan(r/2).
pub fn green_sphere(c: &GjmsConstants, x: &[f64], y: &[f64]) -> Result<f64> {
    let r = sphere_distance(x, y);
    if r == 0.0 {
        return Err(LabError::Singular("Green's function evaluated on the diagonal".into()));
    }
    let rho = 2.0 * (0.5 * r).tan();
    Ok(c.b_nk * (1.0 / (rho * rho) + 0.25).powf(c.half_gap()))
}

/// G_g(x, y) on the model; on the quotient the two lifts of y are summed.
pub fn green(model: &ManifoldModel, c: &GjmsConstants, x: &[f64], y: &[f64]) -> Result<f64> {
    model.check_order(c.k)?;
    let g = green_sphere(c, x, y)?;
    if model.is_quotient() {
        let ym: Vec<f64> = y.iter().map(|v| -v).collect();
        Ok(g + green_sphere(c, x, &ym)?)
    } else {
        Ok(g)
    }
}

/// Sphere Green's function evaluated through an arbitrary chart:
/// Λ_ξ(x)Λ_ξ(y)·b·|w(x) - w(y)|^{2k-n}.
pub fn green_in_chart(chart: &Chart, c: &GjmsConstants, x: &[f64], y: &[f64]) -> Result<f64> {
    let wx = chart.w(x)?;
    let wy = chart.w(y)?;
    let d2: f64 = wx.iter().zip(&wy).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 == 0.0 {
        return Err(LabError::Singular("Green's function evaluated on the diagonal".into()));
    }
    let lx = chart.lambda_of_rho(wx.iter().map(|v| v * v).sum::<f64>().sqrt());
    let ly = chart.lambda_of_rho(wy.iter().map(|v| v * v).sum::<f64>().sqrt());
    Ok(lx * ly * c.b_nk * d2.powf(-c.half_gap()))
}

/// Green's function of the gauged operator with pole ξ: Λ_ξ(x)^{-1} G_g(x, ξ).
pub fn green_gauged(model: &ManifoldModel, c: &GjmsConstants, xi: &PointOnM, x: &[f64]) -> Result<f64> {
    let chart = Chart::new(*model, c.k, xi)?;
    let g = green(model, c, x, &xi.coords)?;
    Ok(g / chart.lambda(x))
}

/// Closed form of the gauged Green's function as a function of the flat distance.
pub fn gauged_green_profile(model: &ManifoldModel, c: &GjmsConstants, rho: f64) -> f64 {
    let a = c.half_gap();
    let mut g = c.b_nk * rho.powf(-2.0 * a);
    if model.is_quotient() {
        g += c.b_nk * 2f64.powf(-2.0 * a);
    }
    g
}

pub fn gauged_green_jet(model: &ManifoldModel, c: &GjmsConstants, rho: &Jet) -> Jet {
    let a = c.half_gap();
    let g = rho.powf(-2.0 * a).scale(c.b_nk);
    if model.is_quotient() {
        g.add_const(c.b_nk * 2f64.powf(-2.0 * a))
    } else {
        g
    }
}

/// Constant term of the gauged Green's function at ξ.
#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub xi: PointOnM,
    pub mass: f64,
    pub radii: Vec<f64>,
    pub samples: Vec<f64>,
    pub fitted_constant: f64,
    pub residual: f64,
    pub converged: bool,
}

pub const MASS_RADII: [f64; 4] = [1e-1, 0.031622776601683794, 1e-2, 0.0031622776601683794];

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let m = xs.len();
    for s in 1..m {
        for i in 0..m - s {
            p[i] = (xs[i + s] * p[i] - xs[i] * p[i + 1]) / (xs[i + s] - xs[i]);
        }
    }
    p[0]
}

pub fn mass(model: &ManifoldModel, c: &GjmsConstants, xi: &PointOnM) -> Result<MassReport> {
    let chart = Chart::new(*model, c.k, xi)?;
    let n = model.n;
    let mut samples = Vec::with_capacity(MASS_RADII.len());
    for &r in &MASS_RADII {
        let mut w = vec![0.0; n];
        w[0] = r;
        let x = chart.inverse(&w);
        let rho = chart.rho(&x);
        let g = green_gauged(model, c, xi, &x)?;
        samples.push(g - c.b_nk * rho.powf(2.0 * c.k as f64 - n as f64));
    }
    let full = neville_at_zero(&MASS_RADII, &samples);
    let reduced = neville_at_zero(&MASS_RADII[1..], &samples[1..]);
    let residual = (full - reduced).abs();
    Ok(MassReport {
        xi: xi.clone(),
        mass: full,
        radii: MASS_RADII.to_vec(),
        samples,
        fitted_constant: full,
        residual,
        converged: residual < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{make_model, ModelKind};
    use crate::operators::gjms_constants;

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - x + 2.0 * x * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_rejected() {
        let c = gjms_constants(5, 1).unwrap();
        let m = make_model(ModelKind::RoundSphere, 5).unwrap();
        let p = m.basis_point(0);
        assert!(green(&m, &c, &p.coords, &p.coords).is_err());
    }

    #[test]
    fn gauged_profile_matches_direct_route() {
        let c = gjms_constants(5, 1).unwrap();
        for kind in [ModelKind::RoundSphere, ModelKind::AntipodalQuotient] {
            let m = make_model(kind, 5).unwrap();
            let xi = m.point_normalized(&[0.2, 0.5, -0.1, 0.3, 0.7, 0.1]).unwrap();
            let chart = Chart::new(m, 1, &xi).unwrap();
            let x = chart.inverse(&[0.3, 0.2, -0.4, 0.1, 0.05]);
            let direct = green_gauged(&m, &c, &xi, &x).unwrap();
            let closed = gauged_green_profile(&m, &c, chart.rho(&x));
            assert!((direct - closed).abs() < 1e-12 * closed, "{kind:?}");
        }
    }
}
