use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::manifold::omega;
use crate::manifold::quadrature::adaptive_gl;

/// Scalar constants attached to the pair (n, k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GjmsConstants {
    pub n: usize,
    pub k: usize,
    pub two_star: f64,
    pub c_nk: f64,
    pub b_nk: f64,
    pub omega_n_minus_1: f64,
    pub gamma: Vec<f64>,
    pub y_sphere: f64,
    pub sobolev_constant: f64,
    pub norm_2star: f64,
    pub norm_2star_minus1: f64,
}

impl GjmsConstants {
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// (n - 2k)/2, the homogeneity of the bubble.
    pub fn half_gap(&self) -> f64 {
        (self.n as f64 - 2.0 * self.k as f64) / 2.0
    }

    /// Constant-function Rayleigh quotient on the unit sphere.
    pub fn y_rayleigh(&self) -> f64 {
        let n = self.n as f64;
        let prod: f64 = (1..=self.k)
            .map(|i| {
                let i = i as f64;
                (n - 2.0 * i) * (n + 2.0 * i - 2.0) / 4.0
            })
            .product();
        prod * omega(self.n).powf(2.0 * self.k as f64 / n)
    }
}

/// ∫_{R^n} B₀^p dx by radial quadrature, with B₀(x) = (1 + |x|²/c)^{(2k-n)/2}.
pub fn bubble_power_integral(n: usize, k: usize, c: f64, p: f64) -> Result<f64> {
    let alpha = p * (n as f64 - 2.0 * k as f64) / 2.0;
    if alpha <= n as f64 / 2.0 {
        return Err(LabError::InvalidParameter(format!(
            "B0^{p} is not integrable in dimension {n}"
        )));
    }
    // r = sqrt(c) tan(t) maps [0, ∞) to [0, π/2).
    let e = 2.0 * alpha - n as f64 - 1.0;
    let f = |t: f64| t.sin().powi(n as i32 - 1) * t.cos().powf(e);
    let r = adaptive_gl(&f, &[0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2], 1e-15, 1e-300)?;
    Ok(omega(n - 1) * c.powf(n as f64 / 2.0) * r.value)
}

/// ∫_{|x|>r0} B₀^p dx, the tail of the integral above.
pub fn bubble_power_tail(n: usize, k: usize, c: f64, p: f64, r0: f64) -> Result<f64> {
    let alpha = p * (n as f64 - 2.0 * k as f64) / 2.0;
    if alpha <= n as f64 / 2.0 {
        return Err(LabError::InvalidParameter(format!(
            "B0^{p} is not integrable in dimension {n}"
        )));
    }
    let t0 = (r0 / c.sqrt()).atan();
    let e = 2.0 * alpha - n as f64 - 1.0;
    let f = |t: f64| t.sin().powi(n as i32 - 1) * t.cos().powf(e);
    let mid = 0.5 * (t0 + std::f64::consts::FRAC_PI_2);
    let r = adaptive_gl(&f, &[t0, mid, std::f64::consts::FRAC_PI_2], 1e-14, 1e-300)?;
    Ok(omega(n - 1) * c.powf(n as f64 / 2.0) * r.value)
}

pub fn gjms_constants(n: usize, k: usize) -> Result<GjmsConstants> {
    if k == 0 || n < 2 * k + 1 {
        return Err(LabError::DimensionConstraint { n, k });
    }
    let nf = n as f64;
    let kf = k as f64;
    let two_star = 2.0 * nf / (nf - 2.0 * kf);
    let log_c: f64 = (-(k as i64)..(k as i64))
        .map(|j| (nf + 2.0 * j as f64).ln())
        .sum::<f64>()
        / kf;
    let c_nk = log_c.exp();
    let om = omega(n - 1);
    let fact: f64 = (1..k).map(|i| i as f64).product();
    let prod: f64 = (1..=k).map(|i| nf - 2.0 * i as f64).product();
    let b_inv = 2f64.powi(k as i32 - 1) * fact * prod * om;
    let gamma = (1..=k)
        .map(|i| {
            let i = i as f64;
            (nf - 2.0 * i) * (nf + 2.0 * i - 2.0) / (4.0 * nf * (nf - 1.0))
        })
        .collect();
    let norm_2star = bubble_power_integral(n, k, c_nk, two_star)?;
    let norm_2star_minus1 = bubble_power_integral(n, k, c_nk, two_star - 1.0)?;
    let y_sphere = norm_2star.powf(2.0 * kf / nf);
    Ok(GjmsConstants {
        n,
        k,
        two_star,
        c_nk,
        b_nk: 1.0 / b_inv,
        omega_n_minus_1: om,
        gamma,
        y_sphere,
        sobolev_constant: 1.0 / y_sphere,
        norm_2star,
        norm_2star_minus1,
    })
}

/// Eigenvalue of P on degree-ℓ spherical harmonics of the unit round sphere.
pub fn gjms_eigenvalue(c: &GjmsConstants, l: usize) -> f64 {
    let nf = c.n as f64;
    let lam = l as f64 * (l as f64 + nf - 1.0);
    c.gamma.iter().map(|g| lam + g * nf * (nf - 1.0)).product()
}
