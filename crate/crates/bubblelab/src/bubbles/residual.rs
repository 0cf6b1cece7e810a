use serde::{Deserialize, Serialize};

use super::bubble::Bubble;
use crate::error::Result;
use crate::operators::{apply_gjms, FdOptions, FdResult, GjmsConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    General,
    Lcf,
}

impl std::str::FromStr for BoundVariant {
    type Err = crate::LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(BoundVariant::General),
            "lcf" => Ok(BoundVariant::Lcf),
            _ => Err(crate::LabError::InvalidParameter(format!("unknown bound variant '{s}'"))),
        }
    }
}

/// Pointwise residual bound with unit constants, as a function of the flat distance d.
pub fn residual_bound(c: &GjmsConstants, mu: f64, delta: f64, d: f64, variant: BoundVariant) -> f64 {
    let n = c.nf();
    let k = c.k as f64;
    let a = c.half_gap();
    let mut s = 0.0;
    if variant == BoundVariant::General && d <= 2.0 * delta {
        s += mu.powf(a) / (mu + d).powf(n - 4.0);
    }
    if d >= delta && d <= 2.0 * delta {
        s += mu.powf(a) * delta.powf(-2.0 * k);
    }
    if d >= delta {
        s += mu.powf((n + 2.0 * k) / 2.0) / (mu + d).powf(n + 2.0 * k);
    }
    s
}

impl Bubble {
    /// P_g V - V^{2*-1} at x, assembled from the gauge identity
    /// P_g V = Λ^{2*-1} Δ₀^k Ṽ.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let p = self.constants.two_star - 1.0;
        let rho = self.rho(x);
        let delta = self.spec.delta;
        if rho <= delta {
            return 0.0;
        }
        if rho >= 2.0 * delta {
            return -self.value(x).powf(p);
        }
        let lam = self.chart.lambda_of_rho(rho);
        let vt = self.tilde_profile(rho);
        lam.powf(p) * (self.polyharmonic_tilde(rho) - vt.powf(p))
    }

    /// The same residual with P_g V computed by finite differences in the chart.
    pub fn residual_fd(&self, x: &[f64], opts: FdOptions) -> Result<FdResult> {
        let p = self.constants.two_star - 1.0;
        let pv = apply_gjms(&self.chart, &|y: &[f64]| self.value(y), x, opts)?;
        Ok(FdResult { value: pv.value - self.value(x).powf(p), ..pv })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    /// Flat distance ρ from the center in the chart at ξ.
    pub distance: f64,
    pub residual: f64,
    pub bound: f64,
    /// |residual| / bound where the bound is positive.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualProfile {
    pub mu: f64,
    pub delta: f64,
    pub variant: BoundVariant,
    pub rows: Vec<ResidualRow>,
    pub sup_ratio: f64,
}

/// Residual against its bound at `samples` flat distances spread over (0, 2], the
/// chart hemisphere around ξ.
pub fn residual_profile(b: &Bubble, samples: usize, variant: BoundVariant) -> ResidualProfile {
    let n = b.model.n;
    let (mu, delta) = (b.spec.mu, b.spec.delta);
    let rows: Vec<ResidualRow> = (1..=samples)
        .map(|i| {
            let rho = 2.0 * i as f64 / samples as f64;
            let mut w = vec![0.0; n];
            w[0] = rho;
            let x = b.chart.inverse(&w);
            let r = b.residual(&x);
            let bound = residual_bound(&b.constants, mu, delta, rho, variant);
            ResidualRow { distance: rho, residual: r, bound, ratio: (bound > 0.0).then(|| r.abs() / bound) }
        })
        .collect();
    let sup_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    ResidualProfile { mu, delta, variant, rows, sup_ratio }
}

/// Largest finite-difference residual over sample points inside the core ball ρ < δ,
/// with steps scaled to the core. Each point contributes |residual| plus the
/// step-consistency of its difference quotient.
pub fn core_residual_fd(b: &Bubble, fd: FdOptions) -> Result<f64> {
    let n = b.model.n;
    let s = b.core_scale();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.3, 1.0, 3.0] {
        let rho = t * s;
        if rho >= 0.9 * b.spec.delta {
            continue;
        }
        let mut w = vec![0.0; n];
        w[0] = rho;
        let x = b.chart.inverse(&w);
        let h0 = fd.h0.min(0.25 * s).min(0.05 * b.spec.delta);
        let r = b.residual_fd(&x, FdOptions { h0, rel_tol: f64::INFINITY, ..fd })?;
        worst = worst.max(r.value.abs() + r.consistency);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::BubbleSpec;
    use crate::manifold::{make_model, ModelKind};
    use crate::operators::gjms_constants;
    use std::sync::Arc;

    #[test]
    fn bound_indicator_logic() {
        let c = gjms_constants(5, 1).unwrap();
        let (mu, delta) = (1e-3, 0.3);
        assert_eq!(residual_bound(&c, mu, delta, 0.0, BoundVariant::Lcf), 0.0);
        let g0 = residual_bound(&c, mu, delta, 0.0, BoundVariant::General);
        assert!((g0 - mu.powf(1.5) * mu.powf(-1.0)).abs() < 1e-12 * g0);
        let neck = residual_bound(&c, mu, delta, 0.45, BoundVariant::Lcf);
        let expect = mu.powf(1.5) / 0.09 + mu.powf(3.5) / (mu + 0.45f64).powi(7);
        assert!((neck - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn neck_residual_matches_finite_differences() {
        let m = make_model(ModelKind::RoundSphere, 5).unwrap();
        let c = Arc::new(gjms_constants(5, 1).unwrap());
        let b = Bubble::new(m, c, BubbleSpec::new(m.basis_point(0), 0.02, 0.3)).unwrap();
        for r in [0.4, 0.5, 0.8] {
            let x = b.chart.inverse(&[r, 0.0, 0.0, 0.0, 0.0]);
            let fd = b.residual_fd(&x, FdOptions { h0: 0.02, levels: 4, rel_tol: 1.0 }).unwrap();
            let jet = b.residual(&x);
            let scale = b.value(&x).powf(c_p(&b));
            assert!((fd.value - jet).abs() < 1e-5 * scale.max(jet.abs()), "r={r} fd={:?} jet={jet}", fd);
        }
    }

    fn c_p(b: &Bubble) -> f64 {
        b.constants.two_star - 1.0
    }
}
