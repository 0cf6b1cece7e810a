use serde::Serialize;

use super::{complete_frame, dot, sphere_distance, ManifoldModel, PointOnM};
use crate::error::{LabError, Result};

/// Stereographic chart from the antipode of `pole`, scaled so that |w| = 2 tan(r/2).
///
/// In these coordinates the metric Λ^{4/(n-2k)} g is exactly Euclidean, with
/// Λ(x) = (1 + |w|²/4)^{(n-2k)/2}.
#[derive(Debug, Clone, Serialize)]
pub struct Chart {
    pub model: ManifoldModel,
    pub k: usize,
    pub pole: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

impl Chart {
    pub fn new(model: ManifoldModel, k: usize, pole: &PointOnM) -> Result<Chart> {
        model.check_order(k)?;
        if pole.coords.len() != model.n + 1 {
            return Err(LabError::InvalidParameter("pole has wrong dimension".into()));
        }
        let frame = complete_frame(&pole.coords, vec![]);
        Ok(Chart { model, k, pole: pole.coords.clone(), frame })
    }

    fn exponent(&self) -> f64 {
        (self.model.n as f64 - 2.0 * self.k as f64) / 2.0
    }

    /// The lift of `x` used by the chart (on the quotient, the one nearest the pole).
    pub fn lift<'a>(&self, x: &'a [f64]) -> std::borrow::Cow<'a, [f64]> {
        if self.model.is_quotient() && dot(x, &self.pole) < 0.0 {
            std::borrow::Cow::Owned(x.iter().map(|v| -v).collect())
        } else {
            std::borrow::Cow::Borrowed(x)
        }
    }

    /// Flat coordinates w(x).
    pub fn w(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.lift(x);
        let c = dot(&x, &self.pole);
        if 1.0 + c <= 1e-300 {
            return Err(LabError::Singular("chart evaluated at the antipode of its pole".into()));
        }
        Ok(self.frame.iter().map(|e| 2.0 * dot(&x, e) / (1.0 + c)).collect())
    }

    /// Flat distance |w(x)| = 2 tan(r/2), r the geodesic distance to the pole.
    pub fn rho(&self, x: &[f64]) -> f64 {
        let x = self.lift(x);
        let r = sphere_distance(&x, &self.pole);
        2.0 * (0.5 * r).tan()
    }

    /// Inverse chart map.
    pub fn inverse(&self, w: &[f64]) -> Vec<f64> {
        let s = 0.25 * w.iter().map(|v| v * v).sum::<f64>();
        let mut x: Vec<f64> = self.pole.iter().map(|p| (1.0 - s) * p).collect();
        for (wa, e) in w.iter().zip(&self.frame) {
            x.iter_mut().zip(e).for_each(|(xi, ei)| *xi += wa * ei);
        }
        x.iter_mut().for_each(|xi| *xi /= 1.0 + s);
        x
    }

    /// Conformal factor as a function of the flat distance.
    pub fn lambda_of_rho(&self, rho: f64) -> f64 {
        (1.0 + 0.25 * rho * rho).powf(self.exponent())
    }

    pub fn lambda(&self, x: &[f64]) -> f64 {
        self.lambda_of_rho(self.rho(x))
    }

    /// Density of dv_g with respect to dw.
    pub fn volume_density(&self, rho: f64) -> f64 {
        (1.0 + 0.25 * rho * rho).powi(-(self.model.n as i32))
    }
}
