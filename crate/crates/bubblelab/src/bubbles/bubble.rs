use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cutoff::{cutoff_chi, cutoff_jet};
use crate::error::{LabError, Result};
use crate::manifold::{Chart, ManifoldModel, PointOnM};
use crate::operators::{gauged_green_jet, gauged_green_profile, green, GjmsConstants, Jet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub center: PointOnM,
    pub mu: f64,
    pub delta: f64,
    pub weight: f64,
}

impl BubbleSpec {
    pub fn new(center: PointOnM, mu: f64, delta: f64) -> Self {
        BubbleSpec { center, mu, delta, weight: 1.0 }
    }

    pub fn with_weight(mut self, a: f64) -> Self {
        self.weight = a;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BubbleKind {
    B0,
    B,
    U,
    Vtilde,
    V,
}

/// Scale windows below which the error estimate applies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Admissibility {
    pub lcf_limit: f64,
    pub general_limit: f64,
    pub lcf: bool,
    pub general: bool,
}

pub fn admissibility(c: &GjmsConstants, mu: f64, delta: f64) -> Admissibility {
    let base = c.c_nk.powf(-0.5) * delta;
    let lcf_limit = base.powf(c.nf() / 2.0);
    let general_limit = base.powi(3);
    Admissibility { lcf_limit, general_limit, lcf: mu < lcf_limit, general: mu < general_limit }
}

/// The canonical bubble B₀(x) = (1 + |x|²/𝔠)^{(2k-n)/2} on R^n.
pub fn b0(c: &GjmsConstants, r: f64) -> f64 {
    (1.0 + r * r / c.c_nk).powf(-c.half_gap())
}

/// A bubble together with its chart and constants, ready for evaluation.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub spec: BubbleSpec,
    pub model: ManifoldModel,
    pub constants: Arc<GjmsConstants>,
    pub chart: Chart,
    /// 𝔠^{(n-2k)/2} b^{-1} μ^{(n-2k)/2}.
    pub tail: f64,
}

impl Bubble {
    pub fn new(model: ManifoldModel, constants: Arc<GjmsConstants>, spec: BubbleSpec) -> Result<Bubble> {
        if !(spec.mu > 0.0) || !spec.mu.is_finite() {
            return Err(LabError::InvalidParameter(format!("scale must be positive, got {}", spec.mu)));
        }
        if !(spec.delta > 0.0 && spec.delta < 1.0) {
            return Err(LabError::InvalidParameter(format!("cutoff radius must lie in (0,1), got {}", spec.delta)));
        }
        if !(spec.weight > 0.0) {
            return Err(LabError::InvalidParameter(format!("weight must be positive, got {}", spec.weight)));
        }
        let chart = Chart::new(model, constants.k, &spec.center)?;
        let a = constants.half_gap();
        let tail = (constants.c_nk * spec.mu).powf(a) / constants.b_nk;
        Ok(Bubble { spec, model, constants, chart, tail })
    }

    pub fn admissibility(&self) -> Admissibility {
        admissibility(&self.constants, self.spec.mu, self.spec.delta)
    }

    /// Length scale of the core, μ√𝔠, in flat units.
    pub fn core_scale(&self) -> f64 {
        self.spec.mu * self.constants.c_nk.sqrt()
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        self.chart.rho(x)
    }

    pub fn b_profile(&self, rho: f64) -> f64 {
        let mu = self.spec.mu;
        let a = self.constants.half_gap();
        mu.powf(-a) * (1.0 + rho * rho / (self.constants.c_nk * mu * mu)).powf(-a)
    }

    fn b_jet(&self, r: &Jet) -> Jet {
        let mu = self.spec.mu;
        let a = self.constants.half_gap();
        r.mul(r)
            .scale(1.0 / (self.constants.c_nk * mu * mu))
            .add_const(1.0)
            .powf(-a)
            .scale(mu.powf(-a))
    }

    pub fn u_profile(&self, rho: f64) -> f64 {
        cutoff_chi(rho / self.spec.delta) * self.b_profile(rho)
    }

    /// Ṽ as a function of the flat distance.
    pub fn tilde_profile(&self, rho: f64) -> f64 {
        let t = rho / self.spec.delta;
        let g = || self.tail * gauged_green_profile(&self.model, &self.constants, rho);
        if t <= 1.0 {
            self.b_profile(rho)
        } else if t >= 2.0 {
            g()
        } else {
            let chi = cutoff_chi(t);
            chi * self.b_profile(rho) + (1.0 - chi) * g()
        }
    }

    pub fn tilde_jet(&self, r: &Jet) -> Jet {
        let rho = r.value();
        let t = rho / self.spec.delta;
        if t <= 1.0 {
            return self.b_jet(r);
        }
        let g = gauged_green_jet(&self.model, &self.constants, r).scale(self.tail);
        if t >= 2.0 {
            return g;
        }
        let chi = cutoff_jet(&r.scale(1.0 / self.spec.delta));
        let b = self.b_jet(r);
        chi.mul(&b.sub(&g)).add(&g)
    }

    /// Δ₀^k Ṽ at flat distance ρ: exact in the core and outside the neck, by jets in the neck.
    pub fn polyharmonic_tilde(&self, rho: f64) -> f64 {
        let t = rho / self.spec.delta;
        if t <= 1.0 {
            self.b_profile(rho).powf(self.constants.two_star - 1.0)
        } else if t >= 2.0 {
            0.0
        } else {
            let k = self.constants.k;
            crate::operators::radial_polyharmonic(&|r: &Jet| self.tilde_jet(r), rho, self.model.n, k)
        }
    }

    /// V at an ambient point.
    pub fn value(&self, x: &[f64]) -> f64 {
        let rho = self.rho(x);
        if rho >= 2.0 * self.spec.delta {
            // Λ cancels against the gauge: V = tail · b⁻¹·b·G_g.
            return self.tail * green(&self.model, &self.constants, x, &self.spec.center.coords).unwrap_or(f64::INFINITY);
        }
        self.chart.lambda_of_rho(rho) * self.tilde_profile(rho)
    }

    /// P_g V at x; supported in the ball of flat radius 2δ.
    pub fn pv(&self, x: &[f64]) -> f64 {
        let rho = self.rho(x);
        if rho >= 2.0 * self.spec.delta {
            return 0.0;
        }
        self.chart.lambda_of_rho(rho).powf(self.constants.two_star - 1.0) * self.polyharmonic_tilde(rho)
    }

    pub fn eval(&self, kind: BubbleKind, x: &[f64]) -> f64 {
        match kind {
            BubbleKind::B0 => b0(&self.constants, x.iter().map(|v| v * v).sum::<f64>().sqrt()),
            BubbleKind::B => self.b_profile(self.rho(x)),
            BubbleKind::U => self.u_profile(self.rho(x)),
            BubbleKind::Vtilde => self.tilde_profile(self.rho(x)),
            BubbleKind::V => self.value(x),
        }
    }
}

/// A list of weighted bubbles on a common model.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub model: ManifoldModel,
    pub constants: Arc<GjmsConstants>,
    pub bubbles: Vec<Bubble>,
}

impl Configuration {
    pub fn new(model: ManifoldModel, constants: GjmsConstants, specs: Vec<BubbleSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(LabError::InvalidParameter("configuration needs at least one bubble".into()));
        }
        model.check_order(constants.k)?;
        if constants.n != model.n {
            return Err(LabError::InvalidParameter("constants and model dimensions differ".into()));
        }
        let constants = Arc::new(constants);
        let bubbles = specs
            .into_iter()
            .map(|s| Bubble::new(model, constants.clone(), s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration { model, constants, bubbles })
    }

    pub fn len(&self) -> usize {
        self.bubbles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bubbles.is_empty()
    }

    pub fn specs(&self) -> Vec<BubbleSpec> {
        self.bubbles.iter().map(|b| b.spec.clone()).collect()
    }

    /// Σ aᵢ Vᵢ at x.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.bubbles.iter().map(|b| b.spec.weight * b.value(x)).sum()
    }
}
