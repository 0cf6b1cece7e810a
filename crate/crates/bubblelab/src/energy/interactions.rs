use serde::Serialize;

use crate::bubbles::{Bubble, Configuration};
use crate::error::{LabError, Result};
use crate::manifold::{integrate, Estimate, Focus, GridField, IntegrateOptions};
use crate::operators::{bubble_power_tail, green, gauged_green_profile, GjmsConstants, Jet};

/// Focus of a bubble for the integrator: core scale and the neck breakpoints.
pub fn focus_of(b: &Bubble) -> Focus {
    let neck: Vec<f64> = (0..=8).map(|i| b.spec.delta * (1.0 + i as f64 / 8.0)).collect();
    Focus::new(&b.spec.center, b.core_scale()).with_breaks(&neck)
}

fn eps_from_green(c: &GjmsConstants, mu_i: f64, mu_j: f64, g: Option<f64>) -> f64 {
    let a = c.half_gap();
    let sep = match g {
        Some(g) => (g / c.b_nk).powf(-1.0 / a) / c.c_nk / (mu_i * mu_j),
        None => 0.0,
    };
    (mu_i / mu_j + mu_j / mu_i + sep).powf(-a)
}

fn coincident(bi: &Bubble, bj: &Bubble) -> bool {
    bi.model.geodesic_distance(&bi.spec.center.coords, &bj.spec.center.coords) == 0.0
}

/// ε_ij from the Green's function of g, with G(ξ,ξ)^{2/(2k-n)} := 0.
pub fn epsilon(bi: &Bubble, bj: &Bubble) -> f64 {
    let c = &bi.constants;
    let g = if coincident(bi, bj) {
        None
    } else {
        green(&bi.model, c, &bi.spec.center.coords, &bj.spec.center.coords).ok()
    };
    eps_from_green(c, bi.spec.mu, bj.spec.mu, g)
}

/// ε_ij with the gauged Green's function G_{g_{ξ_j}}(ξ_i, ξ_j) in place of G_g.
pub fn epsilon_gauged(bi: &Bubble, bj: &Bubble) -> f64 {
    let c = &bi.constants;
    let g = if coincident(bi, bj) {
        None
    } else {
        Some(gauged_green_profile(&bj.model, c, bj.rho(&bi.spec.center.coords)))
    };
    eps_from_green(c, bi.spec.mu, bj.spec.mu, g)
}

fn pair_foci(bi: &Bubble, bj: &Bubble) -> Vec<Focus> {
    if coincident(bi, bj) {
        let mut f = focus_of(bi);
        f.scale = f.scale.min(bj.core_scale());
        f.breaks.extend(focus_of(bj).breaks);
        vec![f]
    } else {
        vec![focus_of(bi), focus_of(bj)]
    }
}

fn dirs(bs: &[&Bubble]) -> Vec<Vec<f64>> {
    bs.iter().map(|b| b.spec.center.coords.clone()).collect()
}

/// Q_ij = ∫ V_i^{2*-1} V_j.
pub fn q_interaction(bi: &Bubble, bj: &Bubble, opts: IntegrateOptions) -> Result<Estimate> {
    pq_raw(bi, bj, bi.constants.two_star - 1.0, 1.0, opts)
}

fn pq_raw(bi: &Bubble, bj: &Bubble, p: f64, q: f64, opts: IntegrateOptions) -> Result<Estimate> {
    let f = GridField::new(|x: &[f64]| bi.value(x).powf(p) * bj.value(x).powf(q))
        .with_directions(dirs(&[bi, bj]));
    integrate(&bi.model, &f, &pair_foci(bi, bj), opts)
}

/// ∫ V_i^p V_j^q with p + q = 2*.
pub fn pq_interaction(
    cfg: &Configuration,
    i: usize,
    j: usize,
    p: f64,
    q: f64,
    opts: IntegrateOptions,
) -> Result<Estimate> {
    let ts = cfg.constants.two_star;
    if p < 1.0 || q < 1.0 || (p + q - ts).abs() > 1e-12 * ts {
        return Err(LabError::InvalidParameter(format!(
            "need p, q >= 1 and p + q = 2* = {ts}, got p = {p}, q = {q}"
        )));
    }
    let (bi, bj) = pair(cfg, i, j)?;
    pq_raw(bi, bj, p, q, opts)
}

fn pair(cfg: &Configuration, i: usize, j: usize) -> Result<(&Bubble, &Bubble)> {
    match (cfg.bubbles.get(i), cfg.bubbles.get(j)) {
        (Some(a), Some(b)) if i != j => Ok((a, b)),
        _ => Err(LabError::InvalidParameter(format!("invalid bubble pair ({i}, {j})"))),
    }
}

/// ∫ V_j P_g V_i, assembled in the chart of bubble i where P_g V_i is supported.
pub fn l_interaction(bi: &Bubble, bj: &Bubble, opts: IntegrateOptions) -> Result<Estimate> {
    let f = GridField::new(|x: &[f64]| {
        let p = bi.pv(x);
        if p == 0.0 {
            0.0
        } else {
            p * bj.value(x)
        }
    })
    .with_directions(dirs(&[bi, bj]));
    // V_j is smooth on the support of P_g V_i unless ξ_j sits near it.
    let near = bi.rho(&bj.spec.center.coords) < 3.0 * bi.spec.delta;
    let foci = if near { pair_foci(bi, bj) } else { vec![focus_of(bi)] };
    integrate(&bi.model, &f, &foci, opts)
}

/// ∫_M V^{2*} dv_g.
pub fn bubble_mass_integral(b: &Bubble, opts: IntegrateOptions) -> Result<Estimate> {
    let p = b.constants.two_star;
    let f = GridField::new(|x: &[f64]| b.value(x).powf(p)).with_directions(dirs(&[b]));
    integrate(&b.model, &f, &[focus_of(b)], opts)
}

/// Nonlinear gap ∫_M V^{2*} dv_g - ‖B₀‖_{2*}^{2*}. Both sides agree in the core, so
/// only the region outside the flat δ-ball is integrated.
pub fn nonlinear_gap(b: &Bubble, opts: IntegrateOptions) -> Result<Estimate> {
    let c = &b.constants;
    let p = c.two_star;
    let delta = b.spec.delta;
    let f = GridField::new(|x: &[f64]| {
        if b.rho(x) <= delta {
            0.0
        } else {
            b.value(x).powf(p)
        }
    })
    .with_directions(dirs(&[b]));
    let outer = integrate(&b.model, &f, &[focus_of(b)], opts)?;
    let tail = bubble_power_tail(c.n, c.k, c.c_nk, p, delta / b.spec.mu)?;
    Ok(Estimate::new(outer.value - tail, outer.error + 1e-14 * tail))
}

/// Self-interaction ∫ (P_g V - V^{2*-1}) V dv_g.
pub fn self_interaction(b: &Bubble, opts: IntegrateOptions) -> Result<Estimate> {
    let f = GridField::new(|x: &[f64]| {
        let r = b.residual(x);
        if r == 0.0 {
            0.0
        } else {
            r * b.value(x)
        }
    })
    .with_directions(dirs(&[b]));
    integrate(&b.model, &f, &[focus_of(b)], opts)
}

/// ‖V - U‖ in the energy norm, U = Λ·χ·B. The difference is Λ(1-χ)·tail·G_{g_ξ},
/// whose gauged polylaplacian lives in the neck.
pub fn tail_energy_norm(b: &Bubble) -> Result<Estimate> {
    let n = b.model.n;
    let k = b.constants.k;
    let delta = b.spec.delta;
    let h = |r: &Jet| {
        let chi = crate::bubbles::cutoff_jet(&r.scale(1.0 / delta));
        let g = crate::operators::gauged_green_jet(&b.model, &b.constants, r).scale(b.tail);
        g.sub(&chi.mul(&g))
    };
    let f = |rho: f64| {
        let hv = h(&Jet::constant(rho, 0)).value();
        let lap = crate::operators::radial_polyharmonic(&h, rho, n, k);
        hv * lap * rho.powi(n as i32 - 1)
    };
    let bks: Vec<f64> = (0..=8).map(|i| delta * (1.0 + i as f64 / 8.0)).collect();
    let r = crate::manifold::quadrature::adaptive_gl(&f, &bks, 1e-10, 1e-300)?;
    let om = crate::manifold::omega(n - 1);
    let v = (om * r.value).max(0.0);
    Ok(Estimate::new(v.sqrt(), (om * r.error).sqrt()))
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionReport {
    pub d: usize,
    pub epsilon: Vec<Vec<f64>>,
    pub epsilon_gauged: Vec<Vec<f64>>,
    pub q: Vec<Vec<Estimate>>,
    pub l: Vec<Vec<Estimate>>,
    /// |L_ij - L_ji| / mean before symmetrization.
    pub l_asymmetry: Vec<Vec<f64>>,
    pub self_interaction: Vec<Estimate>,
    pub nonlinear_gap: Vec<Estimate>,
    pub q_over_eps: Vec<Vec<f64>>,
    pub l_minus_q_rel: Vec<Vec<f64>>,
    pub failures: Vec<String>,
}

fn nan() -> Estimate {
    Estimate::new(f64::NAN, f64::NAN)
}

/// All pairwise and diagonal interaction quantities of a configuration.
pub fn interactions(cfg: &Configuration, opts: IntegrateOptions) -> InteractionReport {
    let d = cfg.len();
    let bs = &cfg.bubbles;
    let mut failures = Vec::new();
    let mut rec = |label: String, r: Result<Estimate>| match r {
        Ok(e) => e,
        Err(e) => {
            failures.push(format!("{label}: {e}"));
            nan()
        }
    };
    let mut eps = vec![vec![0.0; d]; d];
    let mut eps_g = vec![vec![0.0; d]; d];
    let mut q = vec![vec![nan(); d]; d];
    let mut l = vec![vec![nan(); d]; d];
    let mut asym = vec![vec![0.0; d]; d];
    let mut qe = vec![vec![f64::NAN; d]; d];
    let mut lq = vec![vec![f64::NAN; d]; d];
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            eps[i][j] = if j > i { epsilon(&bs[i], &bs[j]) } else { eps[j][i] };
            eps_g[i][j] = epsilon_gauged(&bs[i], &bs[j]);
            q[i][j] = rec(format!("Q[{i}][{j}]"), q_interaction(&bs[i], &bs[j], opts));
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            let a = rec(format!("L[{i}][{j}]"), l_interaction(&bs[i], &bs[j], opts));
            let b = rec(format!("L[{j}][{i}]"), l_interaction(&bs[j], &bs[i], opts));
            let mean = Estimate::new(0.5 * (a.value + b.value), 0.5 * (a.error + b.error) + 0.5 * (a.value - b.value).abs());
            asym[i][j] = (a.value - b.value).abs() / mean.value.abs();
            asym[j][i] = asym[i][j];
            l[i][j] = mean;
            l[j][i] = mean;
        }
    }
    for i in 0..d {
        for j in 0..d {
            if i != j {
                qe[i][j] = q[i][j].value / eps[i][j];
                lq[i][j] = (l[i][j].value - q[i][j].value).abs() / q[i][j].value;
            }
        }
    }
    let self_i = (0..d).map(|i| rec(format!("self[{i}]"), self_interaction(&bs[i], opts))).collect();
    let gap_i = (0..d).map(|i| rec(format!("gap[{i}]"), nonlinear_gap(&bs[i], opts))).collect();
    InteractionReport {
        d,
        epsilon: eps,
        epsilon_gauged: eps_g,
        q,
        l,
        l_asymmetry: asym,
        self_interaction: self_i,
        nonlinear_gap: gap_i,
        q_over_eps: qe,
        l_minus_q_rel: lq,
        failures,
    }
}
