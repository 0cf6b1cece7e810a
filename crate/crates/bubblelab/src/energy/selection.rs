//! Numerical selection map: the best approximation of a field by a weighted sum of
//! d bubbles in the energy norm.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::interactions::epsilon;
use crate::bubbles::{Bubble, BubbleSpec, Configuration};
use crate::error::{LabError, Result};
use crate::manifold::integrate::angular_nodes;
use crate::manifold::quadrature::{gl_on, graded_breaks};
use crate::manifold::{complete_frame, gram_schmidt, Field, ManifoldModel, PointOnM};
use crate::operators::GjmsConstants;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionOptions {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub budget: usize,
    pub seed: u64,
    pub delta: f64,
    /// Upper bound for every ε_ij in the admissible region.
    pub eps_hat: f64,
    pub max_weight_ratio: f64,
    /// ε of the neighbourhood 𝒱(d, ε) used for the membership verdict.
    pub membership_eps: f64,
    pub radial_order: usize,
    pub angular_order: usize,
    /// ‖f‖² in the energy norm, when known; enables the distance report.
    pub field_energy_sq: Option<f64>,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            restarts: 8,
            budget: 2000,
            seed: 0,
            delta: 0.3,
            eps_hat: 0.05,
            max_weight_ratio: 2.0,
            membership_eps: 0.05,
            radial_order: 12,
            angular_order: 20,
            field_energy_sq: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub weights: Vec<f64>,
    pub centers: Vec<PointOnM>,
    pub scales: Vec<f64>,
    /// ‖f - Σ aᵢVᵢ‖ in the energy norm (needs ‖f‖²).
    pub distance: Option<f64>,
    /// -2⟨f, v⟩ + ⟨v, v⟩ at the optimum, without penalties.
    pub objective: f64,
    pub penalty: f64,
    pub epsilon_sum: f64,
    pub in_neighbourhood: Option<bool>,
    pub converged: bool,
    pub degenerate: bool,
    pub evaluations: usize,
}

/// A weighted sum of bubbles viewed as a field.
pub struct BubbleSumField {
    pub config: Configuration,
}

impl Field for BubbleSumField {
    fn eval(&self, x: &[f64]) -> f64 {
        self.config.value(x)
    }
    fn directions(&self) -> Option<Vec<Vec<f64>>> {
        Some(self.config.bubbles.iter().map(|b| b.spec.center.coords.clone()).collect())
    }
}

/// Field interpolated from samples: a Gaussian partition-of-unity over the K nearest
/// samples in geodesic distance, with width half the distance to the K-th neighbour.
pub struct SampledField {
    pub model: ManifoldModel,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub neighbours: usize,
}

impl SampledField {
    pub fn new(model: ManifoldModel, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(LabError::InvalidParameter("samples and values must be nonempty and of equal length".into()));
        }
        for p in &points {
            model.point(p)?;
        }
        Ok(SampledField { model, points, values, neighbours: 8 })
    }
}

impl Field for SampledField {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (self.model.geodesic_distance(x, p), i))
            .collect();
        let k = self.neighbours.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.0.partial_cmp(&b.0).unwrap());
        let near = &d[..k];
        if let Some(&(dist, i)) = near.iter().find(|p| p.0 == 0.0) {
            let _ = dist;
            return self.values[i];
        }
        let h = 0.5 * near.iter().map(|p| p.0).fold(0.0, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for &(dist, i) in near {
            let w = (-(dist / h).powi(2)).exp();
            num += w * self.values[i];
            den += w;
        }
        num / den
    }
}

struct NmResult {
    x: Vec<f64>,
    fx: f64,
    evals: usize,
    converged: bool,
}

/// Nelder–Mead simplex descent with standard coefficients.
fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], steps: &[f64], budget: usize) -> NmResult {
    let m = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..m {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut fs: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = m + 1;
    let mut converged = false;
    while evals < budget {
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();
        let spread = fs[m] - fs[0];
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread <= 1e-15 * fs[0].abs() + 1e-300 && size < 1e-9) || size < 1e-13 {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..m).map(|k| simplex[..m].iter().map(|v| v[k]).sum::<f64>() / m as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[m]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < fs[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[m] = xe;
                fs[m] = fe;
            } else {
                simplex[m] = xr;
                fs[m] = fr;
            }
        } else if fr < fs[m - 1] {
            simplex[m] = xr;
            fs[m] = fr;
        } else {
            let (xc, fc) = if fr < fs[m] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < fs[m].min(fr) {
                simplex[m] = xc;
                fs[m] = fc;
            } else {
                for i in 1..=m {
                    let v: Vec<f64> = simplex[i].iter().zip(&simplex[0]).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    fs[i] = f(&v);
                    simplex[i] = v;
                }
                evals += m;
            }
        }
    }
    let best = (0..=m).min_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap_or(std::cmp::Ordering::Equal)).unwrap();
    NmResult { x: simplex[best].clone(), fx: fs[best], evals, converged }
}

/// Parameters of one candidate bubble.
#[derive(Debug, Clone)]
struct Cand {
    center: Vec<f64>,
    mu: f64,
    a: f64,
}

struct Problem<'a> {
    model: ManifoldModel,
    c: Arc<GjmsConstants>,
    field: &'a dyn Field,
    basis: Vec<Vec<f64>>,
    opts: SelectionOptions,
    mu_max: f64,
}

impl Problem<'_> {
    fn bubbles(&self, cands: &[Cand]) -> Result<Vec<Bubble>> {
        cands
            .iter()
            .map(|cd| {
                let p = PointOnM { coords: cd.center.clone() };
                Bubble::new(self.model, self.c.clone(), BubbleSpec::new(p, cd.mu, self.opts.delta).with_weight(cd.a))
            })
            .collect()
    }

    /// Σ aᵢ ∫ (v - 2f) P_g Vᵢ over the flat 2δ-ball of each candidate.
    fn inner(&self, bs: &[Bubble]) -> f64 {
        let n = self.model.n;
        let delta = self.opts.delta;
        let mut total = 0.0;
        for b in bs {
            let xi = &b.spec.center.coords;
            let vis = gram_schmidt(xi, &self.basis, 1e-10);
            let j = vis.len();
            let frame = complete_frame(xi, vis);
            let (vis_opt, m) = if j >= n { (None, 6) } else if j >= 3 { (Some(j), 8) } else { (Some(j), self.opts.angular_order) };
            let ang = angular_nodes(n, &frame, vis_opt, m, 2 * m);
            let neck: Vec<f64> = (0..8).map(|i| delta * (1.0 + i as f64 / 8.0)).collect();
            let breaks = graded_breaks((b.core_scale() / 4.0).min(delta / 4.0), 2.0, 2.0 * delta, &neck);
            let mut acc = 0.0;
            for w in breaks.windows(2) {
                for (rho, wr) in gl_on(self.opts.radial_order, w[0], w[1]) {
                    let kr = wr * rho.powi(n as i32 - 1) * b.polyharmonic_tilde(rho) / b.chart.lambda_of_rho(rho);
                    if kr == 0.0 {
                        continue;
                    }
                    let s = 0.25 * rho * rho;
                    let mut x = vec![0.0; n + 1];
                    let mut ang_sum = 0.0;
                    for (theta, wa) in &ang {
                        for ((xk, pk), tk) in x.iter_mut().zip(xi).zip(theta) {
                            *xk = ((1.0 - s) * pk + rho * tk) / (1.0 + s);
                        }
                        let v: f64 = bs.iter().map(|bb| bb.spec.weight * bb.value(&x)).sum();
                        ang_sum += wa * (v - 2.0 * self.field.eval(&x));
                    }
                    acc += kr * ang_sum;
                }
            }
            total += b.spec.weight * acc;
        }
        total
    }

    fn penalty(&self, bs: &[Bubble]) -> f64 {
        let mut p = 0.0;
        let w: Vec<f64> = bs.iter().map(|b| b.spec.weight).collect();
        let wmax = w.iter().cloned().fold(f64::MIN, f64::max);
        let wmin = w.iter().cloned().fold(f64::MAX, f64::min);
        p += ((wmax / wmin).ln() - self.opts.max_weight_ratio.ln()).max(0.0).powi(2);
        for i in 0..bs.len() {
            for j in i + 1..bs.len() {
                p += (epsilon(&bs[i], &bs[j]) / self.opts.eps_hat - 1.0).max(0.0).powi(2);
            }
            p += (bs[i].spec.mu / self.mu_max).ln().max(0.0).powi(2);
            p += (1e-6 / bs[i].spec.mu).ln().max(0.0).powi(2);
        }
        p
    }
}

/// Orthonormal basis of the subspace spanned by `dirs` (all of R^{n+1} if none).
fn subspace_basis(dim: usize, dirs: Option<Vec<Vec<f64>>>) -> Vec<Vec<f64>> {
    let dirs = dirs.unwrap_or_else(|| {
        (0..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect()
    });
    let zero = vec![0.0; dim];
    gram_schmidt(&zero, &dirs, 1e-10)
}

fn exp_map(base: &[f64], tangent: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; base.len()];
    for (ti, e) in t.iter().zip(tangent) {
        v.iter_mut().zip(e).for_each(|(a, b)| *a += ti * b);
    }
    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if r == 0.0 {
        return base.to_vec();
    }
    base.iter().zip(&v).map(|(b, vi)| r.cos() * b + r.sin() / r * vi).collect()
}

/// Greedy peak detection for the initial guess.
fn initial_guess(pb: &Problem, d: usize, rng: &mut ChaCha8Rng) -> Vec<Cand> {
    let dim = pb.model.n + 1;
    let s = pb.basis.len();
    let samples: Vec<Vec<f64>> = if s == 2 {
        (0..4000)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 4000.0;
                (0..dim).map(|k| t.cos() * pb.basis[0][k] + t.sin() * pb.basis[1][k]).collect()
            })
            .collect()
    } else {
        (0..20000)
            .map(|_| {
                let mut v = vec![0.0; dim];
                for e in &pb.basis {
                    let g: f64 = rng.gen_range(-1.0..1.0);
                    v.iter_mut().zip(e).for_each(|(a, b)| *a += g * b);
                }
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= nv);
                v
            })
            .collect()
    };
    let c = &pb.c;
    let alpha = c.half_gap();
    let mut found: Vec<Cand> = Vec::new();
    let residual = |x: &[f64], found: &[Cand]| -> f64 {
        let bs = pb.bubbles(found).unwrap_or_default();
        pb.field.eval(x) - bs.iter().map(|b| b.spec.weight * b.value(x)).sum::<f64>()
    };
    for _ in 0..d {
        let vals: Vec<f64> = samples.iter().map(|x| residual(x, &found)).collect();
        let (imax, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let mut xi = samples[imax].clone();
        // Coordinate ascent inside the subspace.
        let mut step = if s == 2 { 2.0 * std::f64::consts::PI / 4000.0 } else { 0.05 };
        let mut fx = residual(&xi, &found);
        while step > 1e-8 {
            let tangent = gram_schmidt(&xi, &pb.basis, 1e-10);
            let mut improved = false;
            for e in &tangent {
                for sg in [1.0, -1.0] {
                    let cand = exp_map(&xi, std::slice::from_ref(e), &[sg * step]);
                    let fc = residual(&cand, &found);
                    if fc > fx {
                        fx = fc;
                        xi = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let tangent = gram_schmidt(&xi, &pb.basis, 1e-10);
        let mut mu = None;
        if fx > 0.0 && !tangent.is_empty() {
            let mut r = 1e-4;
            while r < pb.opts.delta {
                let y = exp_map(&xi, &tangent[..1], &[r]);
                let fr = residual(&y, &found);
                if fr > 0.0 && fr < 0.5 * fx {
                    let rho = 2.0 * (0.5 * r).tan();
                    let q = (fx / fr).powf(1.0 / alpha) - 1.0;
                    if q > 0.0 {
                        mu = Some((rho * rho / (c.c_nk * q)).sqrt());
                    }
                    break;
                }
                r *= 1.5;
            }
        }
        let cand = match mu {
            Some(mu) => Cand { center: xi, mu: mu.min(pb.mu_max * 0.9), a: fx * mu.powf(alpha) },
            None => {
                let prev = found.last().cloned().unwrap_or(Cand { center: xi.clone(), mu: 0.01, a: 1.0 });
                Cand { center: xi, mu: prev.mu, a: prev.a * 0.5 }
            }
        };
        found.push(cand);
    }
    found
}

/// Best approximation of `field` by Σ aᵢV_{ξᵢ,μᵢ} with d bubbles.
pub fn select_parameters(
    field: &dyn Field,
    d: usize,
    model: &ManifoldModel,
    constants: &GjmsConstants,
    opts: &SelectionOptions,
) -> Result<SelectionResult> {
    if d == 0 {
        return Err(LabError::InvalidParameter("d must be at least 1".into()));
    }
    model.check_order(constants.k)?;
    if opts.restarts == 0 || opts.budget < 10 {
        return Err(LabError::InvalidParameter("need at least one restart and a budget of 10".into()));
    }
    let dim = model.n + 1;
    let basis = subspace_basis(dim, field.directions());
    if basis.len() < 2 {
        return Err(LabError::InvalidParameter("field directions must span at least a circle".into()));
    }
    let c = Arc::new(constants.clone());
    let mu_max = 0.5 * opts.delta / c.c_nk.sqrt();
    let pb = Problem { model: *model, c: c.clone(), field, basis, opts: opts.clone(), mu_max };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = initial_guess(&pb, d, &mut rng);
    let s = pb.basis.len();
    let per = s - 1 + 2;
    let ref_scale = {
        let bs = pb.bubbles(&best)?;
        pb.inner(&bs).abs().max(1e-300)
    };
    let eval_cands = |cands: &[Cand]| -> (f64, f64) {
        match pb.bubbles(cands) {
            Ok(bs) => (pb.inner(&bs), pb.penalty(&bs)),
            Err(_) => (f64::INFINITY, f64::INFINITY),
        }
    };
    let (o0, p0) = eval_cands(&best);
    let mut best_val = o0 + 10.0 * ref_scale * p0;
    let mut evaluations = 0;
    let mut converged = false;
    for restart in 0..opts.restarts {
        let bases: Vec<(Vec<f64>, Vec<Vec<f64>>)> = best
            .iter()
            .map(|cd| (cd.center.clone(), gram_schmidt(&cd.center, &pb.basis, 1e-10)))
            .collect();
        let decode = |th: &[f64]| -> Vec<Cand> {
            (0..d)
                .map(|i| {
                    let p = &th[i * per..(i + 1) * per];
                    let (b, t) = &bases[i];
                    Cand { center: exp_map(b, t, &p[..s - 1]), mu: p[s - 1].exp(), a: p[s].exp() }
                })
                .collect()
        };
        let mut x0 = vec![0.0; d * per];
        let mut steps = vec![0.0; d * per];
        let shrink = 0.5f64.powi(restart as i32);
        for (i, cd) in best.iter().enumerate() {
            x0[i * per + s - 1] = cd.mu.ln();
            x0[i * per + s] = cd.a.ln();
            for t in 0..s - 1 {
                steps[i * per + t] = 0.5 * cd.mu * c.c_nk.sqrt() * shrink;
            }
            steps[i * per + s - 1] = 0.1 * shrink;
            steps[i * per + s] = 0.1 * shrink;
        }
        if restart > 0 {
            for (x, st) in x0.iter_mut().zip(&steps) {
                *x += 0.1 * st * rng.gen_range(-1.0..1.0);
            }
        }
        let mut obj = |th: &[f64]| -> f64 {
            let (o, p) = eval_cands(&decode(th));
            o + 10.0 * ref_scale * p
        };
        let r = nelder_mead(&mut obj, &x0, &steps, opts.budget);
        evaluations += r.evals;
        converged |= r.converged;
        let cands = decode(&r.x);
        let better = r.fx < best_val
            || (r.fx == best_val && {
                let flat = |cs: &[Cand]| cs.iter().flat_map(|c| c.center.iter().cloned().chain([c.mu, c.a])).collect::<Vec<_>>();
                flat(&cands) < flat(&best)
            });
        if better {
            best_val = r.fx;
            best = cands;
        }
    }
    let bs = pb.bubbles(&best)?;
    let objective = pb.inner(&bs);
    let penalty = pb.penalty(&bs);
    let mut order: Vec<usize> = (0..d).collect();
    let canon: Vec<PointOnM> = best.iter().map(|cd| model.point_normalized(&cd.center)).collect::<Result<_>>()?;
    order.sort_by(|&i, &j| canon[i].coords.partial_cmp(&canon[j].coords).unwrap_or(std::cmp::Ordering::Equal));
    let mut eps_sum = 0.0;
    let mut collapsed = false;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                eps_sum += epsilon(&bs[i], &bs[j]);
                let sep = model.geodesic_distance(&bs[i].spec.center.coords, &bs[j].spec.center.coords);
                if sep < bs[i].core_scale() + bs[j].core_scale() {
                    collapsed = true;
                }
            }
        }
    }
    let distance = opts.field_energy_sq.map(|f2| (f2 + objective).max(0.0).sqrt());
    let in_neighbourhood = distance.map(|dist| {
        dist <= opts.membership_eps && eps_sum <= opts.membership_eps && best.iter().all(|cd| cd.mu < opts.membership_eps)
    });
    let at_bounds = best.iter().any(|cd| cd.mu >= 0.999 * mu_max || cd.mu <= 1.001e-6);
    Ok(SelectionResult {
        weights: order.iter().map(|&i| best[i].a).collect(),
        centers: order.iter().map(|&i| canon[i].clone()).collect(),
        scales: order.iter().map(|&i| best[i].mu).collect(),
        distance,
        objective,
        penalty,
        epsilon_sum: eps_sum,
        in_neighbourhood,
        converged,
        degenerate: penalty > 0.0 || collapsed || at_bounds,
        evaluations,
    })
}

/// ‖Σ aᵢVᵢ‖² in the energy norm, assembled as Σ aᵢaⱼ L_ij with the same ball rule
/// the selection objective uses.
pub fn bubble_sum_energy_sq(cfg: &Configuration, opts: &SelectionOptions) -> Result<f64> {
    let field = BubbleSumField { config: cfg.clone() };
    let basis = subspace_basis(cfg.model.n + 1, field.directions());
    let pb = Problem {
        model: cfg.model,
        c: cfg.constants.clone(),
        field: &field,
        basis,
        opts: SelectionOptions { delta: cfg.bubbles[0].spec.delta, ..opts.clone() },
        mu_max: 1.0,
    };
    // inner = Σ aᵢ∫(v - 2f)PVᵢ = -‖v‖² when f = v.
    Ok(-pb.inner(&cfg.bubbles))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_minimizes_rosenbrock() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(&mut f, &[-1.2, 1.0], &[0.5, 0.5], 5000);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn exp_map_stays_on_sphere() {
        let b = vec![1.0, 0.0, 0.0];
        let t = vec![vec![0.0, 1.0, 0.0]];
        let x = exp_map(&b, &t, &[0.3]);
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((x[1] - 0.3f64.sin()).abs() < 1e-15);
    }
}
