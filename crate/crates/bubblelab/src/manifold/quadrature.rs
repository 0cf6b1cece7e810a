//! One-dimensional Gauss–Legendre building blocks and reproducible reductions.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use crate::error::{LabError, Result};

/// A quadrature value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate::new(self.value * c, self.error * c.abs())
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate::new(self.value + o.value, self.error + o.error)
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate::new(self.value - o.value, self.error + o.error)
    }
}

const MAX_ORDER: usize = 128;

/// Nodes and weights of the `q`-point Gauss–Legendre rule on [-1, 1], cached.
pub fn gl_rule(q: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<OnceLock<Vec<(f64, f64)>>>> = OnceLock::new();
    assert!((1..=MAX_ORDER).contains(&q), "Gauss-Legendre order out of range");
    let table = RULES.get_or_init(|| (0..=MAX_ORDER).map(|_| OnceLock::new()).collect());
    table[q].get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(q).unwrap());
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pairs
    })
}

/// Gauss–Legendre nodes and weights mapped to [a, b].
pub fn gl_on(q: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    gl_rule(q).iter().map(move |&(x, w)| (m + h * x, h * w))
}

/// Fixed-order pairwise summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, q: usize) -> f64 {
    let vals: Vec<f64> = gl_on(q, a, b).map(|(x, w)| w * f(x)).collect();
    pairwise_sum(&vals)
}

/// Composite rule over the given breakpoints with a fixed order per panel.
pub fn composite_gl<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], q: usize) -> f64 {
    let parts: Vec<f64> = breaks
        .windows(2)
        .map(|w| gl_panel(f, w[0], w[1], q))
        .collect();
    pairwise_sum(&parts)
}

/// Adaptive bisection Gauss–Legendre integration over each panel of `breaks`.
///
/// A panel is accepted when the single-panel value agrees with the sum over its
/// two halves to within the local share of the tolerance.
pub fn adaptive_gl<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    const Q: usize = 15;
    const MAX_DEPTH: usize = 48;
    const MAX_PANELS: usize = 200_000;

    let coarse: Vec<f64> = breaks.windows(2).map(|w| gl_panel(f, w[0], w[1], Q)).collect();
    let scale = coarse.iter().map(|v| v.abs()).sum::<f64>().max(abs_tol);
    let total_len = (breaks[breaks.len() - 1] - breaks[0]).abs();

    let mut accepted: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut stack: Vec<(f64, f64, f64, usize)> = breaks
        .windows(2)
        .zip(coarse.iter())
        .map(|(w, &v)| (w[0], w[1], v, 0))
        .rev()
        .collect();
    let mut converged = true;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = gl_panel(f, a, m, Q);
        let right = gl_panel(f, m, b, Q);
        let refined = left + right;
        let err = (refined - whole).abs();
        let share = ((b - a).abs() / total_len).max(1e-3);
        let allowed = (rel_tol * scale).max(abs_tol) * share;
        if err <= allowed || depth >= MAX_DEPTH || accepted.len() + stack.len() > MAX_PANELS {
            if err > allowed {
                converged = false;
            }
            accepted.push((a, b, refined, err));
        } else {
            stack.push((m, b, right, depth + 1));
            stack.push((a, m, left, depth + 1));
        }
    }
    accepted.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let vals: Vec<f64> = accepted.iter().map(|p| p.2).collect();
    let errs: Vec<f64> = accepted.iter().map(|p| p.3).collect();
    let est = Estimate::new(pairwise_sum(&vals), pairwise_sum(&errs));
    if !converged && est.error > (rel_tol * est.value.abs()).max(abs_tol) {
        return Err(LabError::QuadratureNonConvergence {
            value: est.value,
            achieved: est.error,
            requested: rel_tol,
        });
    }
    Ok(est)
}

/// Geometric breakpoints from 0 clustered toward the origin, with first width `h0`.
pub fn graded_breaks(h0: f64, ratio: f64, end: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut x = h0.min(end);
    while x < end {
        b.push(x);
        x *= ratio;
    }
    b.push(end);
    for &e in extra {
        if e > 0.0 && e < end {
            b.push(e);
        }
    }
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * end.max(1.0));
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let v: f64 = gl_on(6, 0.0, 2.0).map(|(x, w)| w * x.powi(11)).sum();
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-11);
    }

    #[test]
    fn weights_sum_to_length() {
        for q in [1, 2, 7, 20, 64] {
            let s: f64 = gl_rule(q).iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-13, "q = {q}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let f = |x: f64| x.ln();
        let r = adaptive_gl(&f, &[0.0, 1.0], 1e-10, 1e-14).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{:?}", r);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
    }

    #[test]
    fn graded_breaks_are_sorted_and_bounded() {
        let b = graded_breaks(1e-3, 2.0, 2.0, &[0.3, 0.6]);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 2.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.contains(&0.3) && b.contains(&0.6));
    }
}
