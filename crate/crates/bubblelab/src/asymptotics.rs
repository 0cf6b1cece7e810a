//! Parameter sweeps and log-log exponent fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::manifold::Estimate;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub quantity: String,
    pub parameter: String,
    pub values: Vec<f64>,
    pub measured: Vec<f64>,
    pub errors: Vec<f64>,
    /// Per-point failure messages; `None` where the point succeeded.
    pub failures: Vec<Option<String>>,
    pub template: serde_json::Value,
}

impl SweepResult {
    /// Indices of the points that produced a finite measurement.
    pub fn ok_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.failures[i].is_none() && self.measured[i].is_finite()).collect()
    }

    pub fn csv_rows(&self) -> Vec<(f64, f64, f64, String)> {
        (0..self.values.len())
            .map(|i| (self.values[i], self.measured[i], self.errors[i], self.quantity.clone()))
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["parameter", "value", "error_estimate", "quantity_id"])?;
        for (p, v, e, q) in self.csv_rows() {
            wr.write_record([format!("{p:e}"), format!("{v:e}"), format!("{e:e}"), q])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// Evaluates `f` at each parameter value. Failures are recorded and the sweep continues.
pub fn run_sweep<F>(
    quantity: &str,
    parameter: &str,
    values: &[f64],
    template: serde_json::Value,
    f: F,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<Estimate> + Sync,
{
    if values.len() < 5 {
        return Err(LabError::InvalidParameter(format!("a sweep needs at least 5 points, got {}", values.len())));
    }
    let inc = values.windows(2).all(|w| w[1] > w[0]);
    let dec = values.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(LabError::InvalidParameter("sweep values must be strictly monotone".into()));
    }
    let out: Vec<(f64, f64, Option<String>)> = values
        .par_iter()
        .map(|&v| match f(v) {
            Ok(e) if e.value.is_finite() => (e.value, e.error, None),
            Ok(e) => (f64::NAN, f64::NAN, Some(format!("non-finite value {}", e.value))),
            Err(LabError::QuadratureNonConvergence { value, achieved, requested }) => (
                f64::NAN,
                achieved,
                Some(format!("quadrature did not converge: value {value:e}, error {achieved:e}, requested {requested:e}")),
            ),
            Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
        })
        .collect();
    Ok(SweepResult {
        quantity: quantity.to_string(),
        parameter: parameter.to_string(),
        values: values.to_vec(),
        measured: out.iter().map(|o| o.0).collect(),
        errors: out.iter().map(|o| o.1).collect(),
        failures: out.into_iter().map(|o| o.2).collect(),
        template,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FitWindow {
    /// Drops the two largest-parameter points and the smallest-parameter point.
    Default,
    All,
    /// Keeps points whose parameter lies in [lo, hi].
    Range(f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub window: FitWindow,
    /// Fit against these abscissae instead of the sweep parameter.
    pub abscissa: Option<Vec<f64>>,
    /// Nominal values for the bounded-ratio verdict.
    pub nominal: Option<Vec<f64>>,
    pub ratio_threshold: f64,
    pub slope_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { window: FitWindow::Default, abscissa: None, nominal: None, ratio_threshold: 10.0, slope_tol: 0.15 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Sweep indices used by the fit.
    pub window: Vec<usize>,
    pub log_flag: bool,
    /// R² of the power×log(1/x) model, when defined.
    pub r2_log: Option<f64>,
    /// max/min of measured/nominal over the window.
    pub ratio: Option<f64>,
    pub bounded: Option<bool>,
    pub slope_tol: f64,
}

impl ExponentFit {
    pub fn slope_matches(&self, expected: f64) -> bool {
        (self.slope - expected).abs() <= self.slope_tol
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    ssr: f64,
    sst: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let sst = y.iter().map(|b| (b - my) * (b - my)).sum();
    Line { slope, intercept, ssr, sst }
}

fn r2(l: &Line) -> f64 {
    if l.sst <= 1e-28 * (1.0 + l.intercept * l.intercept) {
        1.0
    } else {
        1.0 - l.ssr / l.sst
    }
}

/// Residual curvature: fraction of the residual sum of squares removed by a quadratic
/// term in log x.
fn curvature_share(x: &[f64], res: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let q: Vec<f64> = x.iter().map(|a| (a - mx).powi(2)).collect();
    let l = least_squares(&q, res);
    let tot: f64 = res.iter().map(|r| r * r).sum();
    if tot == 0.0 {
        0.0
    } else {
        1.0 - l.ssr / tot
    }
}

/// Least-squares fit of log y against log x on a window of the sweep.
pub fn fit_exponent(sweep: &SweepResult, opts: &FitOptions) -> Result<ExponentFit> {
    let xs = opts.abscissa.clone().unwrap_or_else(|| sweep.values.clone());
    if xs.len() != sweep.values.len() {
        return Err(LabError::InvalidParameter("abscissa length differs from the sweep".into()));
    }
    let mut order: Vec<usize> = (0..sweep.values.len()).collect();
    order.sort_by(|&a, &b| sweep.values[a].partial_cmp(&sweep.values[b]).unwrap());
    let window: Vec<usize> = match opts.window {
        FitWindow::All => order.clone(),
        FitWindow::Default => {
            if order.len() < 3 {
                vec![]
            } else {
                order[1..order.len() - 2].to_vec()
            }
        }
        FitWindow::Range(lo, hi) => order.iter().cloned().filter(|&i| sweep.values[i] >= lo && sweep.values[i] <= hi).collect(),
    };
    let mut window: Vec<usize> = window.into_iter().filter(|&i| sweep.failures[i].is_none()).collect();
    window.sort_unstable();
    if window.len() < 4 {
        return Err(LabError::InvalidParameter(format!("fit window holds {} usable points, need 4", window.len())));
    }
    for &i in &window {
        if !(sweep.measured[i] > 0.0) || !(xs[i] > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "nonpositive value in fit window at {} = {:e}: measured {:e}",
                sweep.parameter, sweep.values[i], sweep.measured[i]
            )));
        }
    }
    let lx: Vec<f64> = window.iter().map(|&i| xs[i].ln()).collect();
    let ly: Vec<f64> = window.iter().map(|&i| sweep.measured[i].ln()).collect();
    let pow = least_squares(&lx, &ly);
    let r2_pow = r2(&pow);
    let (r2_log, log_flag) = if window.iter().all(|&i| xs[i] < 1.0) {
        let ly2: Vec<f64> = window.iter().zip(&ly).map(|(&i, y)| y - (-xs[i].ln()).ln()).collect();
        let lg = least_squares(&lx, &ly2);
        // Improvement measured against the residual variance the power fit leaves.
        let res: Vec<f64> = lx.iter().zip(&ly).map(|(a, b)| b - pow.intercept - pow.slope * a).collect();
        let structured = curvature_share(&lx, &res) > 0.5;
        let scale = pow.sst.max(1e-300);
        let gain = if pow.ssr > 1e-20 * scale { (pow.ssr - lg.ssr) / pow.ssr } else { 0.0 };
        let r2l = if pow.sst > 0.0 { 1.0 - lg.ssr / pow.sst } else { 1.0 };
        (Some(r2l), structured && gain > 0.05)
    } else {
        (None, false)
    };
    let ratio = match &opts.nominal {
        Some(nom) => {
            if nom.len() != sweep.values.len() {
                return Err(LabError::InvalidParameter("nominal length differs from the sweep".into()));
            }
            let r: Vec<f64> = window.iter().map(|&i| sweep.measured[i] / nom[i]).collect();
            if r.iter().any(|v| !(*v > 0.0)) {
                return Err(LabError::InvalidParameter("nonpositive measured/nominal ratio".into()));
            }
            let mx = r.iter().cloned().fold(f64::MIN, f64::max);
            let mn = r.iter().cloned().fold(f64::MAX, f64::min);
            Some(mx / mn)
        }
        None => None,
    };
    Ok(ExponentFit {
        slope: pow.slope,
        intercept: pow.intercept,
        r2: r2_pow,
        window,
        log_flag,
        r2_log,
        ratio,
        bounded: ratio.map(|r| r < opts.ratio_threshold),
        slope_tol: opts.slope_tol,
    })
}
