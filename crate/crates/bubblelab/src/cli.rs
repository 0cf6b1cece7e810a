//! Command-line front end. Every command writes a JSON report (and CSV tables where
//! there are rows) into the output directory and prints the JSON report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{fit_exponent, log_spaced, run_sweep, FitOptions, SweepResult};
use crate::bubbles::{core_residual_fd, residual_profile, BoundVariant, Bubble, BubbleSpec, Configuration};
use crate::energy::{
    default_mu_grid, energy_of_configuration, find_d_star, interactions, nonlinear_gap, repulsion_layout,
    select_parameters, self_interaction, SampledField, SelectionOptions,
};
use crate::error::{LabError, Result};
use crate::homology::{
    barycenter_complex, relative_homology, triangulate_model, BarycenterComplexPair, ChainComplexGF2, TriangulatedKind,
};
use crate::manifold::{make_model, IntegrateOptions, ModelKind, PointOnM};
use crate::operators::{gjms_constants, FdOptions, GjmsConstants};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "BUBBLELAB_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bubblelab", version, about = "Numerical laboratory for GJMS bubbles on model spheres")]
struct Cli {
    /// Output directory (default: $BUBBLELAB_OUT_DIR, else ./bubblelab-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    #[arg(long, default_value = "sphere")]
    model: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scalar constants for (n, k).
    Constants {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Pointwise residual of one bubble against its bound.
    Residual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        mu: f64,
        #[arg(long, default_value = "lcf")]
        variant: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Interaction matrices of a configuration of equal bubbles.
    Interactions {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        mu: f64,
        /// Explicit centers as `x0,x1,...;y0,y1,...`; default is a repulsion layout.
        #[arg(long)]
        centers: Option<String>,
    },
    /// A μ-sweep of one quantity with its exponent fit.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// residual-ratio | self-interaction | nonlinear-gap | energy-gap
        #[arg(long)]
        quantity: String,
        #[arg(long, default_value_t = 1e-4)]
        mu_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        mu_max: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        /// Fail with exit 4 unless the fitted slope matches.
        #[arg(long)]
        expect_slope: Option<f64>,
    },
    /// Sum-energy table over d and μ, and the least d with a strict margin.
    EnergyScan {
        #[command(flatten)]
        common: Common,
        /// Range `a..b` (inclusive) or a single value.
        #[arg(long, default_value = "2..5")]
        d: String,
        /// Comma-separated μ values; default is 9 log-spaced values in [1e-3, 1e-1].
        #[arg(long)]
        mu_grid: Option<String>,
    },
    /// Selection map for a field given as CSV samples.
    Select {
        #[command(flatten)]
        common: Common,
        /// CSV with columns x0..xn, value.
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// ‖f‖² in the energy norm, enabling the distance and 𝒱(d, ε) verdict.
        #[arg(long)]
        field_energy_sq: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Z₂ Betti numbers of ℬ_d(M).
    Homology {
        #[arg(long, default_value = "circle")]
        model: String,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
}

struct Outcome {
    code: i32,
    report: Value,
}

fn out_dir(cli: &Option<PathBuf>) -> PathBuf {
    cli.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bubblelab-out"))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(v)? + "\n")?;
    Ok(())
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
    let mut h: Vec<&str> = vec!["schema_version"];
    h.extend_from_slice(header);
    w.write_record(&h)?;
    for r in rows {
        let mut rec = vec![SCHEMA_VERSION.to_string()];
        rec.extend(r.iter().cloned());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

fn exit_code_of(e: &LabError) -> i32 {
    match e {
        LabError::QuadratureNonConvergence { .. }
        | LabError::StepAdaptation { .. }
        | LabError::OptimizerNonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn setup(c: &Common) -> Result<(crate::manifold::ManifoldModel, GjmsConstants, IntegrateOptions)> {
    let kind: ModelKind = c.model.parse()?;
    let model = make_model(kind, c.n)?;
    let constants = gjms_constants(c.n, c.k)?;
    model.check_order(c.k)?;
    if !(c.delta > 0.0 && c.delta < 1.0) {
        return Err(LabError::InvalidParameter(format!("δ must lie in (0, 1), got {}", c.delta)));
    }
    if !(1e-12..=1e-2).contains(&c.rel_tol) {
        return Err(LabError::InvalidParameter(format!("rel_tol must lie in [1e-12, 1e-2], got {}", c.rel_tol)));
    }
    Ok((model, constants, IntegrateOptions::with_tol(c.rel_tol)))
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(LabError::InvalidParameter(format!("μ must lie in (0, 1), got {mu}")));
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || LabError::InvalidParameter(format!("bad range '{s}', expected a..b or a single value"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b || a == 0 {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| LabError::InvalidParameter(format!("bad number '{v}'"))))
        .collect()
}

fn cmd_constants(n: usize, k: usize) -> Result<Outcome> {
    let c = gjms_constants(n, k)?;
    let report = json!({
        "n": n,
        "k": k,
        "two_star": c.two_star,
        "c": c.c_nk,
        "b": c.b_nk,
        "gamma": c.gamma,
        "omega_n_minus_1": c.omega_n_minus_1,
        "Y": c.y_sphere,
        "Y_rayleigh": c.y_rayleigh(),
        "sobolev_constant": c.sobolev_constant,
        "norm_2star_power": c.norm_2star,
        "norm_2star_minus1_power": c.norm_2star_minus1,
    });
    Ok(Outcome { code: EXIT_OK, report })
}

fn cmd_residual(dir: &Path, c: &Common, mu: f64, variant: &str, samples: usize) -> Result<Outcome> {
    let (model, constants, _) = setup(c)?;
    check_mu(mu)?;
    let variant: BoundVariant = variant.parse()?;
    if samples < 2 {
        return Err(LabError::InvalidParameter("need at least 2 samples".into()));
    }
    let b = Bubble::new(model, Arc::new(constants.clone()), BubbleSpec::new(model.basis_point(0), mu, c.delta))?;
    let prof = residual_profile(&b, samples, variant);
    let rows: Vec<Vec<String>> = prof
        .rows
        .iter()
        .map(|r| vec![f(r.distance), f(r.residual), f(r.bound), r.ratio.map(f).unwrap_or_default()])
        .collect();
    write_csv(dir, "residual", &["distance", "residual", "bound", "ratio"], &rows)?;
    let limit = 1e-6 * mu.powf(-(constants.nf() + 2.0 * constants.k as f64) / 2.0);
    let core = core_residual_fd(&b, FdOptions::default());
    let (core_val, code) = match &core {
        Ok(v) if *v <= limit => (Some(*v), EXIT_OK),
        Ok(v) => (Some(*v), EXIT_VERIFICATION),
        Err(e) => (None, exit_code_of(e)),
    };
    let report = json!({
        "config": c,
        "mu": mu,
        "variant": variant,
        "admissibility": b.admissibility(),
        "sup_ratio": prof.sup_ratio,
        "core_residual_fd": core_val,
        "core_limit": limit,
        "core_error": core.err().map(|e| e.to_string()),
        "failing_row": (code == EXIT_VERIFICATION).then_some("core residual above 1e-6·μ^{-(n+2k)/2}"),
    });
    Ok(Outcome { code, report })
}

fn parse_centers(model: &crate::manifold::ManifoldModel, s: &str) -> Result<Vec<PointOnM>> {
    s.split(';').map(|p| model.point_normalized(&parse_list(p)?)).collect()
}

fn cmd_interactions(c: &Common, d: usize, mu: f64, centers: &Option<String>) -> Result<Outcome> {
    let (model, constants, opts) = setup(c)?;
    check_mu(mu)?;
    let pts = match centers {
        Some(s) => parse_centers(&model, s)?,
        None => repulsion_layout(&model, &constants, d)?,
    };
    if pts.len() < 2 {
        return Err(LabError::InvalidParameter("interactions need at least two bubbles".into()));
    }
    let specs = pts.iter().map(|p| BubbleSpec::new(p.clone(), mu, c.delta)).collect();
    let cfg = Configuration::new(model, constants, specs)?;
    let r = interactions(&cfg, opts);
    let code = if r.failures.is_empty() { EXIT_OK } else { EXIT_NONCONVERGENCE };
    Ok(Outcome { code, report: json!({ "config": c, "mu": mu, "centers": pts, "report": r }) })
}

fn cmd_sweep(dir: &Path, c: &Common, quantity: &str, lo: f64, hi: f64, points: usize, expect: Option<f64>) -> Result<Outcome> {
    let (model, constants, opts) = setup(c)?;
    check_mu(lo)?;
    check_mu(hi)?;
    if lo >= hi {
        return Err(LabError::InvalidParameter("mu_min must be below mu_max".into()));
    }
    let mus = log_spaced(lo, hi, points);
    let cs = Arc::new(constants.clone());
    let bubble = |mu: f64| Bubble::new(model, cs.clone(), BubbleSpec::new(model.basis_point(0), mu, c.delta));
    let template = json!({ "model": c.model, "n": c.n, "k": c.k, "delta": c.delta, "center": model.basis_point(0) });
    let sweep: SweepResult = match quantity {
        "residual-ratio" => run_sweep(quantity, "mu", &mus, template, |mu| {
            Ok(crate::manifold::Estimate::exact(residual_profile(&bubble(mu)?, 200, BoundVariant::Lcf).sup_ratio))
        })?,
        "self-interaction" => run_sweep(quantity, "mu", &mus, template, |mu| {
            let e = self_interaction(&bubble(mu)?, opts)?;
            Ok(crate::manifold::Estimate::new(e.value.abs(), e.error))
        })?,
        "nonlinear-gap" => run_sweep(quantity, "mu", &mus, template, |mu| {
            let e = nonlinear_gap(&bubble(mu)?, opts)?;
            Ok(crate::manifold::Estimate::new(e.value.abs(), e.error))
        })?,
        "energy-gap" => run_sweep(quantity, "mu", &mus, template, |mu| {
            let cfg = Configuration::new(model, constants.clone(), vec![BubbleSpec::new(model.basis_point(0), mu, c.delta)])?;
            let r = energy_of_configuration(&cfg, opts)?;
            Ok(crate::manifold::Estimate::new((r.j.value - constants.y_sphere).abs(), r.j.error))
        })?,
        _ => return Err(LabError::InvalidParameter(format!("unknown sweep quantity '{quantity}'"))),
    };
    let rows: Vec<Vec<String>> = sweep.csv_rows().into_iter().map(|(p, v, e, q)| vec![f(p), f(v), f(e), q]).collect();
    write_csv(dir, "sweep", &["parameter", "value", "error_estimate", "quantity_id"], &rows)?;
    let mut fo = FitOptions::default();
    if quantity == "residual-ratio" {
        fo.nominal = Some(vec![1.0; mus.len()]);
    }
    let fit = fit_exponent(&sweep, &fo);
    let mut code = if sweep.failures.iter().any(|f| f.is_some()) { EXIT_NONCONVERGENCE } else { EXIT_OK };
    let mut failing = None;
    if let Ok(fit) = &fit {
        if let Some(s) = expect {
            if !fit.slope_matches(s) {
                code = EXIT_VERIFICATION;
                failing = Some(format!("slope {} differs from {s} by more than {}", fit.slope, fit.slope_tol));
            }
        }
        if fit.bounded == Some(false) {
            code = EXIT_VERIFICATION;
            failing = Some(format!("ratio max/min {} not below {}", fit.ratio.unwrap_or(f64::NAN), fo.ratio_threshold));
        }
    }
    let report = json!({
        "config": c,
        "sweep": sweep,
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        "failing_row": failing,
    });
    Ok(Outcome { code, report })
}

fn cmd_energy_scan(dir: &Path, c: &Common, d: &str, grid: &Option<String>) -> Result<Outcome> {
    let (model, constants, _) = setup(c)?;
    let ds = parse_range(d)?;
    let mus = match grid {
        Some(g) => parse_list(g)?,
        None => default_mu_grid(),
    };
    for &m in &mus {
        check_mu(m)?;
    }
    let opts = IntegrateOptions::with_tol(c.rel_tol.max(1e-4));
    let t = find_d_star(&model, &constants, &ds, &mus, c.delta, opts)?;
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                f(r.mu),
                f(r.j),
                f(r.j_error),
                f(r.threshold_strict),
                f(r.threshold_loose),
                f(r.margin_strict),
                f(r.margin_loose),
                f(r.margin_error),
                r.strict_resolved.to_string(),
                r.loose_holds.to_string(),
                f(r.epsilon_sum),
                r.failure.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        dir,
        "energy_scan",
        &[
            "d",
            "mu",
            "J",
            "J_error",
            "threshold_strict",
            "threshold_loose",
            "margin_strict",
            "margin_loose",
            "margin_error",
            "strict_resolved",
            "loose_holds",
            "epsilon_sum",
            "failure",
        ],
        &rows,
    )?;
    // The loose bound is checked where the core fits inside the cutoff ball.
    let core_fits = |mu: f64| mu * constants.c_nk.sqrt() < c.delta;
    let failing: Vec<Value> = t
        .rows
        .iter()
        .filter(|r| r.failure.is_none() && core_fits(r.mu) && !r.loose_holds)
        .map(|r| json!({ "d": r.d, "mu": r.mu, "J": r.j, "threshold_loose": r.threshold_loose }))
        .collect();
    let code = if !failing.is_empty() {
        EXIT_VERIFICATION
    } else if t.rows.iter().any(|r| r.failure.is_some()) {
        EXIT_NONCONVERGENCE
    } else {
        EXIT_OK
    };
    Ok(Outcome { code, report: json!({ "config": c, "table": t, "failing_rows": failing }) })
}

fn read_field(path: &Path, model: crate::manifold::ManifoldModel) -> Result<SampledField> {
    let mut r = csv::Reader::from_path(path)?;
    let dim = model.n + 1;
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != dim + 1 {
            return Err(LabError::InvalidParameter(format!("field rows need {} columns, got {}", dim + 1, rec.len())));
        }
        let nums: Vec<f64> = rec
            .iter()
            .map(|v| v.trim().parse::<f64>().map_err(|_| LabError::InvalidParameter(format!("bad number '{v}'"))))
            .collect::<Result<_>>()?;
        pts.push(nums[..dim].to_vec());
        vals.push(nums[dim]);
    }
    if vals.iter().any(|v| *v < 0.0) {
        return Err(LabError::InvalidParameter("field must be nonnegative".into()));
    }
    SampledField::new(model, pts, vals)
}

fn cmd_select(c: &Common, field: &Path, d: usize, energy_sq: Option<f64>, eps: f64) -> Result<Outcome> {
    let (model, constants, _) = setup(c)?;
    let fld = read_field(field, model)?;
    let opts = SelectionOptions { seed: c.seed, delta: c.delta, membership_eps: eps, field_energy_sq: energy_sq, ..Default::default() };
    let r = select_parameters(&fld, d, &model, &constants, &opts)?;
    let code = if r.converged { EXIT_OK } else { EXIT_NONCONVERGENCE };
    Ok(Outcome { code, report: json!({ "config": c, "d": d, "interpolation": "gaussian-partition-of-unity-8-nearest", "result": r }) })
}

fn cmd_homology(dir: &Path, model: &str, resolution: Option<usize>, d: usize) -> Result<Outcome> {
    let kind: TriangulatedKind = model.parse()?;
    let res = resolution.unwrap_or(match kind {
        TriangulatedKind::Circle => 3,
        TriangulatedKind::Sphere2 => 1,
    });
    let m = triangulate_model(kind, res)?;
    let pair: BarycenterComplexPair = barycenter_complex(&m, d)?;
    let cc = ChainComplexGF2::new(&pair.complex, None);
    let dd = cc.boundary_squared_vanishes();
    let betti = cc.betti();
    let rel = relative_homology(&pair);
    let euler = pair.complex.euler_characteristic();
    let euler_betti: i64 = betti.iter().enumerate().map(|(i, b)| if i % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("homology_complex.txt"), pair.complex.to_simplex_list())?;
    let mut failing = Vec::new();
    if !dd {
        failing.push("boundary of boundary is nonzero".to_string());
    }
    if euler != euler_betti {
        failing.push(format!("Euler characteristic {euler} differs from Betti sum {euler_betti}"));
    }
    let report = json!({
        "model": model,
        "resolution": res,
        "d": d,
        "simplex_counts": pair.complex.simplices.iter().map(|s| s.len()).collect::<Vec<_>>(),
        "betti": betti,
        "relative_betti": rel,
        "euler_characteristic": euler,
        "boundary_squared_zero": dd,
        "failing_checks": failing,
    });
    Ok(Outcome { code: if failing.is_empty() { EXIT_OK } else { EXIT_VERIFICATION }, report })
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let dir = out_dir(&cli.out);
    let (name, res) = match &cli.command {
        Command::Constants { n, k } => ("constants", cmd_constants(*n, *k)),
        Command::Residual { common, mu, variant, samples } => ("residual", cmd_residual(&dir, common, *mu, variant, *samples)),
        Command::Interactions { common, d, mu, centers } => ("interactions", cmd_interactions(common, *d, *mu, centers)),
        Command::Sweep { common, quantity, mu_min, mu_max, points, expect_slope } => {
            ("sweep", cmd_sweep(&dir, common, quantity, *mu_min, *mu_max, *points, *expect_slope))
        }
        Command::EnergyScan { common, d, mu_grid } => ("energy_scan", cmd_energy_scan(&dir, common, d, mu_grid)),
        Command::Select { common, field, d, field_energy_sq, eps } => ("select", cmd_select(common, field, *d, *field_energy_sq, *eps)),
        Command::Homology { model, resolution, d } => ("homology", cmd_homology(&dir, model, *resolution, *d)),
    };
    let (code, body) = match res {
        Ok(o) => (o.code, o.report),
        Err(e) => (exit_code_of(&e), json!({ "error": e.to_string() })),
    };
    let doc = json!({ "schema_version": SCHEMA_VERSION, "command": name, "exit_code": code, "report": body });
    if let Err(e) = write_json(&dir, name, &doc) {
        eprintln!("bubblelab: cannot write report: {e}");
        return EXIT_INVALID;
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
    code
}
