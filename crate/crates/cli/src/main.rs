// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use arctic_core::calibrate::{self, CalibrateOptions};
use arctic_core::io::{self, IoError, RunConfig, ScenarioKind, Severity};
use arctic_core::selftest::{self, Tolerances};
use arctic_core::tangent::{self, ArcticCurve, GridSpec};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(name = "arctic", version, about = "Arctic curves and limit shapes of Aztec diamonds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the arctic curve: curve.csv, curve.json, curve.svg.
    Curve(RunArgs),
    /// Sample the height function: height.csv, height.obj, height.json.
    Height(RunArgs),
    /// Calibrate the holey parameters: fit.json, or sweep.csv with --sweep.
    Fit(FitArgs),
    /// Run the built-in acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// uniform, uniform-cylinder, two-periodic, holey or custom-table.
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    /// Two-periodic weight, 0 < b < 1.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    tau_im: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Hole size; with --a and --tau-im missing, the calibration target.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Boundary table file for custom-table.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Root-finding tolerance of the calibration.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Samples per boundary component.
    #[arg(long)]
    n: Option<usize>,
    /// Distance of the traced line from the boundary.
    #[arg(long)]
    eps: Option<f64>,
    /// Mesh size as NXxNY, e.g. 128x64.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated δ values; one CSV row each.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Comma-separated target hole sizes at δ = 0; one CSV row each.
    #[arg(long, value_delimiter = ',')]
    sweep_kappa: Option<Vec<f64>>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run only these checks (comma-separated ids 1-10).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u8>>,
    /// Also write the report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NXxNY")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t}: {e}"));
    Ok((p(a)?, p(b)?))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e.severity() {
            Severity::Validation => EXIT_VALIDATION,
            Severity::Numerical => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> Failure {
    Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    }
}

fn validation(message: String) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message,
    }
}

fn config_from(args: &ModelArgs, default: ScenarioKind) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(args.scenario.unwrap_or(default)),
    };
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    let p = &mut cfg.params;
    let over = |slot: &mut Option<f64>, v: Option<f64>| {
        if v.is_some() {
            *slot = v;
        }
    };
    over(&mut p.b, args.b);
    over(&mut p.tau_im, args.tau_im);
    over(&mut p.a, args.a);
    over(&mut p.kappa, args.kappa);
    over(&mut p.delta, args.delta);
    if args.table.is_some() {
        p.table = args.table.clone();
    }
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(validation(format!("tol must be positive, got {t}")));
        }
        cfg.calibrate.xtol = t;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn run_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = config_from(&args.model, ScenarioKind::Uniform)?;
    if let Some(n) = args.n {
        cfg.sampling.n = n;
    }
    if let Some(e) = args.eps {
        cfg.sampling.eps = e;
    }
    if let Some(g) = args.grid {
        cfg.sampling.grid = g;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

fn cmd_curve(args: RunArgs) -> Result<(), Failure> {
    let cfg = run_config(&args)?;
    let model = cfg.build_model()?;
    let (n, eps) = (cfg.sampling.n, cfg.sampling.eps);
    let mut curve = ArcticCurve {
        pieces: Vec::new(),
        warnings: Vec::new(),
    };
    let mut failed = Vec::new();
    for comp in model.domain().components {
        match tangent::trace_curve(&model, comp, n, eps) {
            Ok(p) => {
                if p.dropped.len() as f64 > tangent::DEGENERATE_WARN_FRACTION * n as f64 {
                    curve
                        .warnings
                        .push(format!("{comp}: {} of {n} samples degenerate", p.dropped.len()));
                }
                curve.pieces.push(p);
            }
            Err(e) => failed.push(format!("{comp}: {e}")),
        }
    }
    for w in &curve.warnings {
        eprintln!("warning: {w}");
    }
    let partial = (!failed.is_empty()).then(|| failed.join("; "));
    if curve.pieces.is_empty() {
        return Err(numerical(partial.unwrap_or_default()));
    }
    let rows = io::curve_rows(&curve);
    let csv = io::curve_csv(&rows)?;
    io::write_atomic(&out_path(&cfg, "curve.csv"), csv.as_bytes())?;
    // The plot is rendered from the CSV text, not from the in-memory curve.
    let reread = io::read_curve_csv(csv.as_bytes())?;
    let frame = io::domain_frame(&model);
    io::write_atomic(&out_path(&cfg, "curve.svg"), io::render_svg(&reread, frame.as_deref()).as_bytes())?;
    let residual = curve.all_samples().map(|s| s.residual).fold(0.0, f64::max);
    let counts: Vec<_> = curve
        .pieces
        .iter()
        .map(|p| json!({"component": p.component, "requested": p.requested, "kept": p.samples.len(), "dropped": p.dropped.len()}))
        .collect();
    let meta = io::sidecar(
        "curve",
        &model,
        &cfg,
        json!({"samples": counts, "max_tangency_residual": residual, "warnings": curve.warnings}),
        partial.as_deref(),
    );
    io::write_json(&out_path(&cfg, "curve.json"), &meta)?;
    println!("wrote {} samples to {}", rows.len(), cfg.output.dir.display());
    match partial {
        Some(reason) => Err(Failure {
            code: EXIT_PARTIAL,
            message: format!("partial output: {reason}"),
        }),
        None => Ok(()),
    }
}

fn cmd_height(args: RunArgs) -> Result<(), Failure> {
    let cfg = run_config(&args)?;
    let model = cfg.build_model()?;
    let (nx, ny) = cfg.sampling.grid;
    let mesh = tangent::sample_height(&model, GridSpec { nx, ny }).map_err(numerical)?;
    let dropped = mesh.dropped();
    let fraction = dropped as f64 / mesh.points.len() as f64;
    let mut warnings = Vec::new();
    if fraction > tangent::DEGENERATE_WARN_FRACTION {
        warnings.push(format!("{dropped} of {} mesh points degenerate", mesh.points.len()));
        eprintln!("warning: {}", warnings[0]);
    }
    io::write_atomic(&out_path(&cfg, "height.csv"), io::mesh_csv(&mesh)?.as_bytes())?;
    io::write_atomic(&out_path(&cfg, "height.obj"), io::mesh_obj(&mesh, true).as_bytes())?;
    let meta = io::sidecar(
        "height",
        &model,
        &cfg,
        json!({"grid": [nx, ny], "dropped": dropped, "warnings": warnings}),
        None,
    );
    io::write_json(&out_path(&cfg, "height.json"), &meta)?;
    println!("wrote {} mesh points to {}", mesh.points.len() - dropped, cfg.output.dir.display());
    Ok(())
}

fn fit_options(cfg: &RunConfig) -> CalibrateOptions {
    let mut opts = cfg.calibrate;
    if let Some(k) = cfg.params.kappa {
        opts.kappa_target = k;
    }
    opts
}

fn sweep_row(delta: f64, opts: &CalibrateOptions) -> Vec<String> {
    let fit = calibrate::fit_all(delta, opts).map_err(|e| e.to_string()).and_then(|r| {
        let h = tangent::height_change(&r.params).map_err(|e| e.to_string())?;
        Ok((r, h))
    });
    match fit {
        Ok((r, h)) => {
            let p = r.params;
            let mut row: Vec<String> = [p.delta, p.a, p.kappa, p.tau_im, h, r.alignment_residual]
                .map(io::fmt_f64)
                .to_vec();
            row.push("ok".into());
            row
        }
        Err(e) => {
            let mut row = vec![io::fmt_f64(delta)];
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(e.replace(['\n', ','], " "));
            row
        }
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    let mut cfg = config_from(&args.model, ScenarioKind::Holey)?;
    cfg.scenario = ScenarioKind::Holey;
    cfg.validate()?;
    let opts = fit_options(&cfg);
    if args.sweep.is_some() || args.sweep_kappa.is_some() {
        let mut rows = Vec::new();
        for &d in args.sweep.iter().flatten() {
            if !(d >= 0.0) {
                return Err(validation(format!("delta must be non-negative, got {d}")));
            }
            rows.push(sweep_row(d, &opts));
        }
        for &k in args.sweep_kappa.iter().flatten() {
            if !(k > 0.0 && k < 1.0) {
                return Err(validation(format!("kappa must lie in (0, 1), got {k}")));
            }
            rows.push(sweep_row(0.0, &CalibrateOptions { kappa_target: k, ..opts }));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["delta", "a", "kappa", "tau_im", "r", "residual", "status"];
        w.write_record(header).map_err(numerical)?;
        for r in &rows {
            w.write_record(r).map_err(numerical)?;
        }
        let bytes = w.into_inner().map_err(numerical)?;
        io::write_atomic(&out_path(&cfg, "sweep.csv"), &bytes)?;
        let failed = rows.iter().filter(|r| r.last().map(String::as_str) != Some("ok")).count();
        println!("wrote {} rows ({failed} failed) to {}", rows.len(), cfg.output.dir.display());
        return match failed {
            0 => Ok(()),
            f if f == rows.len() => Err(numerical("every sweep row failed")),
            _ => Err(Failure {
                code: EXIT_PARTIAL,
                message: format!("{failed} sweep rows failed; see the status column"),
            }),
        };
    }
    let delta = cfg.params.delta.unwrap_or(0.0);
    let r = calibrate::fit_all(delta, &opts).map_err(numerical)?;
    let mut doc = r.to_json();
    doc["version"] = json!(arctic_core::VERSION);
    doc["options"] = serde_json::to_value(opts).map_err(numerical)?;
    io::write_json(&out_path(&cfg, "fit.json"), &doc)?;
    println!(
        "a = {}, kappa = {}, tau_im = {}, residual = {:.3e}",
        r.params.a, r.params.kappa, r.params.tau_im, r.alignment_residual
    );
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let tol = Tolerances::from_env().map_err(validation)?;
    let ids: Vec<u8> = match args.only {
        Some(v) => v,
        None => selftest::CHECK_IDS.collect(),
    };
    if let Some(bad) = ids.iter().find(|i| !selftest::CHECK_IDS.contains(i)) {
        return Err(validation(format!("no check {bad}")));
    }
    let mut reports = Vec::new();
    for id in ids {
        let r = selftest::run_check(id, &tol);
        println!("{}", r.line());
        reports.push(r);
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| format!("{} {}", r.id, r.title)).collect();
    if let Some(path) = &args.json {
        io::write_json(path, &json!({"tolerances": tol, "checks": reports}))?;
    }
    println!("{} of {} checks passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(numerical(format!("failed: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve(a) => cmd_curve(a),
        Command::Height(a) => cmd_height(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
