//! `syren`: batch front end for singular Yamabe expansions, exceptional
//! codimension classification, renormalized volumes, and conformal energies.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
//! guard (ill-conditioned fit, degenerate metric, obstruction hit).

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::RunConfig;
use syren_core::expansion::symmetric::{expand_symmetric_with_log, residual_slope};
use syren_core::expansion::eikonal::eikonal_expand;
use syren_core::fiber::{BasisKind, FiberBasis, FiberFunction};
use syren_core::geometry::models::{model_catalog, ModelGeometry, ModelParams, WarpedModel};
use syren_core::geometry::surface::SurfaceGrid;
use syren_core::geometry::GeometryError;
use syren_core::indicial::{classify, exceptional_sets};
use syren_core::renorm::{
    anomaly_k4, closed_form_equatorial, energy_codim1, energy_n2, fit_expansion, log_spaced,
    samples_to_csv, tail_volume_samples, RenormError,
};
use syren_core::verify::run_all;

#[derive(Parser)]
#[command(
    name = "syren",
    about = "Singular Yamabe expansions and renormalized volumes of embedded submanifolds",
    version
)]
struct Cli {
    /// TOML config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (also honors SYREN_THREADS; 0 = library default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Write CSV side data (fit samples, surface invariants) here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOverrides {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    torus_a: Option<f64>,
    #[arg(long)]
    torus_c: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    phi2: Option<f64>,
    #[arg(long)]
    psi3: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Indicial classification of (n, k), or the E_n/O_n table.
    Classify {
        #[command(flatten)]
        common: CommonOverrides,
        /// Print exceptional-set tables for 2..=nmax instead of one pair.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Formal expansion of v = u/t for a symmetric model.
    Expand {
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Renormalized energy of a model surface (n = 2).
    Energy {
        #[command(flatten)]
        common: CommonOverrides,
        /// Emit the k = 4 pointwise anomaly field instead of an energy.
        #[arg(long)]
        anomaly: bool,
    },
    /// Tail-volume fit of a symmetric model: c_j, energy, V.
    Volume {
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Conformal distance-ratio expansion for a radial omega jet.
    Eikonal {
        #[command(flatten)]
        common: CommonOverrides,
        /// Radial omega Taylor coefficients, comma separated.
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
    },
    /// Run the full anchor suite; exit 0 iff every criterion passes.
    Verify {
        #[command(flatten)]
        common: CommonOverrides,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("syren: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: msg.into(),
        }
    }
    fn validation(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    fn numerical(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
}

fn numerical_guard(err: &RenormError) -> bool {
    matches!(
        err,
        RenormError::IllConditioned { .. }
            | RenormError::CriticalCodimension
            | RenormError::Geometry(GeometryError::DegenerateMetric { .. })
    )
}

fn load_config(cli_cfg: &Option<PathBuf>, common: &CommonOverrides) -> Result<RunConfig, CliError> {
    let mut cfg = match cli_cfg {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read config {path:?}: {e}")))?;
            RunConfig::from_toml(&text).map_err(CliError::validation)?
        }
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = common.$field.clone() { cfg.$field = v; })*
        };
    }
    set!(n, k, seed, order, model, eps_min, eps_max, samples, resolution, tolerance,
         torus_a, torus_c, amplitude, phi2, psi3);
    cfg.validate().map_err(CliError::validation)?;
    Ok(cfg)
}

fn init_threads(cli: &Cli, cfg: &RunConfig) {
    let n = cli
        .threads
        .or_else(|| {
            std::env::var("SYREN_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(cfg.threads);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Classify { common, table, nmax } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let value = if *table {
                let nmax = nmax.unwrap_or(cfg.n.max(2));
                let rows: Vec<Value> = (2..=nmax)
                    .map(|n| {
                        let (e, o) = exceptional_sets(n);
                        json!({
                            "n": n,
                            "e_set": e.iter().collect::<Vec<_>>(),
                            "o_set": o.iter().collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "tables": rows })
            } else {
                if cfg.n < 2 || cfg.k < 2 {
                    return Err(CliError::validation("classify needs n >= 2 and k >= 2"));
                }
                serde_json::to_value(classify(cfg.n, cfg.k)).unwrap()
            };
            emit(&cli, value)
        }
        Command::Expand { common } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let model = warped_model(&cfg)?;
            let exp = expand_symmetric_with_log(&model, cfg.order)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            let slope = residual_slope(&model, &exp.coeffs, 1e-3, 1e-1, 24);
            let mut value = serde_json::to_value(exp.series.to_dto()).unwrap();
            let obj = value.as_object_mut().unwrap();
            obj.insert(
                "coefficients".into(),
                json!(exp.coeffs.coeffs().to_vec()),
            );
            obj.insert("model".into(), json!(model.name));
            obj.insert("residual_slope".into(), json!(slope));
            if let Some(ob) = &exp.obstruction {
                obj.insert(
                    "obstruction".into(),
                    json!({
                        "nu": ob.nu,
                        "pi0_source": ob.pi0_f,
                        "log_coeff": ob.log_coeff,
                        "log_power": ob.log_power,
                    }),
                );
            }
            emit(&cli, value)
        }
        Command::Energy { common, anomaly } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let grid = surface_model(&cfg)?;
            if let Some(path) = &cli.csv {
                let csv = grid
                    .invariants_csv()
                    .map_err(|e| CliError::numerical(e.to_string()))?;
                std::fs::write(path, csv)
                    .map_err(|e| CliError::usage(format!("cannot write csv: {e}")))?;
            }
            let area = grid.area().map_err(|e| CliError::numerical(e.to_string()))?;
            let value = if *anomaly || grid.codim == 4 {
                if grid.codim != 4 {
                    return Err(CliError::validation("--anomaly needs a k = 4 surface"));
                }
                let field = anomaly_k4(&grid).map_err(|e| CliError::numerical(e.to_string()))?;
                let inv = grid
                    .invariants()
                    .map_err(|e| CliError::numerical(e.to_string()))?;
                let integral: f64 = field
                    .iter()
                    .zip(&inv)
                    .map(|(f, p)| f * p.area_weight)
                    .sum();
                let (min, max) = field
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                json!({
                    "surface": grid.name,
                    "k": grid.codim,
                    "area": area,
                    "anomaly_integral": integral,
                    "anomaly_min": min,
                    "anomaly_max": max,
                    "points": field.len(),
                })
            } else {
                let e = energy_n2(&grid).map_err(|e| {
                    if numerical_guard(&e) {
                        CliError::numerical(e.to_string())
                    } else {
                        CliError::validation(e.to_string())
                    }
                })?;
                let mut out = json!({
                    "surface": grid.name,
                    "k": grid.codim,
                    "area": area,
                    "energy": e,
                });
                if grid.codim == 1 {
                    let reduced = energy_codim1(&grid)
                        .map_err(|e| CliError::numerical(e.to_string()))?;
                    out.as_object_mut()
                        .unwrap()
                        .insert("energy_codim1_form".into(), json!(reduced));
                }
                out
            };
            emit(&cli, value)
        }
        Command::Volume { common } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let model = warped_model(&cfg)?;
            let exp = expand_symmetric_with_log(&model, cfg.n + 1)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            if exp.obstruction.is_some() {
                return Err(CliError::numerical(format!(
                    "model {} hits a log obstruction; no volume expansion",
                    model.name
                )));
            }
            let eps = log_spaced(cfg.eps_min, cfg.eps_max, cfg.samples);
            let samples = tail_volume_samples(&model, &exp.coeffs, &eps);
            if let Some(path) = &cli.csv {
                std::fs::write(path, samples_to_csv(&samples))
                    .map_err(|e| CliError::usage(format!("cannot write csv: {e}")))?;
            }
            let fit = fit_expansion(&samples, cfg.n, cfg.k).map_err(|e| {
                if numerical_guard(&e) {
                    CliError::numerical(e.to_string())
                } else {
                    CliError::validation(e.to_string())
                }
            })?;
            let mut value = serde_json::to_value(&fit).unwrap();
            let obj = value.as_object_mut().unwrap();
            obj.insert("model".into(), json!(model.name));
            if model.name.starts_with("equatorial") {
                match closed_form_equatorial(cfg.n, cfg.k) {
                    syren_core::renorm::ClosedFormValue::Energy(v) => {
                        obj.insert("closed_form_energy".into(), json!(v));
                    }
                    syren_core::renorm::ClosedFormValue::Volume(v) => {
                        obj.insert("closed_form_volume".into(), json!(v));
                    }
                }
            }
            emit(&cli, value)
        }
        Command::Eikonal { common, omega } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let w = omega.clone().unwrap_or_else(|| cfg.omega.clone());
            if w.is_empty() {
                return Err(CliError::validation("omega jet must not be empty"));
            }
            let basis = FiberBasis::get(cfg.k.max(2), BasisKind::Constant, 0);
            let coeffs: Vec<FiberFunction> = w
                .iter()
                .map(|&v| FiberFunction::constant(&basis, v))
                .collect();
            let out = eikonal_expand(&coeffs, cfg.order)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            let psi: Vec<f64> = out.psi.iter().map(|f| f.fiber_average()).collect();
            let defect = out
                .defect_norm()
                .map_err(|e| CliError::numerical(e.to_string()))?;
            emit(
                &cli,
                json!({
                    "k": cfg.k.max(2),
                    "omega": w,
                    "psi": psi,
                    "order": cfg.order,
                    "defect_norm": defect,
                }),
            )
        }
        Command::Verify { common } => {
            let cfg = load_config(&cli.config, common)?;
            init_threads(&cli, &cfg);
            let results = run_all(cfg.seed);
            let mut all_pass = true;
            for r in &results {
                println!(
                    "criterion {} ({}): {} — {} [{:.2}s]",
                    r.id,
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.detail,
                    r.seconds
                );
                all_pass &= r.passed;
            }
            emit(&cli, serde_json::to_value(&results).unwrap())?;
            if all_pass {
                Ok(())
            } else {
                Err(CliError::numerical("verification failed"))
            }
        }
    }
}

fn catalog_params(cfg: &RunConfig) -> ModelParams {
    ModelParams {
        n: cfg.n,
        k: cfg.k,
        resolution: cfg.resolution,
        torus_a: cfg.torus_a,
        torus_c: cfg.torus_c,
        amplitude: cfg.amplitude,
        seed: cfg.seed,
        phi2: cfg.phi2,
        psi3: cfg.psi3,
    }
}

fn warped_model(cfg: &RunConfig) -> Result<WarpedModel, CliError> {
    match model_catalog(&cfg.model, &catalog_params(cfg)) {
        Ok(ModelGeometry::Warped(m)) => Ok(m),
        Ok(ModelGeometry::Surface(_)) => Err(CliError::validation(format!(
            "`{}` is a surface model; this subcommand needs a symmetric profile \
             (equatorial|flat|perturbed)",
            cfg.model
        ))),
        Err(e) => Err(CliError::validation(e.to_string())),
    }
}

fn surface_model(cfg: &RunConfig) -> Result<SurfaceGrid, CliError> {
    // a path to a surface file takes precedence over catalog names
    let path = std::path::Path::new(&cfg.model);
    if path.exists() && path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read surface: {e}")))?;
        return SurfaceGrid::parse(&text).map_err(|e| CliError::validation(e.to_string()));
    }
    match model_catalog(&cfg.model, &catalog_params(cfg)) {
        Ok(ModelGeometry::Surface(g)) => Ok(g),
        Ok(ModelGeometry::Warped(m)) if m.n == 2 => {
            // symmetric n = 2 models have a surface form
            match model_catalog("equatorial_sphere", &catalog_params(cfg)) {
                Ok(ModelGeometry::Surface(g)) => Ok(g),
                _ => unreachable!(),
            }
        }
        Ok(ModelGeometry::Warped(_)) => Err(CliError::validation(format!(
            "`{}` is a symmetric profile without a surface form; use a surface model \
             (clifford_torus|clifford_stereographic|torus_of_revolution|graph_perturbation|\
             equatorial_sphere|<file>)",
            cfg.model
        ))),
        Err(e) => Err(CliError::validation(e.to_string())),
    }
}

/// Rounds every number in the JSON tree to 12 significant digits so outputs
/// are diffable goldens across platforms.
fn round_sig12(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if f.is_finite() && f != 0.0 && n.as_i64().is_none() {
                    let mag = f.abs().log10().floor() as i32;
                    let scale = 10f64.powi(11 - mag);
                    let rounded = (f * scale).round() / scale;
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *value = Value::Number(num);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_sig12),
        Value::Object(map) => map.values_mut().for_each(round_sig12),
        _ => {}
    }
}

fn emit(cli: &Cli, mut value: Value) -> Result<(), CliError> {
    round_sig12(&mut value);
    let text = serde_json::to_string_pretty(&value).unwrap();
    match &cli.output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::usage(format!("cannot write output: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
