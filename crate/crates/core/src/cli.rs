//! Batch front-end.
//!
//! Every subcommand reads an optional JSON config, overlays command-line
//! flags onto it (flag `--grid-points` sets key `grid_points`, and so on),
//! runs, and writes a JSON report (CSV for `experiment`) that embeds the
//! resolved configuration. Outputs go through a temporary file and a rename.
//!
//! Exit codes: 0 pass, 1 checks ran and something failed, 2 usage or
//! configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::assembly::{
    self, build_exceptional_tube_with, constant_shell_family, design_tube_with, experiment_shell_scan,
    sine_shell_family, Config, DesignOptions, DoubleConfig, ExceptionalTube, FeasibilityReport, TubeDesign,
    DEFAULT_GRID_POINTS, GRID_START,
};
use crate::curvature::{verify_tube, ConditionReport, TubeParams};
use crate::error::{Error, Result};
use crate::oracle::{self, ComparisonRow, ALIGNMENT_THRESHOLD, DEFAULT_STEP};
use crate::profiles::{GridSpec, Profile};

/// Largest relative error accepted by `oracle-validate`.
pub const ORACLE_TOLERANCE: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "orbit-ricci", version, about = "Ricci-positive tubes, collars and gluings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Re-verify a designed tube (JSON with params, f, h).
    VerifyTube(VerifyTubeArgs),
    /// Design the warping functions of a singular tube.
    DesignTube(DesignTubeArgs),
    /// Run a gluing or double configuration.
    Assemble(AssembleArgs),
    /// The double of the round half-disc.
    Double(DoubleArgs),
    /// Build and check an exceptional tube.
    Exceptional(ExceptionalArgs),
    /// Compare closed-form Ricci curvature with the finite-difference oracle.
    OracleValidate(OracleArgs),
    /// Scan shell bases for gluing feasibility (CSV).
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Default)]
struct TubeFlags {
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "Lambda")]
    big_lambda: Option<f64>,
    #[arg(long)]
    iota: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
}

impl TubeFlags {
    fn pairs(&self) -> Vec<(&'static str, Option<Value>)> {
        vec![
            ("q", self.q.map(Value::from)),
            ("m", self.m.map(Value::from)),
            ("eps", self.eps.map(Value::from)),
            ("nu", self.nu.map(Value::from)),
            ("lambda", self.lambda.map(Value::from)),
            ("Lambda", self.big_lambda.map(Value::from)),
            ("iota", self.iota.map(Value::from)),
            ("eps0", self.eps0.map(Value::from)),
        ]
    }
}

#[derive(Args, Debug)]
struct VerifyTubeArgs {
    /// Tube JSON, e.g. the output of `design-tube`.
    #[arg(long, short = 'i')]
    input: PathBuf,
    #[command(flatten)]
    tube: TubeFlags,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DesignTubeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    tube: TubeFlags,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    smoothing_window: Option<f64>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AssembleArgs {
    #[arg(long, required_unless_present = "golden", conflicts_with = "golden")]
    config: Option<PathBuf>,
    /// Built-in configuration: suspension, single_orbit or double.
    #[arg(long)]
    golden: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// A number or `auto`.
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    nu0: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    collar_fraction: Option<f64>,
    #[arg(long)]
    smoothing_window: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Directory for CSV dumps of every profile on the report grid.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DoubleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExceptionalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "Lambda")]
    big_lambda: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum ChartName {
    RoundS2,
    RoundS3,
    RoundS4,
    Berger,
    Tube,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    chart: Option<ChartName>,
    /// Number of sample points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fibre scale `c` of the Berger sphere.
    #[arg(long)]
    fiber_scale: Option<f64>,
    #[command(flatten)]
    tube: TubeFlags,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum Family {
    /// `ψ = sin` on `[t, π − t]`.
    SineShell,
    /// `ψ ≡ t` on `[0, 1]`.
    Constant,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    fiber_dim: Option<u32>,
    #[arg(long)]
    fiber_ricci: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let outcome = match cli.command {
        Command::VerifyTube(a) => verify_tube_cmd(a),
        Command::DesignTube(a) => design_tube_cmd(a),
        Command::Assemble(a) => assemble_cmd(a),
        Command::Double(a) => double_cmd(a),
        Command::Exceptional(a) => exceptional_cmd(a),
        Command::OracleValidate(a) => oracle_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        e if e.is_numeric() => 3,
        Error::InfeasibleParams { .. } => 1,
        _ => 2,
    }
}

fn pass_code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------- io

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Loads `config` (or an empty object) and sets every present flag.
fn overlay(config: Option<&Path>, pairs: Vec<(&str, Option<Value>)>) -> Result<Map<String, Value>> {
    let base = match config {
        Some(p) => read_json(p)?,
        None => Value::Object(Map::new()),
    };
    let Value::Object(mut map) = base else {
        return Err(Error::Config("configuration must be a JSON object".into()));
    };
    for (key, value) in pairs {
        if let Some(v) = value {
            map.insert(key.to_string(), v);
        }
    }
    Ok(map)
}

fn typed<T: DeserializeOwned>(map: Map<String, Value>, what: &str) -> Result<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(format!("{what}: {e}")))
}

/// Writes `bytes` to `path` via a temporary file in the same directory, or
/// to standard output.
fn write_atomic(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[derive(Serialize)]
struct ErrorInfo {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraint: Option<String>,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        let (kind, constraint) = match e {
            Error::InfeasibleParams { constraint, .. } => ("infeasible_params", Some(constraint.clone())),
            Error::DesignFailure(_) => ("design_failure", None),
            Error::Singular(_) => ("singular", None),
            Error::InvalidParam(_) => ("invalid_param", None),
            _ => ("error", None),
        };
        ErrorInfo { kind, message: e.to_string(), constraint }
    }
}

fn report_failures(report: &ConditionReport) {
    for e in report.failures() {
        eprintln!("failed: {} (worst margin {:e} at r = {:?})", e.name, e.worst_margin, e.witness_r);
    }
}

// ---------------------------------------------------------- commands

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DesignTubeConfig {
    #[serde(flatten)]
    params: TubeParams,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
    #[serde(default)]
    smoothing_window: Option<f64>,
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Serialize)]
struct DesignOutput {
    command: &'static str,
    config: DesignTubeConfig,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorInfo>,
    #[serde(flatten)]
    design: Option<TubeDesign>,
}

fn design_tube_cmd(a: DesignTubeArgs) -> Result<i32> {
    let mut pairs = a.tube.pairs();
    pairs.push(("grid_points", a.grid_points.map(Value::from)));
    pairs.push(("smoothing_window", a.smoothing_window.map(Value::from)));
    let config: DesignTubeConfig = typed(overlay(a.config.as_deref(), pairs)?, "design-tube configuration")?;
    let opts = DesignOptions { grid_points: config.grid_points, smoothing_window: config.smoothing_window };
    match design_tube_with(&config.params, &opts) {
        Ok(design) => {
            let pass = design.report.pass;
            report_failures(&design.report);
            write_json(
                a.output.as_deref(),
                &DesignOutput { command: "design-tube", config, pass, error: None, design: Some(design) },
            )?;
            Ok(pass_code(pass))
        }
        Err(e @ Error::InfeasibleParams { .. }) => {
            eprintln!("infeasible: {e}");
            let error = Some(ErrorInfo::from(&e));
            write_json(
                a.output.as_deref(),
                &DesignOutput { command: "design-tube", config, pass: false, error, design: None },
            )?;
            Ok(1)
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VerifyInput {
    params: TubeParams,
    f: Profile,
    h: Profile,
}

fn verify_tube_cmd(a: VerifyTubeArgs) -> Result<i32> {
    let mut doc = read_json(&a.input)?;
    let params = doc
        .get_mut("params")
        .and_then(Value::as_object_mut)
        .ok_or_else(|| Error::Config(format!("{}: missing `params` object", a.input.display())))?;
    for (k, v) in a.tube.pairs() {
        if let Some(v) = v {
            params.insert(k.to_string(), v);
        }
    }
    let input: VerifyInput = serde_json::from_value(doc).map_err(|e| Error::Config(format!("tube input: {e}")))?;
    let points = a.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    let grid = GridSpec::new(points, GRID_START.max(input.h.lo()), input.h.hi())?;
    let report = verify_tube(&input.f, &input.h, &input.params, &grid)?;
    report_failures(&report);
    let out = json!({
        "command": "verify-tube",
        "config": { "input": a.input, "params": input.params, "grid_points": points },
        "pass": report.pass,
        "report": report,
    });
    write_json(a.output.as_deref(), &out)?;
    Ok(pass_code(report.pass))
}

fn golden(name: &str) -> Result<Config> {
    assembly::golden_configs()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
        .ok_or_else(|| Error::Config(format!("unknown golden config {name} (suspension, single_orbit, double)")))
}

fn assemble_cmd(a: AssembleArgs) -> Result<i32> {
    let base = match (&a.config, &a.golden) {
        (Some(p), _) => read_json(p)?,
        (None, Some(name)) => serde_json::to_value(golden(name)?)?,
        (None, None) => return Err(Error::Config("--config or --golden is required".into())),
    };
    let nu = match a.nu.as_deref() {
        None => None,
        Some("auto") => Some(Value::from("auto")),
        Some(s) => Some(Value::from(
            s.parse::<f64>().map_err(|_| Error::Config(format!("--nu expects a number or `auto`, got {s}")))?,
        )),
    };
    let pairs = vec![
        ("eps", a.eps.map(Value::from)),
        ("nu", nu),
        ("nu0", a.nu0.map(Value::from)),
        ("eps0", a.eps0.map(Value::from)),
        ("collar_fraction", a.collar_fraction.map(Value::from)),
        ("smoothing_window", a.smoothing_window.map(Value::from)),
        ("grid_points", a.grid_points.map(Value::from)),
    ];
    let Value::Object(mut map) = base else {
        return Err(Error::Config("configuration must be a JSON object".into()));
    };
    let is_double = map.get("kind").and_then(Value::as_str) == Some("double");
    for (key, value) in pairs {
        if let Some(v) = value {
            if is_double {
                return Err(Error::Config(format!("--{} does not apply to a double", key.replace('_', "-"))));
            }
            map.insert(key.to_string(), v);
        }
    }
    let config: Config = typed(map, "assembly configuration")?;
    let report = assembly::run_config(&config)?;
    if let Some(dir) = &a.csv_dir {
        dump_grids(dir, &report)?;
    }
    finish_feasibility(a.output.as_deref(), &report)
}

fn finish_feasibility(output: Option<&Path>, report: &FeasibilityReport) -> Result<i32> {
    for s in report.failed_stages() {
        eprintln!("stage {} {:?} failed", s.stage, s.boundary);
        report_failures(&s.report);
        for n in &s.notes {
            eprintln!("  {n}");
        }
    }
    write_json(output, report)?;
    Ok(pass_code(report.overall))
}

/// One CSV per profile family with columns `r` and the jets.
fn dump_grids(dir: &Path, report: &FeasibilityReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let points = match &report.config {
        Config::Gluing(c) => c.grid_points,
        Config::Double(_) => DEFAULT_GRID_POINTS,
    };
    let mut files: Vec<(String, Vec<(&str, &Profile)>)> = Vec::new();
    match &report.config {
        Config::Gluing(c) => match &c.base {
            assembly::BaseSpec::Shell { psi, .. } | assembly::BaseSpec::Cap { psi, .. } => {
                files.push(("base.csv".into(), vec![("psi", psi)]));
            }
            assembly::BaseSpec::Abstract { .. } => {}
        },
        Config::Double(d) => files.push(("double.csv".into(), vec![("f", &d.f), ("h", &d.h)])),
    }
    for t in &report.tubes {
        files.push((format!("collar_{}.csv", t.boundary), vec![("theta", &t.collar)]));
        let mut cols = Vec::new();
        if let Some(f) = &t.f {
            cols.push(("f", f));
        }
        if let Some(h) = &t.h {
            cols.push(("h", h));
        }
        if !cols.is_empty() {
            files.push((format!("tube_{}.csv", t.boundary), cols));
        }
    }
    for (name, cols) in files {
        let (lo, hi) = cols[0].1.domain();
        let grid = GridSpec::new(points, lo, hi)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["r".to_string()];
        for (c, _) in &cols {
            header.extend([c.to_string(), format!("{c}_d1"), format!("{c}_d2")]);
        }
        w.write_record(&header)?;
        for r in grid.points() {
            let mut rec = vec![r.to_string()];
            for (_, p) in &cols {
                let j = p.eval(r)?;
                rec.extend([j.value.to_string(), j.d1.to_string(), j.d2.to_string()]);
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_atomic(Some(&dir.join(name)), &bytes)?;
    }
    Ok(())
}

fn double_cmd(a: DoubleArgs) -> Result<i32> {
    let base = match &a.config {
        Some(p) => read_json(p)?,
        None => serde_json::to_value(DoubleConfig::standard())?,
    };
    let Value::Object(mut map) = base else {
        return Err(Error::Config("configuration must be a JSON object".into()));
    };
    map.remove("kind");
    let pairs = [
        ("points", a.points.map(Value::from)),
        ("planes", a.planes.map(Value::from)),
        ("seed", a.seed.map(Value::from)),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            map.insert(k.to_string(), v);
        }
    }
    let config: DoubleConfig = typed(map, "double configuration")?;
    let report = assembly::assemble_double(&config)?;
    finish_feasibility(a.output.as_deref(), &report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExceptionalConfig {
    n: u32,
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
    nu: f64,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
}

fn exceptional_cmd(a: ExceptionalArgs) -> Result<i32> {
    let pairs = vec![
        ("n", a.n.map(Value::from)),
        ("lambda", a.lambda.map(Value::from)),
        ("Lambda", a.big_lambda.map(Value::from)),
        ("nu", a.nu.map(Value::from)),
        ("grid_points", a.grid_points.map(Value::from)),
    ];
    let config: ExceptionalConfig = typed(overlay(a.config.as_deref(), pairs)?, "exceptional configuration")?;
    let tube: ExceptionalTube =
        build_exceptional_tube_with(config.n, config.lambda, config.big_lambda, config.nu, config.grid_points)?;
    report_failures(&tube.report);
    let pass = tube.report.pass;
    let out = json!({ "command": "exceptional", "config": config, "pass": pass, "tube": tube });
    write_json(a.output.as_deref(), &out)?;
    Ok(pass_code(pass))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct OracleConfig {
    chart: ChartName,
    #[serde(default = "default_oracle_points")]
    grid: usize,
    #[serde(default = "default_step")]
    step: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_fiber_scale")]
    fiber_scale: f64,
    /// Tube parameters for `chart = tube`.
    #[serde(default)]
    tube: Option<TubeParams>,
}

fn default_oracle_points() -> usize {
    20
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_fiber_scale() -> f64 {
    0.5
}

#[derive(Serialize)]
struct OracleOutput {
    command: &'static str,
    config: OracleConfig,
    pass: bool,
    tolerance: f64,
    alignment_threshold: f64,
    max_rel_err: f64,
    max_alignment: f64,
    calibration: (f64, f64),
    rows: Vec<ComparisonRow>,
}

fn oracle_cmd(a: OracleArgs) -> Result<i32> {
    let mut map = overlay(
        a.config.as_deref(),
        vec![
            ("chart", a.chart.map(|c| serde_json::to_value(c).expect("enum"))),
            ("grid", a.grid.map(Value::from)),
            ("step", a.step.map(Value::from)),
            ("seed", a.seed.map(Value::from)),
            ("fiber_scale", a.fiber_scale.map(Value::from)),
        ],
    )?;
    let tube_pairs: Vec<_> = a.tube.pairs().into_iter().filter(|(_, v)| v.is_some()).collect();
    if !tube_pairs.is_empty() {
        let entry = map.entry("tube").or_insert_with(|| Value::Object(Map::new()));
        let obj = entry.as_object_mut().ok_or_else(|| Error::Config("`tube` must be an object".into()))?;
        for (k, v) in tube_pairs {
            obj.insert(k.to_string(), v.expect("filtered"));
        }
    }
    let config: OracleConfig = typed(map, "oracle configuration")?;
    let rows = oracle_rows(&config)?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let max_alignment = rows.iter().map(|r| r.alignment).fold(0.0, f64::max);
    let pass = max_rel_err <= ORACLE_TOLERANCE && max_alignment <= ALIGNMENT_THRESHOLD;
    if !pass {
        eprintln!("oracle mismatch: max rel_err {max_rel_err:e}, max alignment {max_alignment:e}");
    }
    let out = OracleOutput {
        command: "oracle-validate",
        calibration: oracle::calibrate_frame()?,
        config,
        pass,
        tolerance: ORACLE_TOLERANCE,
        alignment_threshold: ALIGNMENT_THRESHOLD,
        max_rel_err,
        max_alignment,
        rows,
    };
    write_json(a.output.as_deref(), &out)?;
    Ok(pass_code(pass))
}

fn oracle_rows(config: &OracleConfig) -> Result<Vec<ComparisonRow>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let step = config.step;
    match config.chart {
        ChartName::RoundS2 | ChartName::RoundS3 => {
            let d = if config.chart == ChartName::RoundS2 { 2 } else { 3 };
            let chart = oracle::chart_round_sphere(d);
            let mut rows = Vec::new();
            for _ in 0..config.grid {
                let x = oracle::random_point(&chart, &mut rng, 3.0 * step);
                let sample = oracle::ricci(&chart, &x, step)?;
                let expected = (d - 1) as f64;
                for (k, e) in sample.ricci_eigen.iter().enumerate() {
                    rows.push(ComparisonRow {
                        chart: chart.name.clone(),
                        point: x.clone(),
                        component: format!("eigen_{k}"),
                        closed_form: expected,
                        oracle: *e,
                        rel_err: oracle::rel_err(expected, *e),
                        alignment: 0.0,
                    });
                }
            }
            Ok(rows)
        }
        ChartName::RoundS4 => {
            let sin = Profile::sine(0.0, std::f64::consts::PI - oracle::CONE_MARGIN)?;
            let points = oracle::sample_doubly_warped(&sin, &sin, config.grid, config.seed, step)?;
            oracle::compare_doubly_warped(&sin, &sin, &points, step)
        }
        ChartName::Berger => {
            let chart = oracle::chart_berger_s3(config.fiber_scale, 1.0);
            let points: Vec<Vec<f64>> =
                (0..config.grid).map(|_| oracle::random_point(&chart, &mut rng, 3.0 * step)).collect();
            oracle::compare_berger(config.fiber_scale, &points, step)
        }
        ChartName::Tube => {
            let params =
                config.tube.as_ref().ok_or_else(|| Error::Config("chart `tube` needs tube parameters".into()))?;
            let design = assembly::design_tube(params)?;
            let points = oracle::sample_doubly_warped(&design.f, &design.h, config.grid, config.seed, step)?;
            oracle::compare_doubly_warped(&design.f, &design.h, &points, step)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExperimentConfig {
    #[serde(default = "default_family")]
    family: Family,
    #[serde(default = "default_from")]
    from: f64,
    #[serde(default = "default_to")]
    to: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default = "default_fiber_dim")]
    fiber_dim: u32,
    #[serde(default = "default_fiber_ricci")]
    fiber_ricci: f64,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
}

fn default_family() -> Family {
    Family::SineShell
}
fn default_from() -> f64 {
    0.1
}
fn default_to() -> f64 {
    1.2
}
fn default_steps() -> usize {
    12
}
fn default_fiber_dim() -> u32 {
    2
}
fn default_fiber_ricci() -> f64 {
    1.0
}

fn experiment_cmd(a: ExperimentArgs) -> Result<i32> {
    let pairs = vec![
        ("family", a.family.map(|f| serde_json::to_value(f).expect("enum"))),
        ("from", a.from.map(Value::from)),
        ("to", a.to.map(Value::from)),
        ("steps", a.steps.map(Value::from)),
        ("fiber_dim", a.fiber_dim.map(Value::from)),
        ("fiber_ricci", a.fiber_ricci.map(Value::from)),
        ("grid_points", a.grid_points.map(Value::from)),
    ];
    let config: ExperimentConfig = typed(overlay(a.config.as_deref(), pairs)?, "experiment configuration")?;
    if config.steps < 1 {
        return Err(Error::Config("steps must be >= 1".into()));
    }
    let ts: Vec<f64> = if config.steps == 1 {
        vec![config.from]
    } else {
        (0..config.steps)
            .map(|k| config.from + (config.to - config.from) * k as f64 / (config.steps - 1) as f64)
            .collect()
    };
    let family = match config.family {
        Family::SineShell => sine_shell_family(&ts)?,
        Family::Constant => constant_shell_family(&ts)?,
    };
    let rows = experiment_shell_scan(config.fiber_dim, config.fiber_ricci, &family, config.grid_points)?;
    let mut bytes = Vec::new();
    assembly::write_scan_csv(&rows, &mut bytes)?;
    write_atomic(a.output.as_deref(), &bytes)?;
    Ok(0)
}
