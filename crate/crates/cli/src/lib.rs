//! Batch experiment runner for `framelab`.
//!
//! Every subcommand computes all of its outputs in memory and writes them at
//! the end, so a failing run leaves no partial files behind.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use framelab::classify::{witness_basis, SchauderHypothesis};
use framelab::frame::build_converter;
use framelab::gallery;
use framelab::kaczmarz::{auxiliary_sequence, herr_weber_table, kaczmarz_run, verify_identity, ExponentialSpace};
use framelab::measures::{density_criteria, gram_spectrum, singular_divergence_probe, CRITERIA_WINDOWS};
use framelab::{
    class_flags, ClassifyOptions, CoefficientSpaceElement, DenseMatrix, ExponentialWindow, LadderLevel, LadderSchedule,
    MeasureModel, SequenceSpec, SpectralTolerance, WitnessKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "framelab", version, about = "Frame classification and exponential-system experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative rank tolerance.
    #[arg(long = "tol-rank", global = true)]
    pub tol_rank: Option<f64>,
    /// Lower-bound threshold for the trend tests.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Number of singular values kept per level.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Trailing ladder levels inspected by the trend tests.
    #[arg(long, global = true)]
    pub window: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a sequence along a truncation ladder.
    Classify(ClassifyArgs),
    /// Build the Parseval converter at one level.
    Convert(ConvertArgs),
    /// List the named sequences and measures.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Gram spectra and divergence probe for exponentials in L^2(mu).
    Exponentials(ExponentialsArgs),
    /// Kaczmarz reconstruction with the auxiliary sequence.
    Kaczmarz(KaczmarzArgs),
}

#[derive(Debug, Subcommand)]
pub enum GalleryAction {
    List {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessArg {
    Singular,
    ZeroSum,
    BlockRange,
    Full,
}

impl From<WitnessArg> for WitnessKind {
    fn from(w: WitnessArg) -> Self {
        match w {
            WitnessArg::Singular => WitnessKind::Singular,
            WitnessArg::ZeroSum => WitnessKind::ZeroSum,
            WitnessArg::BlockRange => WitnessKind::BlockRange,
            WitnessArg::Full => WitnessKind::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchauderArg {
    Unconditional,
    NormalizedBessel,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    /// `gallery:NAME`, a JSON file, or inline JSON.
    #[arg(long)]
    pub spec: String,
    /// `d=16..512:x2`, `d=16..512:+16` or `d=16,32,64`.
    #[arg(long)]
    pub ladder: String,
    /// Witness subspaces for the converter (defaults to the gallery's choice).
    #[arg(long = "witness", value_enum)]
    pub witnesses: Vec<WitnessArg>,
    /// Assert a hypothesis class and run the norm criterion.
    #[arg(long, value_enum)]
    pub schauder: Option<SchauderArg>,
    /// Rank deficiency tolerated by the completeness check.
    #[arg(long, default_value_t = 0)]
    pub declared_deficiency: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvertArgs {
    #[arg(long)]
    pub spec: String,
    /// Ladder level (truncation size).
    #[arg(long)]
    pub d: usize,
    /// Number of vectors, if not the generator's natural count.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "full")]
    pub witness: WitnessArg,
    /// JSON file with an orthonormal basis `{"re": [[..]], "im": [[..]]}`; overrides `--witness`.
    #[arg(long)]
    pub subspace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExponentialsArgs {
    /// Gallery measure name, a JSON file, or inline JSON.
    #[arg(long)]
    pub measure: String,
    /// Half-widths W of the windows [-W, W].
    #[arg(long, value_delimiter = ',', default_values_t = CRITERIA_WINDOWS.to_vec())]
    pub half_widths: Vec<usize>,
    /// Largest M of the divergence probe; defaults to 3^8 for singular measures.
    #[arg(long)]
    pub probe_max: Option<usize>,
    /// Probe function e^{2 pi i K x}.
    #[arg(long, default_value_t = 0)]
    pub probe_frequency: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KaczmarzArgs {
    #[arg(long, default_value = "cantor")]
    pub measure: String,
    /// One-sided window [0, W].
    #[arg(long, default_value_t = 256)]
    pub window_max: i64,
    /// `random` (seeded Gaussian coefficients) or `exp:K`.
    #[arg(long, default_value = "random")]
    pub f: String,
    /// Random functions used to check the Kaczmarz/auxiliary identity.
    #[arg(long, default_value_t = 10)]
    pub identity_samples: usize,
    /// Cyclic re-sweeps of the window (beyond the single pass).
    #[arg(long, default_value_t = 0)]
    pub sweeps: usize,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(framelab::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(e) if e.is_config_error() => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn invariant(&self) -> &'static str {
        match self {
            CliError::Config(_) => "Config",
            CliError::Io(_) => "Io",
            CliError::Numeric(e) => e.invariant_name(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl From<framelab::Error> for CliError {
    fn from(e: framelab::Error) -> Self {
        CliError::Numeric(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("framelab: error [{}]: {e}", e.invariant());
            e.exit_code()
        }
    }
}

/// Applies `FRAMELAB_THREADS` to the global rayon pool. Only the first call
/// in a process takes effect.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("FRAMELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("FRAMELAB_THREADS must be a positive integer, got '{v}'")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let g = &cli.global;
    match &cli.command {
        Command::Classify(a) => run_classify(g, a),
        Command::Convert(a) => run_convert(g, a),
        Command::Gallery { action: GalleryAction::List { json } } => {
            print!("{}", run_gallery_list(*json)?);
            Ok(())
        }
        Command::Exponentials(a) => run_exponentials(g, a),
        Command::Kaczmarz(a) => run_kaczmarz(g, a),
    }
}

fn tolerance(g: &GlobalArgs) -> CliResult<SpectralTolerance> {
    let d = SpectralTolerance::default();
    Ok(SpectralTolerance::new(g.tol_rank.unwrap_or(d.rank_tol), d.sym_tol)?)
}

fn classify_options(g: &GlobalArgs) -> CliResult<ClassifyOptions> {
    let mut o = ClassifyOptions { tol: tolerance(g)?, ..ClassifyOptions::default() };
    if let Some(t) = g.tau {
        o.tau = t;
    }
    if let Some(k) = g.kmax {
        o.k_max = k;
    }
    if let Some(w) = g.window {
        o.window = w;
    }
    o.validate()?;
    Ok(o)
}

fn read_text(source: &str) -> CliResult<String> {
    let trimmed = source.trim_start();
    if trimmed.starts_with('{') {
        return Ok(source.to_string());
    }
    fs::read_to_string(source).map_err(|e| CliError::Config(format!("cannot read '{source}': {e}")))
}

/// `gallery:NAME`, a bare gallery name, a JSON file or inline JSON.
pub fn load_spec(source: &str) -> CliResult<SequenceSpec> {
    if let Ok(s) = gallery::spec(source) {
        return Ok(s);
    }
    if source.starts_with("gallery:") {
        return Err(gallery::spec(source).unwrap_err().into());
    }
    let spec = SequenceSpec::from_json(&read_text(source)?)?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_measure(source: &str) -> CliResult<MeasureModel> {
    if let Ok(m) = gallery::measure(source) {
        return Ok(m);
    }
    if source.starts_with("gallery:") || !(source.trim_start().starts_with('{') || Path::new(source).exists()) {
        return Err(gallery::measure(source).unwrap_err().into());
    }
    Ok(MeasureModel::from_json(&read_text(source)?)?)
}

/// Hash of the canonical JSON form of the configuration.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

fn envelope(command: &str, g: &GlobalArgs, args: &impl Serialize, tolerances: Value, result: Value) -> Value {
    let config = json!({ "command": command, "global": g, "args": args });
    json!({
        "tool": "framelab",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": config_hash(&config),
        "config": config,
        "tolerances": tolerances,
        "result": result,
    })
}

fn to_value(v: &impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Io(format!("serialization failed: {e}")))
}

fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<Vec<u8>> {
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

fn json_bytes(v: &Value) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> CliResult<()> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("cannot write '{}': {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

pub fn run_classify(g: &GlobalArgs, a: &ClassifyArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let ladder: LadderSchedule = a.ladder.parse()?;
    let mut opts = classify_options(g)?;
    opts.declared_deficiency = a.declared_deficiency;
    opts.schauder = a.schauder.map(|s| match s {
        SchauderArg::Unconditional => SchauderHypothesis::UnconditionalSchauderBasis,
        SchauderArg::NormalizedBessel => SchauderHypothesis::NormalizedBesselBound,
    });
    if !a.witnesses.is_empty() {
        opts.witnesses = a.witnesses.iter().map(|&w| w.into()).collect();
    } else if let Ok(e) = gallery::entry(&a.spec) {
        opts.witnesses = e.witnesses;
    }
    let report = class_flags(&spec, &ladder, &opts)?;
    let csv = csv_bytes(&["level_d", "level_N", "k", "sigma_k"], report.certificates.sigma_profile.csv_rows())?;
    let doc = envelope("classify", g, a, to_value(&opts)?, to_value(&report)?);
    write_outputs(&g.out, &[("report.json", json_bytes(&doc)?), ("sigma_profile.csv", csv)])
}

fn matrix_json(m: &DenseMatrix) -> Value {
    let part = |f: fn(&framelab::C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "rows": m.nrows(), "cols": m.ncols(), "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn matrix_from_json(v: &Value) -> CliResult<DenseMatrix> {
    let bad = |m: &str| CliError::Config(format!("subspace matrix: {m}"));
    let grid = |key: &str| -> CliResult<Vec<Vec<f64>>> {
        match v.get(key) {
            None => Ok(vec![]),
            Some(x) => serde_json::from_value(x.clone()).map_err(|e| bad(&e.to_string())),
        }
    };
    let (re, im) = (grid("re")?, grid("im")?);
    let rows = re.len();
    let cols = re.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || re.iter().any(|r| r.len() != cols) {
        return Err(bad("'re' must be a non-empty rectangular array"));
    }
    if !im.is_empty() && (im.len() != rows || im.iter().any(|r| r.len() != cols)) {
        return Err(bad("'im' must match the shape of 're'"));
    }
    let imv = |i: usize, j: usize| if im.is_empty() { 0.0 } else { im[i][j] };
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| framelab::C64::new(re[i][j], imv(i, j)))?)
}

pub fn run_convert(g: &GlobalArgs, a: &ConvertArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    if a.d == 0 {
        return Err(CliError::Config("--d must be positive".into()));
    }
    let tol = tolerance(g)?;
    let opts = classify_options(g)?;
    let level = match a.n {
        Some(n) => LadderLevel::with_count(a.d, n),
        None => LadderLevel::new(a.d),
    };
    let seq = spec.truncate(level)?;
    let q = match &a.subspace {
        Some(p) => {
            let text = read_text(&p.to_string_lossy())?;
            let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("subspace file: {e}")))?;
            matrix_from_json(&v)?
        }
        None => witness_basis(a.witness.into(), level, &seq, opts.tau)?,
    };
    let c = build_converter(&seq, &q, &tol)?;
    let result = json!({
        "level": level,
        "ambient_dim": c.ambient_dim,
        "subspace_dim": c.subspace_dim,
        "rank": c.rank,
        "parseval_residual": c.parseval_residual,
        "restricted_bounds": to_value(&c.restricted_bounds)?,
        "surjective_flag": c.surjective_flag,
        "injective_flag": c.injective_flag,
        "verified": c.verified,
    });
    let doc = envelope("convert", g, a, to_value(&tol)?, result);
    write_outputs(
        &g.out,
        &[("converter_b.json", json_bytes(&matrix_json(&c.b))?), ("converter_report.json", json_bytes(&doc)?)],
    )
}

/// Table (or JSON) of the gallery sequences and measures.
pub fn run_gallery_list(as_json: bool) -> CliResult<String> {
    let entries = gallery::entries();
    if as_json {
        let doc = json!({ "sequences": to_value(&entries)?, "measures": gallery::MEASURE_NAMES });
        return String::from_utf8(json_bytes(&doc)?).map_err(|e| CliError::Io(e.to_string()));
    }
    let mut out = String::from("sequences:\n");
    for e in &entries {
        out.push_str(&format!("  {:<26} {:<16} {}\n", e.name, e.suggested_ladder, e.description));
    }
    out.push_str("measures:\n");
    for m in gallery::MEASURE_NAMES {
        out.push_str(&format!("  {m}\n"));
    }
    Ok(out)
}

pub fn run_exponentials(g: &GlobalArgs, a: &ExponentialsArgs) -> CliResult<()> {
    let model = load_measure(&a.measure)?;
    if a.half_widths.is_empty() {
        return Err(CliError::Config("--half-widths is empty".into()));
    }
    let spectrum = gram_spectrum(&model, &a.half_widths)?;
    let tau = g.tau.unwrap_or(framelab::classify::DEFAULT_TAU);
    let criteria = density_criteria(&model, tau)?;
    let mut files = vec![(
        "gram_spectrum.csv",
        csv_bytes(
            &["window", "lambda_min", "lambda_max"],
            spectrum.iter().map(|r| (r.window, r.lambda_min, r.lambda_max)),
        )?,
    )];
    let singular_only = model.is_purely_singular() && model.atoms.is_empty();
    let probe_max = a.probe_max.or(singular_only.then_some(3usize.pow(8)));
    let mut probe_summary = Value::Null;
    if let Some(m) = probe_max {
        let window = ExponentialWindow::new(a.probe_frequency, a.probe_frequency)?;
        let f = CoefficientSpaceElement::exponential(window, a.probe_frequency)?;
        let probe = singular_divergence_probe(&model, &f, m, true)?;
        let checkpoints: Vec<Value> = (0..)
            .map(|k| 3usize.pow(k))
            .take_while(|&c| c <= m)
            .map(|c| {
                let before = if c == 0 { 0.0 } else { probe.rows[c - 1].1 };
                json!({ "M": c, "partial_sum": probe.rows[c].1, "jump": probe.rows[c].1 - before })
            })
            .collect();
        probe_summary = json!({
            "frequency": a.probe_frequency,
            "m_max": m,
            "final_partial_sum": probe.rows[m].1,
            "relative_increment": probe.relative_increment,
            "divergent": probe.divergent,
            "checkpoints": checkpoints,
        });
        files.push(("divergence.csv", csv_bytes(&["M", "partial_sum"], probe.rows.iter().copied())?));
    }
    let result = json!({
        "measure": to_value(&model)?,
        "spectrum": to_value(&spectrum)?,
        "criteria": to_value(&criteria)?,
        "divergence": probe_summary,
    });
    let doc = envelope("exponentials", g, a, json!({ "tau": tau }), result);
    files.push(("exponentials_report.json", json_bytes(&doc)?));
    write_outputs(&g.out, &files)
}

fn parse_f(text: &str, space: &ExponentialSpace, rng: &mut ChaCha8Rng) -> CliResult<CoefficientSpaceElement> {
    if text == "random" {
        return Ok(space.random_element(rng));
    }
    let k: i64 = text
        .strip_prefix("exp:")
        .and_then(|k| k.parse().ok())
        .ok_or_else(|| CliError::Config(format!("--f must be 'random' or 'exp:K', got '{text}'")))?;
    Ok(space.exponential(k)?)
}

pub fn run_kaczmarz(g: &GlobalArgs, a: &KaczmarzArgs) -> CliResult<()> {
    let model = load_measure(&a.measure)?;
    let window = ExponentialWindow::one_sided(a.window_max)?;
    let space = ExponentialSpace::new(&model, window)?;
    let aux = auxiliary_sequence(&space, window.len() - 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let f = parse_f(&a.f, &space, &mut rng)?;
    let rows = herr_weber_table(&space, &aux, &f)?;
    let identity = verify_identity(&space, &aux, a.identity_samples, &mut rng)?;
    let fnorm = space.norm(&f)?;
    let at = |n: usize| rows.get(n).map(|r| r.residual);
    let mut files = vec![(
        "kaczmarz.csv",
        csv_bytes(&["N", "residual", "parseval_defect"], rows.iter().map(|r| (r.n, r.residual, r.parseval_defect)))?,
    )];
    let mut sweep_errors = Vec::new();
    if a.sweeps > 0 {
        let order = (0..a.sweeps).flat_map(|_| window.frequencies());
        let state = kaczmarz_run(&space, &f, order)?;
        let per = window.len();
        sweep_errors = state.errors.chunks(per).map(|c| *c.last().unwrap()).collect();
        files.push((
            "kaczmarz_sweeps.csv",
            csv_bytes(&["sweep", "error"], sweep_errors.iter().enumerate().map(|(i, e)| (i + 1, *e)))?,
        ));
    }
    let result = json!({
        "measure": to_value(&model)?,
        "window": window,
        "f_norm": fnorm,
        "identity_max_deviation": identity,
        "residual_16": at(16),
        "residual_last": rows.last().map(|r| r.residual),
        "ratio_last_over_16": match (rows.last(), at(16)) {
            (Some(l), Some(r)) if r > 0.0 => Some(l.residual / r),
            _ => None,
        },
        "min_parseval_defect": rows.iter().map(|r| r.parseval_defect).fold(f64::INFINITY, f64::min),
        "sweep_errors": sweep_errors,
        "sweeps_note": "re-sweeps cycle the window repeatedly and go beyond the single-pass reconstruction",
    });
    let doc = envelope("kaczmarz", g, a, json!({ "unit_tol": framelab::kaczmarz::UNIT_TOL }), result);
    files.push(("kaczmarz_report.json", json_bytes(&doc)?));
    write_outputs(&g.out, &files)
}
