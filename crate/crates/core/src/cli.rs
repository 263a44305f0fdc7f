//! `optlaws` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceParams, GateResult};
use crate::features::{FeatureSet, Normalizer, PolicyRule};
use crate::io::{read_runs_csv, read_runs_csv_steps, to_sorted_json, StepUnits};
use crate::law::{fit_with_mode, rank, FitOptions, FittedLaw, LawMode, TrainingConfig};
use crate::schedule::CooldownShape;
use crate::sde::bounds::convergence_bound;
use crate::sde::{escape_bounds, gaussian_approx, simulate, Algorithm, NoiseModel, ObjectiveSpec, SdeConfig, SimulationReport};
use crate::sweep::{sweep_grid, write_grid_csv, Range, SweepSpec};
use crate::validate::run_validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "optlaws", version, about = "Fit, query and validate schedule-aware loss laws")]
pub struct Cli {
    /// Directory holding laws/, reports/ and the active-law pointer.
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a law to a run-log CSV.
    Fit(FitArgs),
    /// Predict the loss of one or more configurations.
    Predict(PredictArgs),
    /// Rank configurations by predicted loss, gated ones last.
    Rank(RankArgs),
    /// Evaluate the warmup divergence gate.
    Check(CheckArgs),
    /// Peak-rate × warmup grid of predicted losses.
    Sweep(SweepArgs),
    /// Run an SDE ensemble described by a JSON file.
    Simulate(SimulateArgs),
    /// Run the built-in validation suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Cooldown {
    Linear,
    Cosine,
}

impl From<Cooldown> for CooldownShape {
    fn from(c: Cooldown) -> Self {
        match c {
            Cooldown::Linear => CooldownShape::Linear,
            Cooldown::Cosine => CooldownShape::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Pretrain,
    Continual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Residual report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Law id inside the workspace; the fitted law becomes active.
    #[arg(long, default_value = "law")]
    pub name: String,
    #[arg(long, default_value = "16")]
    pub feature_set: FeatureSet,
    #[arg(long, default_value = "a1/a3/a2")]
    pub policy: PolicyRule,
    #[arg(long, value_enum, default_value = "pretrain")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1.5e-2)]
    pub lr_scale: f64,
    /// Tokens per sequence; with --batch, the CSV holds step counts.
    #[arg(long, requires = "batch")]
    pub token_length: Option<u64>,
    #[arg(long, requires = "token_length")]
    pub batch: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub law: Option<PathBuf>,
    /// JSON object or array of configurations.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub law: Option<PathBuf>,
    /// JSON array of configurations.
    #[arg(long)]
    pub configs: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TableFormat,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct GateArgs {
    #[arg(long)]
    pub c1_hat: Option<f64>,
    #[arg(long)]
    pub c2_hat: Option<f64>,
    #[arg(long)]
    pub c3_hat: Option<f64>,
    #[arg(long)]
    pub alpha1_hat: Option<f64>,
    #[arg(long)]
    pub alpha2_hat: Option<f64>,
}

impl GateArgs {
    fn params(&self) -> DivergenceParams {
        let d = DivergenceParams::default();
        DivergenceParams {
            c1_hat: self.c1_hat.unwrap_or(d.c1_hat),
            c2_hat: self.c2_hat.unwrap_or(d.c2_hat),
            c3_hat: self.c3_hat.unwrap_or(d.c3_hat),
            alpha1_hat: self.alpha1_hat.unwrap_or(d.alpha1_hat),
            alpha2_hat: self.alpha2_hat.unwrap_or(d.alpha2_hat),
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Normalized peak rate.
    #[arg(long)]
    pub eta_max: f64,
    /// Warmup length in billions of tokens.
    #[arg(long)]
    pub warmup: f64,
    /// Model size in billions of parameters.
    #[arg(long)]
    pub model: f64,
    /// Training length in billions of tokens.
    #[arg(long)]
    pub tokens: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub law: Option<PathBuf>,
    #[arg(long)]
    pub eta_min: f64,
    #[arg(long)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 20)]
    pub eta_steps: usize,
    #[arg(long)]
    pub warmup_min: f64,
    #[arg(long)]
    pub warmup_max: f64,
    #[arg(long, default_value_t = 20)]
    pub warmup_steps: usize,
    #[arg(long)]
    pub model: f64,
    #[arg(long)]
    pub tokens: f64,
    #[arg(long, default_value_t = crate::law::DIVERGED_LOSS)]
    pub sentinel: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub cooldown: Cooldown,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-path trace CSV (t, x_norm, grad_norm).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, env = "OPTLAWS_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, env = "OPTLAWS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Noise description inside a simulate input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default = "one")]
    pub samples: usize,
    #[serde(default)]
    pub resample: bool,
    #[serde(default = "one_f")]
    pub c_const: f64,
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn build(&self, dim: usize) -> Result<NoiseModel> {
        let base = match (&self.matrix, &self.diagonal, self.variance) {
            (Some(rows), _, _) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    bail!("noise matrix must be square");
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                NoiseModel::new(DMatrix::from_row_slice(n, n, &flat), self.samples)?
            }
            (None, Some(d), _) => NoiseModel::diagonal(d, self.samples)?,
            (None, None, Some(v)) => NoiseModel::isotropic(dim, v, self.samples)?,
            _ => bail!("noise needs one of variance, diagonal or matrix"),
        };
        Ok(base.with_resampling(self.resample).with_c_const(self.c_const))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateInput {
    pub objective: ObjectiveSpec,
    pub noise: NoiseSpec,
    pub sde: SdeConfig,
}

#[derive(Debug, Clone, Serialize)]
struct Invariant {
    name: &'static str,
    passed: bool,
    observed: f64,
    limit: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SimulateOutput {
    config: SimulateInput,
    statistics: SimulationReport,
    bound: Option<crate::sde::bounds::ConvergenceBound>,
    position_trace: Option<f64>,
    invariants: Vec<Invariant>,
    passed: bool,
}

#[derive(Debug, Clone, Serialize)]
struct ResidualRow {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    observed_log_loss: f64,
    predicted_log_loss: f64,
    residual: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FitReport {
    rows: usize,
    skipped_divergent: usize,
    residual_rms: f64,
    max_abs_residual: f64,
    condition_number: f64,
    residuals: Vec<ResidualRow>,
}

#[derive(Debug, Clone, Serialize)]
struct PredictionRow {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    log_loss: f64,
    loss: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CheckOutput {
    eta_max: f64,
    warmup: f64,
    model: f64,
    tokens: f64,
    #[serde(flatten)]
    result: GateResult,
}

struct Workspace {
    root: PathBuf,
}

impl Workspace {
    fn laws(&self) -> PathBuf {
        self.root.join("laws")
    }

    fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    fn active_pointer(&self) -> PathBuf {
        self.root.join("active_law")
    }

    fn law_path(&self, id: &str) -> PathBuf {
        self.laws().join(format!("{id}.json"))
    }

    fn active_law(&self) -> Result<PathBuf> {
        let p = self.active_pointer();
        let id = fs::read_to_string(&p).with_context(|| format!("workspace has no active law ({})", p.display()))?;
        Ok(self.law_path(id.trim()))
    }

    fn save_law(&self, id: &str, json: &str) -> Result<PathBuf> {
        fs::create_dir_all(self.laws())?;
        let path = self.law_path(id);
        fs::write(&path, json)?;
        fs::write(self.active_pointer(), format!("{id}\n"))?;
        Ok(path)
    }
}

struct Ctx<'a> {
    workspace: Option<Workspace>,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                fs::write(p, text).with_context(|| format!("writing {}", p.display()))
            }
            None => {
                self.stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn load_law(&self, explicit: Option<&Path>) -> Result<FittedLaw> {
        let path = match (explicit, &self.workspace) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(ws)) => ws.active_law()?,
            (None, None) => bail!("no law given: pass --law or a --workspace with an active law"),
        };
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing law {}", path.display()))
    }

    fn report_path(&self, explicit: Option<&Path>, name: &str) -> Option<PathBuf> {
        explicit.map(Path::to_path_buf).or_else(|| self.workspace.as_ref().map(|w| w.reports().join(name)))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_configs(path: &Path) -> Result<(Vec<TrainingConfig>, bool)> {
    let value: serde_json::Value = read_json(path)?;
    if value.is_array() {
        Ok((serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?, true))
    } else {
        Ok((vec![serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?], false))
    }
}

fn cmd_fit(ctx: &mut Ctx, a: &FitArgs) -> Result<i32> {
    let normalizer = Normalizer { lr_scale: a.lr_scale, ..Normalizer::default() };
    let file = fs::File::open(&a.runs).with_context(|| format!("opening {}", a.runs.display()))?;
    let records = match (a.token_length, a.batch) {
        (Some(token_length), Some(batch)) => read_runs_csv_steps(file, StepUnits { token_length, batch, normalizer })?,
        _ => read_runs_csv(file)?,
    };
    let options = FitOptions { powers: Default::default(), policy: a.policy, feature_set: a.feature_set, normalizer };
    let mode = match a.mode {
        Mode::Pretrain => LawMode::Pretrain,
        Mode::Continual => LawMode::Continual,
    };
    let law = fit_with_mode(&records, options, mode)?;
    let json = law.to_json();
    if let Some(ws) = &ctx.workspace {
        ws.save_law(&a.name, &json)?;
    }
    if a.out.is_some() || ctx.workspace.is_none() {
        ctx.emit(a.out.as_deref(), &json)?;
    }
    let mut residuals = Vec::new();
    for (index, r) in records.iter().enumerate().filter(|(_, r)| !r.diverged) {
        let predicted = law.predict(&r.config)?.log_loss;
        let observed = r.loss.ln();
        residuals.push(ResidualRow {
            index,
            label: r.config.label.clone(),
            observed_log_loss: observed,
            predicted_log_loss: predicted,
            residual: observed - predicted,
        });
    }
    let report = FitReport {
        rows: law.rows,
        skipped_divergent: records.iter().filter(|r| r.diverged).count(),
        residual_rms: law.residual_rms,
        max_abs_residual: law.max_abs_residual,
        condition_number: law.condition_number,
        residuals,
    };
    if let Some(p) = ctx.report_path(a.report.as_deref(), &format!("{}_fit.json", a.name)) {
        ctx.emit(Some(&p), &to_sorted_json(&report))?;
    }
    Ok(EXIT_OK)
}

fn cmd_predict(ctx: &mut Ctx, a: &PredictArgs) -> Result<i32> {
    let law = ctx.load_law(a.law.as_deref())?;
    let (configs, many) = read_configs(&a.config)?;
    if configs.is_empty() {
        bail!("configuration list is empty");
    }
    let mut rows = Vec::with_capacity(configs.len());
    for (index, c) in configs.iter().enumerate() {
        let p = law.predict(c).with_context(|| format!("configuration {index}"))?;
        rows.push(PredictionRow { index, label: c.label.clone(), log_loss: p.log_loss, loss: p.loss });
    }
    let text = if many { to_sorted_json(&rows) } else { to_sorted_json(&rows[0]) };
    ctx.emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_rank(ctx: &mut Ctx, a: &RankArgs) -> Result<i32> {
    let law = ctx.load_law(a.law.as_deref())?;
    let (configs, _) = read_configs(&a.configs)?;
    let entries = rank(&law, &configs, &a.gate.params())?;
    let text = match a.format {
        TableFormat::Json => to_sorted_json(&entries),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["rank", "index", "label", "eta_max", "a1_B", "log_loss", "loss", "R", "eta_L", "verdict"])?;
            for e in &entries {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([
                    e.rank.to_string(),
                    e.index.to_string(),
                    e.label.clone().unwrap_or_default(),
                    e.eta_max.to_string(),
                    e.a1.to_string(),
                    opt(e.log_loss),
                    opt(e.loss),
                    e.r.to_string(),
                    e.eta_l.to_string(),
                    format!("{:?}", e.verdict).to_lowercase(),
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?
        }
    };
    ctx.emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_check(ctx: &mut Ctx, a: &CheckArgs) -> Result<i32> {
    let result = a.gate.params().criterion(a.eta_max, a.warmup, a.model, a.tokens)?;
    let out = CheckOutput { eta_max: a.eta_max, warmup: a.warmup, model: a.model, tokens: a.tokens, result };
    ctx.emit(a.out.as_deref(), &to_sorted_json(&out))?;
    Ok(EXIT_OK)
}

fn cmd_sweep(ctx: &mut Ctx, a: &SweepArgs) -> Result<i32> {
    let law = ctx.load_law(a.law.as_deref())?;
    let spec = SweepSpec {
        eta: Range::new(a.eta_min, a.eta_max, a.eta_steps),
        warmup: Range::new(a.warmup_min, a.warmup_max, a.warmup_steps),
        model: a.model,
        tokens: a.tokens,
        cooldown: a.cooldown.into(),
        sentinel: a.sentinel,
    };
    let rows = sweep_grid(&law, &a.gate.params(), &spec)?;
    let mut buf = Vec::new();
    write_grid_csv(&mut buf, &rows)?;
    ctx.emit(a.out.as_deref(), &String::from_utf8(buf)?)?;
    Ok(EXIT_OK)
}

/// Runs a simulate input and checks the invariants that apply to it.
pub fn run_simulation(input: &SimulateInput) -> Result<(serde_json::Value, bool, SimulationReport)> {
    let obj = input.objective.build()?;
    let noise = input.noise.build(obj.dim())?;
    let cfg = &input.sde;
    let report = simulate(obj.as_ref(), &noise, cfg)?;
    let t = cfg.horizon();
    let x0 = cfg.x0.clone().or_else(|| obj.minimizer()).unwrap_or_else(|| vec![0.0; obj.dim()]);
    let mut invariants = Vec::new();
    let bound = if obj.min_value().is_some() {
        let b = convergence_bound(cfg.algorithm, obj.as_ref(), &noise, &cfg.schedule, t, cfg.eta0, &x0, cfg.adam, cfg.m0.as_deref(), cfg.v0.as_deref(), report.max_v, None)?;
        let stat = match cfg.algorithm {
            Algorithm::Sgd => report.grad_sq_avg,
            Algorithm::Adam => report.momentum_sq_avg.expect("adam reports momentum"),
        };
        invariants.push(Invariant { name: "bound_dominates", passed: stat.within(b.value, 3.0), observed: stat.mean, limit: b.value });
        Some(b)
    } else {
        None
    };
    if let Some(v) = report.min_v {
        invariants.push(Invariant { name: "v_nonnegative", passed: v >= 0.0, observed: v, limit: 0.0 });
    }
    if let (Algorithm::Adam, Some(ell)) = (cfg.algorithm, obj.value_lipschitz()) {
        let worst = report.momentum_mean.iter().map(|r| r.mean_norm - 3.0 * r.std_err).fold(f64::NEG_INFINITY, f64::max);
        invariants.push(Invariant { name: "momentum_mean_bounded", passed: worst <= ell, observed: worst, limit: ell });
    }
    let mut position_trace = None;
    if !cfg.eps.is_empty() {
        let x_star = cfg.x_star.clone().or_else(|| obj.minimizer()).unwrap_or_else(|| x0.clone());
        let stationary_start = x0 == x_star;
        if stationary_start {
            if let Ok(ga) = gaussian_approx(obj.as_ref(), &noise, &cfg.schedule, &x_star, cfg.algorithm, &cfg.adam, cfg.eta0, &[t]) {
                let tr = ga.position_trace(0);
                position_trace = Some(tr);
                if tr > 0.0 {
                    for row in &report.trapping {
                        let b = escape_bounds(tr, row.eps, &cfg.schedule, noise.trace())?;
                        invariants.push(Invariant {
                            name: "trapping_bound",
                            passed: row.frequency.within(b.trapped_upper, 3.0),
                            observed: row.frequency.mean,
                            limit: b.trapped_upper,
                        });
                    }
                }
            }
        }
    }
    let passed = invariants.iter().all(|i| i.passed);
    let out = SimulateOutput { config: input.clone(), statistics: report.clone(), bound, position_trace, invariants, passed };
    Ok((serde_json::to_value(&out)?, passed, report))
}

fn cmd_simulate(ctx: &mut Ctx, a: &SimulateArgs) -> Result<i32> {
    let mut input: SimulateInput = read_json(&a.config)?;
    if let Some(seed) = a.seed {
        input.sde.seed = seed;
    }
    if a.trace.is_some() && input.sde.trace_paths == 0 {
        input.sde.trace_paths = 1;
    }
    let (value, passed, report) = run_simulation(&input)?;
    let out = a.out.clone().or_else(|| ctx.report_path(None, "simulate.json"));
    ctx.emit(out.as_deref(), &to_sorted_json(&value))?;
    if let Some(p) = &a.trace {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["path", "t", "x_norm", "grad_norm"])?;
        for r in &report.traces {
            w.write_record([r.path.to_string(), r.t.to_string(), r.x_norm.to_string(), r.grad_norm.to_string()])?;
        }
        ctx.emit(Some(p), &String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?)?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_validate(ctx: &mut Ctx, a: &ValidateArgs) -> Result<i32> {
    let report = run_validation(a.seed)?;
    let out = a.out.clone().or_else(|| ctx.report_path(None, "validate.json"));
    ctx.emit(out.as_deref(), &to_sorted_json(&report))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}

/// Parses `args` (including the program name) and runs the command.
/// Errors go to `stderr`; the return value is the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let mut ctx = Ctx { workspace: cli.workspace.map(|root| Workspace { root }), stdout };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(&mut ctx, a),
        Command::Predict(a) => cmd_predict(&mut ctx, a),
        Command::Rank(a) => cmd_rank(&mut ctx, a),
        Command::Check(a) => cmd_check(&mut ctx, a),
        Command::Sweep(a) => cmd_sweep(&mut ctx, a),
        Command::Simulate(a) => cmd_simulate(&mut ctx, a),
        Command::Validate(a) => cmd_validate(&mut ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_USAGE
        }
    }
}
