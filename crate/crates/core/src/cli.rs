//! The `hvtorus` command line: brackets, Jacobi fuzzing, dimension tables and experiments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{rational2, rational4, ConstructionDescriptor, Epsilon};
use crate::exactla::{fmt_rational, serde_rational, Rational};
use crate::experiments::{
    decomposition_check, dim_rows, ghw_scan, growth_experiment, heisenberg_irreducibility_probe,
    stabilization_experiment, support_properties_check, witness_ranks, DecompositionReport, DimRow, GhwHit,
    SupportReport, SweepReport, WitnessReport,
};
use crate::exppoly::RhoSpec;
use crate::gradmod::{quotient_dims_by_rank, ModuleError, Truncation};
use crate::hvr2::{bracket, jacobi_defect_with, parse_element, BasisSymbol, BracketFn, LieElement, ParseError};
use crate::lattice::{lv, BasisPair};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "hvtorus", version, about = "Rank-two Heisenberg-Virasoro algebra computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Expected verdict; exit code 1 when the result differs.
    #[arg(long, global = true)]
    pub expect: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracket of two elements, e.g. `t[1,0]` `E[0,1]`.
    Bracket { left: String, right: String },
    /// Antisymmetry and Jacobi identity on random basis triples.
    JacobiFuzz {
        #[arg(long)]
        window: Option<i64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Dimension table of a construction.
    Dims,
    /// Run an experiment and report its verdict.
    Experiment,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub construction: Option<ConstructionDescriptor>,
    #[serde(default)]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default)]
    pub rho: Option<RhoSpec>,
    #[serde(default)]
    pub sweep: Option<Vec<i64>>,
    #[serde(default)]
    pub window: Option<i64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

fn default_lambda() -> [Rational; 2] {
    [Rational::from_integer(0.into()), Rational::from_integer(0.into())]
}

fn default_levels() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Stabilization {
        #[serde(default)]
        rho: Option<RhoSpec>,
        #[serde(default)]
        basis: BasisPair,
        #[serde(default = "default_levels")]
        levels: u32,
        #[serde(default)]
        sweep: Vec<i64>,
    },
    Growth {
        #[serde(with = "rational4")]
        c: [Rational; 4],
        epsilon: Epsilon,
        #[serde(default)]
        basis: BasisPair,
        #[serde(default)]
        sweep: Vec<i64>,
        #[serde(default = "default_lambda", with = "rational2")]
        lambda: [Rational; 2],
        /// Also report witness-family ranks per setting.
        #[serde(default)]
        witness: bool,
    },
    Irreducibility {
        construction: ConstructionDescriptor,
        #[serde(with = "serde_rational")]
        a: Rational,
    },
    Support {
        construction: ConstructionDescriptor,
        #[serde(default)]
        check_basis: Option<BasisPair>,
    },
    Decomposition {
        #[serde(default)]
        rho: Option<RhoSpec>,
        #[serde(default)]
        basis: BasisPair,
        truncation: Truncation,
    },
    GhwScan {
        construction: ConstructionDescriptor,
        bases: Vec<BasisPair>,
    },
}

/// Result of one command: serialized payload plus the verdict compared against `--expect`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub verdict: Option<String>,
    pub json: String,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzFailure {
    pub check: String,
    pub x: String,
    pub y: String,
    pub z: String,
    pub defect: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub window: i64,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
    pub failure: Option<FuzzFailure>,
}

/// Every E, t symbol with coordinates in [-N, N]^2, then K1..K4, d1, d2.
pub fn window_symbols(window: i64) -> Vec<BasisSymbol> {
    let mut out = Vec::new();
    for m1 in -window..=window {
        for m2 in -window..=window {
            out.push(BasisSymbol::E(lv(m1, m2)));
            out.push(BasisSymbol::T(lv(m1, m2)));
        }
    }
    out.extend((1..=4).map(BasisSymbol::K));
    out.extend((1..=2).map(BasisSymbol::D));
    out
}

pub fn jacobi_fuzz_with(br: BracketFn, window: i64, trials: usize, seed: u64) -> Result<FuzzReport, CliError> {
    if trials == 0 {
        return Err(CliError::Config("jacobi-fuzz needs trials >= 1".into()));
    }
    if window < 0 {
        return Err(CliError::Config("jacobi-fuzz needs window >= 0".into()));
    }
    let syms = window_symbols(window);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    for _ in 0..trials {
        let [x, y, z] = [0; 3].map(|_| LieElement::sym(syms[rng.gen_range(0..syms.len())]));
        let mut anti = br(&x, &y);
        anti.add_scaled(&br(&y, &x), &Rational::from_integer(1.into()));
        if !anti.is_zero() {
            failure = Some(("antisymmetry", x, y, z, anti));
            break;
        }
        let d = jacobi_defect_with(br, &x, &y, &z);
        if !d.is_zero() {
            failure = Some(("jacobi", x, y, z, d));
            break;
        }
    }
    let failure = failure.map(|(check, x, y, z, d)| FuzzFailure {
        check: check.into(),
        x: x.to_string(),
        y: y.to_string(),
        z: z.to_string(),
        defect: d.to_string(),
    });
    Ok(FuzzReport { window, trials, seed, pass: failure.is_none(), failure })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn rows_csv(header: &str, rows: impl IntoIterator<Item = (Option<i64>, DimRow)>) -> String {
    let mut s = String::new();
    s.push_str(header);
    s.push('\n');
    for (setting, r) in rows {
        if let Some(k) = setting {
            let _ = write!(s, "{k},");
        }
        let _ = writeln!(s, "{},{},{}", r.offset_b1, r.offset_b2, r.dim);
    }
    s
}

const SETTING_HEADER: &str = "setting,offset_b1,offset_b2,dim";

#[derive(Serialize)]
struct DimsOutput<'a> {
    construction: String,
    module: &'a str,
    basis: BasisPair,
    base: [String; 2],
    rows: Vec<DimRow>,
}

pub fn cmd_bracket(left: &str, right: &str) -> Result<Outcome, CliError> {
    let x = parse_element(left)?;
    let y = parse_element(right)?;
    let r = bracket(&x, &y).to_string();
    Ok(Outcome { verdict: None, json: to_json(&serde_json::json!({ "left": left, "right": right, "bracket": r })), csv: format!("{r}\n") })
}

pub fn cmd_jacobi_fuzz(window: i64, trials: usize, seed: u64) -> Result<Outcome, CliError> {
    let rep = jacobi_fuzz_with(bracket, window, trials, seed)?;
    let verdict = if rep.pass { "pass" } else { "fail" };
    let csv = format!("window,trials,seed,pass\n{},{},{},{}\n", rep.window, rep.trials, rep.seed, rep.pass);
    Ok(Outcome { verdict: Some(verdict.into()), json: to_json(&rep), csv })
}

fn construction_name(c: &ConstructionDescriptor) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.get("construction").and_then(|n| n.as_str()).map(String::from))
        .unwrap_or_default()
}

/// Nonzero weight spaces of the construction.
pub fn cmd_dims(c: &ConstructionDescriptor) -> Result<Outcome, CliError> {
    let built = c.build()?;
    let m = &built.module;
    let nonzero: BTreeMap<_, _> = built.dims.into_iter().filter(|(_, d)| *d > 0).collect();
    let rows = dim_rows(&nonzero, m.basis());
    let out = DimsOutput {
        construction: construction_name(c),
        module: m.name(),
        basis: *m.basis(),
        base: [fmt_rational(&m.base().0), fmt_rational(&m.base().1)],
        rows: rows.clone(),
    };
    let csv = rows_csv("offset_b1,offset_b2,dim", rows.into_iter().map(|r| (None, r)));
    Ok(Outcome { verdict: None, json: to_json(&out), csv })
}

#[derive(Serialize)]
struct GrowthOutput<'a> {
    #[serde(flatten)]
    report: &'a SweepReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<WitnessReport>>,
}

#[derive(Serialize)]
struct ProbeOutput {
    experiment: &'static str,
    construction: String,
    a: String,
    irreducible: bool,
    dims: Vec<DimRow>,
}

#[derive(Serialize)]
struct SupportOutput {
    experiment: &'static str,
    construction: String,
    report: SupportReport,
    dims: Vec<DimRow>,
}

#[derive(Serialize)]
struct DecompositionOutput {
    experiment: &'static str,
    report: DecompositionReport,
}

#[derive(Serialize)]
struct GhwOutput {
    experiment: &'static str,
    construction: String,
    hits: Vec<GhwHit>,
}

fn sweep_csv(rep: &SweepReport) -> String {
    rows_csv(
        SETTING_HEADER,
        rep.values.iter().zip(&rep.tables).flat_map(|(v, t)| t.iter().map(move |r| (Some(*v), r.clone()))),
    )
}

fn need_rho(local: &Option<RhoSpec>, global: &Option<RhoSpec>) -> Result<RhoSpec, CliError> {
    local.clone().or_else(|| global.clone()).ok_or_else(|| CliError::Config("experiment needs a rho".into()))
}

fn need_sweep(local: &[i64], global: &Option<Vec<i64>>) -> Vec<i64> {
    global.clone().unwrap_or_else(|| local.to_vec())
}

pub fn cmd_experiment(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let exp = cfg.experiment.as_ref().ok_or_else(|| CliError::Config("config has no \"experiment\" section".into()))?;
    match exp {
        ExperimentConfig::Stabilization { rho, basis, levels, sweep } => {
            let rho = need_rho(rho, &cfg.rho)?;
            let rep = stabilization_experiment(&rho, *basis, *levels, &need_sweep(sweep, &cfg.sweep))?;
            Ok(Outcome { verdict: Some(rep.verdict.name().into()), json: to_json(&rep), csv: sweep_csv(&rep) })
        }
        ExperimentConfig::Growth { c, epsilon, basis, sweep, lambda, witness } => {
            let sweep = need_sweep(sweep, &cfg.sweep);
            let lambda = (lambda[0].clone(), lambda[1].clone());
            let rep = growth_experiment(c, *epsilon, *basis, &sweep, lambda)?;
            let wit = if *witness {
                Some(sweep.iter().map(|n| witness_ranks(c, *epsilon, *basis, *n)).collect::<Result<Vec<_>, _>>()?)
            } else {
                None
            };
            let mut verdict = rep.verdict.name().to_string();
            if wit.as_ref().is_some_and(|w| w.iter().any(|r| !r.full_rank)) {
                verdict = "witness_rank_deficient".into();
            }
            let json = to_json(&GrowthOutput { report: &rep, witness: wit });
            Ok(Outcome { verdict: Some(verdict), json, csv: sweep_csv(&rep) })
        }
        ExperimentConfig::Irreducibility { construction, a } => {
            let built = construction.build()?;
            let irreducible = heisenberg_irreducibility_probe(&built.module, a)?;
            let dims = dim_rows(&built.dims, built.module.basis());
            let csv = rows_csv("offset_b1,offset_b2,dim", dims.iter().cloned().map(|r| (None, r)));
            let out = ProbeOutput {
                experiment: "irreducibility",
                construction: construction_name(construction),
                a: fmt_rational(a),
                irreducible,
                dims,
            };
            let verdict = if irreducible { "irreducible" } else { "reducible" };
            Ok(Outcome { verdict: Some(verdict.into()), json: to_json(&out), csv })
        }
        ExperimentConfig::Support { construction, check_basis } => {
            let (dims, b) = match construction.build_unreduced()? {
                Some(m) => (quotient_dims_by_rank(&m)?, *m.basis()),
                None => {
                    let built = construction.build()?;
                    (built.dims, *built.module.basis())
                }
            };
            let report = support_properties_check(&dims, &b, &check_basis.unwrap_or(b));
            let rows = dim_rows(&dims, &b);
            let csv = rows_csv("offset_b1,offset_b2,dim", rows.iter().cloned().map(|r| (None, r)));
            let verdict = if report.ok() { "pass" } else { "fail" };
            let out = SupportOutput { experiment: "support", construction: construction_name(construction), report, dims: rows };
            Ok(Outcome { verdict: Some(verdict.into()), json: to_json(&out), csv })
        }
        ExperimentConfig::Decomposition { rho, basis, truncation } => {
            let rho = need_rho(rho, &cfg.rho)?;
            let report = decomposition_check(&rho, *basis, *truncation)?;
            let csv = rows_csv(
                SETTING_HEADER,
                report.slices.iter().enumerate().flat_map(|(i, t)| t.iter().map(move |r| (Some(i as i64), r.clone()))),
            );
            let verdict = if report.ok() { "pass" } else { "fail" };
            Ok(Outcome { verdict: Some(verdict.into()), json: to_json(&DecompositionOutput { experiment: "decomposition", report }), csv })
        }
        ExperimentConfig::GhwScan { construction, bases } => {
            let built = construction.build()?;
            let hits = ghw_scan(&built.module, bases)?;
            let csv = rows_csv(
                SETTING_HEADER,
                hits.iter().map(|h| {
                    let k = bases.iter().position(|b| *b == h.basis).unwrap_or(0) as i64;
                    (Some(k), DimRow { offset_b1: h.offset.0, offset_b2: h.offset.1, dim: h.kernel_dim })
                }),
            );
            let verdict = if hits.is_empty() { "none" } else { "hit" };
            let out = GhwOutput { experiment: "ghw_scan", construction: construction_name(construction), hits };
            Ok(Outcome { verdict: Some(verdict.into()), json: to_json(&out), csv })
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Writes through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e| CliError::Io { path: path.display().to_string(), source: e };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let outcome = match &cli.command {
        Command::Bracket { left, right } => cmd_bracket(left, right)?,
        Command::JacobiFuzz { window, trials } => {
            let window = window.or(cfg.window).unwrap_or(5);
            let trials = trials.or(cfg.trials).unwrap_or(1000);
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            cmd_jacobi_fuzz(window, trials, seed)?
        }
        Command::Dims => {
            let c = cfg.construction.as_ref().ok_or_else(|| CliError::Config("dims needs a \"construction\" in --config".into()))?;
            cmd_dims(c)?
        }
        Command::Experiment => cmd_experiment(&cfg)?,
    };
    let output = cfg.output.clone().unwrap_or_default();
    let format = cli.format.or(output.format).unwrap_or(Format::Json);
    let text = match format {
        Format::Json => &outcome.json,
        Format::Csv => &outcome.csv,
    };
    match cli.out.clone().or(output.path) {
        Some(p) => write_atomic(&p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(text.as_bytes());
        }
    }
    let code = match (&cli.expect, &outcome.verdict) {
        (Some(e), Some(v)) if e == v => 0,
        (Some(e), v) => {
            eprintln!("verdict {} does not match expected {e}", v.as_deref().unwrap_or("(none)"));
            1
        }
        (None, Some(v)) if v == "fail" => 1,
        _ => 0,
    };
    Ok(code)
}

/// Entry point used by the binary: parse, run, map errors to exit code 2.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
