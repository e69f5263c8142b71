use std::path::{Path, PathBuf};

use serde::Serialize;
use wiretap_core::channels::QuantumChannel;
use wiretap_core::codesim::{run_experiment, SimConfig, SimReport, CSV_HEADER};
use wiretap_core::gallery;
use wiretap_core::measures::{duality_residual, MeasureCaps};
use wiretap_core::optimize::{optimize_theorem1, optimize_unassisted, OptResult, OptimizerConfig};
use wiretap_core::qcore::{purify, DensityOperator, Purification};
use wiretap_core::rates::{RateMode, RateReport};
use wiretap_core::scenario::Scenario;
use wiretap_core::Error;

use crate::failure::{read_json, write_file, CliResult, Failure};

pub const MAX_DIM_ENV: &str = "WIRETAP_MAX_DIM";

/// Bundled file name for each gallery entry.
pub fn gallery_file(name: &str) -> String {
    match name {
        "trivial" => "trivial_resource.json".to_string(),
        other => format!("{}.json", other.replace('-', "_")),
    }
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let s: Scenario = read_json(path)?;
    s.validate().map_err(|e| Failure::from(e).in_file(path))?;
    Ok(s)
}

fn max_dim_override() -> CliResult<Option<usize>> {
    match std::env::var(MAX_DIM_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .map(Some)
            .ok_or_else(|| Failure::new("config", format!("{MAX_DIM_ENV} must be a positive integer, got `{v}`"))),
    }
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serialises")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub struct Output {
    pub stdout: String,
    pub stderr: Option<String>,
}

fn rate_table(r: &RateReport) -> String {
    let mut rows = vec![
        ("mode", r.mode.to_string()),
        ("rate", format!("{:.9}", r.rate)),
        ("I(U:BB')", format!("{:.9}", r.i_u_bb)),
        ("I(U:EE')", format!("{:.9}", r.i_u_ee)),
    ];
    if r.mode == RateMode::Theorem1 {
        rows.push(("I(U:A')", format!("{:.9}", r.i_u_aprime)));
    }
    rows.push(("residual", format!("{:.3e}", r.constraint_residual)));
    rows.push(("feasible", r.feasible.to_string()));
    rows.iter().map(|(k, v)| format!("{k:<10} {v}\n")).collect()
}

pub fn rate_eval(scenario: &Path, mode: Option<RateMode>, format: Format) -> CliResult<Output> {
    let s = load_scenario(scenario)?;
    let report = s.evaluate(mode.unwrap_or_else(|| s.default_mode()))?;
    let stdout = match format {
        Format::Json => to_pretty(&report) + "\n",
        Format::Table => rate_table(&report),
        Format::Csv => return Err(Failure::new("config", "rate-eval supports --format json or table")),
    };
    Ok(Output { stdout, stderr: Some(report.summary()) })
}

fn optimizer_config(path: Option<&Path>, seed: u64) -> CliResult<OptimizerConfig> {
    let mut cfg = match path {
        Some(p) => read_json::<OptimizerConfig>(p)?,
        None => OptimizerConfig::default(),
    };
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

pub const N1_LABEL: &str = "lower bound, n=1";

#[derive(Debug, Serialize)]
pub struct OptimizeOutput {
    pub scenario: String,
    pub mode: RateMode,
    /// Best value found by the search; the single-letter optimum is at
    /// least this large.
    pub label: &'static str,
    pub seed: u64,
    pub result: OptResult,
}

pub fn rate_optimize(
    scenario: &Path,
    mode: Option<RateMode>,
    config: Option<&Path>,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<Output> {
    let s = load_scenario(scenario)?;
    let mode = mode.unwrap_or_else(|| s.default_mode());
    let cfg = optimizer_config(config, seed)?;
    let n = s.wiretap()?;
    let result = match mode {
        RateMode::Theorem1 => optimize_theorem1(&n, &s.resource_state()?, &cfg)?,
        RateMode::Unassisted => optimize_unassisted(&n, &cfg)?,
        RateMode::Trivial => {
            return Err(Failure::new("config", "rate-optimize supports --mode theorem1 or unassisted"));
        }
    };
    let summary = format!("{mode} best-found {:.6} bits ({N1_LABEL})", result.best_value);
    let mut witness = s.clone();
    witness.ensemble = result.best_ensemble.clone();
    witness.modulations = None;
    witness.mode = Some(mode);
    witness.description = format!("Optimised witness ensemble for '{}' ({mode}, seed {seed}).", s.name);
    let output = OptimizeOutput { scenario: s.name.clone(), mode, label: N1_LABEL, seed, result };
    let json = to_pretty(&output) + "\n";
    if let Some(dir) = out {
        write_file(&dir.join("result.json"), &json)?;
        write_file(&dir.join("witness.json"), &(witness.to_json() + "\n"))?;
    }
    Ok(Output { stdout: json, stderr: Some(summary) })
}

#[derive(Debug, Serialize)]
pub struct Witnesses {
    pub delta: QuantumChannel,
    pub e_p: QuantumChannel,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeOutput {
    pub delta: f64,
    pub e_p: f64,
    pub s_bprime: f64,
    pub residual: f64,
    pub partition: [String; 3],
    pub witnesses: Witnesses,
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut l = base.to_string();
    while taken.contains(&l) {
        l.push('\'');
    }
    l
}

pub struct AnalyzeOptions<'a> {
    pub partition: Option<&'a [String]>,
    pub config: Option<&'a Path>,
    pub seed: u64,
    pub caps: MeasureCaps,
}

pub fn resource_analyze(state: &Path, opts: &AnalyzeOptions<'_>) -> CliResult<Output> {
    let rho: DensityOperator = read_json(state)?;
    let labels: Vec<String> = rho.space().labels().map(str::to_string).collect();
    let (pure, labels) = match labels.len() {
        3 => (rho, labels),
        2 => {
            let c = fresh("C'", &labels);
            let pure = purify(&rho, &c, Purification::Minimal)?;
            (pure, vec![labels[0].clone(), labels[1].clone(), c])
        }
        k => {
            return Err(Failure::new(
                "space_mismatch",
                format!("resource-analyze needs a state on two or three factors, got {k}"),
            )
            .in_file(state))
        }
    };
    let partition: [String; 3] = match opts.partition {
        None => [labels[0].clone(), labels[1].clone(), labels[2].clone()],
        Some([a, b, c]) => [a.clone(), b.clone(), c.clone()],
        Some(p) => {
            return Err(Failure::new("config", format!("--partition needs three labels, got {}", p.len())));
        }
    };
    if let Some(cap) = max_dim_override()? {
        let total = pure.space().total_dim();
        if total > cap {
            return Err(Error::ResourceLimit { what: "state dimension".into(), requested: total as u128, cap: cap as u128 }.into());
        }
    }
    let cfg = optimizer_config(opts.config, opts.seed)?;
    let [a, b, c] = &partition;
    let report = duality_residual(&pure, (a, b, c), opts.caps, &cfg)?;
    let summary = format!(
        "delta {:.6} + e_p {:.6} vs S(B') {:.6}: residual {:.3e}",
        report.delta.value, report.e_p.value, report.s_bprime, report.residual
    );
    let out = AnalyzeOutput {
        delta: report.delta.value,
        e_p: report.e_p.value,
        s_bprime: report.s_bprime,
        residual: report.residual,
        partition,
        witnesses: Witnesses { delta: report.delta.witness_channel, e_p: report.e_p.witness_channel },
    };
    Ok(Output { stdout: to_pretty(&out) + "\n", stderr: Some(summary) })
}

pub fn sim_csv(reports: &[SimReport]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn code_sim(scenario: &Path, config: Option<&Path>, seed: u64, format: Format, out: Option<&Path>) -> CliResult<Output> {
    let s = load_scenario(scenario)?;
    let mut cfg = match config {
        Some(p) => read_json::<SimConfig>(p)?,
        None => SimConfig::default(),
    };
    cfg.seed = seed;
    if let Some(d) = max_dim_override()? {
        cfg.max_dim = d;
    }
    let reports = run_experiment(&s, &cfg)?;
    let csv = sim_csv(&reports);
    let json = to_pretty(&reports) + "\n";
    if let Some(dir) = out {
        write_file(&dir.join("sim.csv"), &csv)?;
        write_file(&dir.join("sim.json"), &json)?;
    }
    let stdout = match format {
        Format::Csv => csv,
        Format::Json => json,
        Format::Table => return Err(Failure::new("config", "code-sim supports --format csv or json")),
    };
    let summary = reports
        .iter()
        .map(|r| format!("n={} M={} S={} lambda={:.4} mu={:.4}", r.n, r.messages, r.bin_size, r.lambda_hat, r.mu_hat))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { stdout, stderr: Some(summary) })
}

pub fn gallery_cmd(name: &str, pmf: Option<&Path>, out: Option<&Path>) -> CliResult<Output> {
    let s = match (name, pmf) {
        ("classical", Some(p)) => gallery::classical(&read_json::<Vec<Vec<Vec<f64>>>>(p)?)?,
        (_, Some(_)) => return Err(Failure::new("config", "--pmf only applies to the classical gallery")),
        (n, None) => gallery::build(n)?,
    };
    s.validate()?;
    let json = s.to_json() + "\n";
    match out {
        Some(dir) => {
            let file: PathBuf = dir.join(gallery_file(name));
            write_file(&file, &json)?;
            Ok(Output { stdout: String::new(), stderr: Some(format!("wrote {}", file.display())) })
        }
        None => Ok(Output { stdout: json, stderr: None }),
    }
}
