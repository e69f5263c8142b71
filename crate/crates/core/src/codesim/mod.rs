//! Monte Carlo simulation of the random binning code at finite block length.
//!
//! Codewords `u_(m,s)` are drawn i.i.d. from `q^{⊗n}`; message `m` is sent as
//! the bin average `η̃_m = (1/S) Σ_s C^{⊗n}(u_(m,s))`. Bob decodes the
//! bin-averaged outputs with the pretty-good measurement, Eve's bin-averaged
//! output is compared with `γ_{EE'}^{⊗n}`, and the `A'^n` marginal of `η̃_m`
//! is repaired with the Uhlmann fix-up.

mod pgm;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use pgm::{pgm_decoder, Pgm, SUPPORT_CUTOFF};

use crate::channels::{CqEnsemble, ResourceState, WiretapChannel};
use crate::exec::{map_indexed, Execution};
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::{uhlmann_fixup, DensityOperator, LabeledSpace};
use crate::rates::{letters, theorem1_rate, Letters, RateReport};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Default cap on each of the Bob, Eve and member dimensions at block length n.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Cap on `n·M·S` symbols in a sampled codebook.
pub const CODEBOOK_SYMBOL_CAP: usize = 100_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeParameters {
    /// `M` and `S`, rounded to the nearest integer and at least 1.
    pub messages: usize,
    pub bin_size: usize,
    /// `log₂` of the unrounded `M`, `S` and `M·S`.
    pub message_exponent: f64,
    pub bin_exponent: f64,
    pub total_exponent: f64,
    /// `M = 1`: the code carries no message.
    pub degenerate: bool,
    pub report: RateReport,
}

fn round_exp2(e: f64) -> usize {
    (e.exp2().round() as usize).max(1)
}

/// `S = 2^{n max(I(U:EE'), I(U:A')) + nε}` and `M = 2^{n·rate − 2nε}`.
pub fn code_parameters(
    ens: &CqEnsemble,
    n_ch: &WiretapChannel,
    res: &ResourceState,
    n: usize,
    epsilon: f64,
) -> Result<CodeParameters> {
    let report = theorem1_rate(ens, n_ch, res)?;
    parameters_from_report(report, n, epsilon, None)
}

/// As [`code_parameters`], optionally holding the message rate at `rate`
/// (`M = 2^{n·rate}`) instead of `rate − 2ε`.
fn parameters_from_report(report: RateReport, n: usize, epsilon: f64, rate: Option<f64>) -> Result<CodeParameters> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::Config("block length must be positive".into()));
    }
    let nf = n as f64;
    let leak = report.i_u_ee.max(report.i_u_aprime);
    let bin_exponent = nf * leak + nf * epsilon;
    let message_exponent = match rate {
        Some(r) => nf * r,
        None => nf * report.rate - 2.0 * nf * epsilon,
    };
    let messages = if message_exponent > 0.0 { round_exp2(message_exponent) } else { 1 };
    Ok(CodeParameters {
        messages,
        bin_size: round_exp2(bin_exponent),
        message_exponent,
        bin_exponent,
        total_exponent: message_exponent + bin_exponent,
        degenerate: messages == 1,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub messages: usize,
    pub bin_size: usize,
    /// Word `(m, s)` at index `m·S + s`; symbols index the ensemble labels.
    pub words: Vec<Vec<usize>>,
    /// Weight of each word within its bin.
    pub weights: Vec<f64>,
    pub seed: u64,
}

/// Draws `M·S` words i.i.d. from `q^{⊗n}` with a ChaCha8 stream seeded by
/// `seed`.
pub fn sample_codebook(probs: &[f64], n: usize, messages: usize, bin_size: usize, seed: u64) -> Result<Codebook> {
    sample_on_stream(probs, n, messages, bin_size, seed, 0)
}

fn sample_on_stream(probs: &[f64], n: usize, messages: usize, bin_size: usize, seed: u64, stream: u64) -> Result<Codebook> {
    let count = messages
        .checked_mul(bin_size)
        .filter(|&w| w.checked_mul(n).is_some_and(|t| t <= CODEBOOK_SYMBOL_CAP));
    let Some(count) = count else {
        return Err(Error::ResourceLimit {
            what: "codebook symbols".into(),
            requested: messages as u128 * bin_size as u128 * n as u128,
            cap: CODEBOOK_SYMBOL_CAP as u128,
        });
    };
    let dist = WeightedIndex::new(probs).map_err(|e| Error::InvalidEnsemble(format!("codeword distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let words = (0..count).map(|_| (0..n).map(|_| dist.sample(&mut rng)).collect()).collect();
    Ok(Codebook {
        n,
        messages,
        bin_size,
        words,
        weights: vec![1.0 / bin_size as f64; count],
        seed,
    })
}

impl Codebook {
    /// One message whose bin holds every sequence of `U^n` weighted by
    /// `q^{⊗n}`.
    pub fn full_mixture(probs: &[f64], n: usize) -> Result<Self> {
        let k = probs.len();
        let count = u32::try_from(n)
            .ok()
            .and_then(|e| k.checked_pow(e))
            .filter(|&c| c.saturating_mul(n) <= CODEBOOK_SYMBOL_CAP)
            .ok_or_else(|| Error::ResourceLimit {
                what: "full mixture codebook".into(),
                requested: (k as u128).saturating_pow(n as u32),
                cap: CODEBOOK_SYMBOL_CAP as u128,
            })?;
        let mut words = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for idx in 0..count {
            let mut rem = idx;
            let mut word = vec![0; n];
            for slot in word.iter_mut().rev() {
                *slot = rem % k;
                rem /= k;
            }
            weights.push(word.iter().map(|&u| probs[u]).product());
            words.push(word);
        }
        Ok(Self { n, messages: 1, bin_size: count, words, weights, seed: 0 })
    }

    pub fn bin(&self, m: usize) -> impl Iterator<Item = (&[usize], f64)> {
        let range = m * self.bin_size..(m + 1) * self.bin_size;
        self.words[range.clone()].iter().map(Vec::as_slice).zip(self.weights[range].iter().copied())
    }

    /// Occurrences of each of the `k` symbols over all words and positions.
    pub fn symbol_counts(&self, k: usize) -> Vec<usize> {
        let mut counts = vec![0; k];
        for w in &self.words {
            for &u in w {
                counts[u] += 1;
            }
        }
        counts
    }

    /// Pearson statistic of the symbol counts against `q`, over labels with
    /// positive probability.
    pub fn chi_square(&self, probs: &[f64]) -> f64 {
        let counts = self.symbol_counts(probs.len());
        let total: usize = counts.iter().sum();
        probs
            .iter()
            .zip(&counts)
            .filter(|(q, _)| **q > 0.0)
            .map(|(q, &o)| {
                let e = q * total as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum()
    }
}

/// `Σ_s w_s ⊗_i letter[u_i]` for bin `m`.
fn bin_state(codebook: &Codebook, m: usize, letter: &[CMatrix]) -> CMatrix {
    let mut out: Option<CMatrix> = None;
    for (word, w) in codebook.bin(m) {
        let mut t = letter[word[0]].clone();
        for &u in &word[1..] {
            t = linalg::kron(&t, &letter[u]);
        }
        t *= c(w, 0.0);
        match &mut out {
            Some(acc) => *acc += t,
            None => out = Some(t),
        }
    }
    out.expect("bins are non-empty")
}

fn tensor_power(m: &CMatrix, n: usize) -> CMatrix {
    let mut t = m.clone();
    for _ in 1..n {
        t = linalg::kron(&t, m);
    }
    t
}

fn check_dim(what: &str, d: usize, n: usize, cap: usize) -> Result<()> {
    let requested = (d as u128).saturating_pow(n as u32);
    if requested > cap as u128 {
        return Err(Error::ResourceLimit {
            what: format!("{what} dimension at block length {n}"),
            requested,
            cap: cap as u128,
        });
    }
    Ok(())
}

fn check_codebook(codebook: &Codebook, k: usize) -> Result<()> {
    if codebook.n == 0 || codebook.words.iter().any(|w| w.len() != codebook.n || w.iter().any(|&u| u >= k)) {
        return Err(Error::InvalidEnsemble(format!("codebook words must have length {} over {k} labels", codebook.n)));
    }
    Ok(())
}

/// Error estimate `1 − (1/M) Σ_m Tr(ρ_m D_m)` of the pretty-good measurement
/// on Bob's bin-averaged outputs.
fn decoding_error(codebook: &Codebook, l: &Letters) -> Result<f64> {
    if codebook.messages == 1 {
        return Ok(0.0);
    }
    let states: Vec<CMatrix> = (0..codebook.messages).map(|m| bin_state(codebook, m, &l.bob)).collect();
    let priors = vec![1.0 / codebook.messages as f64; codebook.messages];
    let pgm = pgm::pgm_from_matrices(&states, &priors)?;
    Ok((1.0 - pgm.success_from_matrices(&states, &priors)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    /// `(1/M) Σ_m ‖σ_m − γ_{EE'}^{⊗n}‖₁`.
    pub average: f64,
    pub max: f64,
}

fn leakage_of(codebook: &Codebook, l: &Letters, probs: &[f64]) -> Leakage {
    let d = l.eve[0].nrows();
    let mut gamma = CMatrix::zeros(d, d);
    for (e, &q) in l.eve.iter().zip(probs) {
        gamma += e * c(q, 0.0);
    }
    let reference = tensor_power(&gamma, codebook.n);
    let per: Vec<f64> = (0..codebook.messages)
        .map(|m| linalg::trace_norm_hermitian(&(bin_state(codebook, m, &l.eve) - &reference)))
        .collect();
    Leakage {
        average: per.iter().sum::<f64>() / per.len() as f64,
        max: per.iter().copied().fold(0.0, f64::max),
    }
}

/// Eve's bin-averaged leakage against `γ_{EE'}^{⊗n}`.
pub fn leakage(codebook: &Codebook, ens: &CqEnsemble, n_ch: &WiretapChannel, res: &ResourceState) -> Result<Leakage> {
    let l = letters(ens, n_ch, res)?;
    check_codebook(codebook, ens.len())?;
    check_dim("Eve", l.eve[0].nrows(), codebook.n, DEFAULT_MAX_DIM)?;
    Ok(leakage_of(codebook, &l, ens.probs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalRepair {
    /// `(1/M) Σ_m ‖η̃_m^{A'^n} − (ζ^{A'})^{⊗n}‖₁`.
    pub residual: f64,
    /// `(1/M) Σ_m ‖η̃_m − η_m‖₁` after the Uhlmann fix-up.
    pub fixup_cost: f64,
    pub max_fixup_cost: f64,
}

impl MarginalRepair {
    /// `fixup_cost ≤ 4√residual`.
    pub fn within_budget(&self) -> bool {
        self.fixup_cost <= 4.0 * self.residual.sqrt() + 1e-9
    }
}

fn repair_of(codebook: &Codebook, l: &Letters) -> Result<MarginalRepair> {
    let n = codebook.n;
    let [da, dr] = l.member_dims;
    let mut factors = Vec::with_capacity(2 * n);
    let mut marginal_labels = Vec::with_capacity(n);
    for i in 0..n {
        factors.push((format!("A{i}"), da));
        factors.push((format!("R{i}"), dr));
        marginal_labels.push(format!("R{i}"));
    }
    let space = LabeledSpace::new(factors)?;
    let target_space = space.subspace(&marginal_labels)?;
    let target = DensityOperator::from_raw(target_space, tensor_power(&l.target, n));
    let keep: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
    let dims = space.dims();
    let mut residual = 0.0;
    let mut costs = Vec::with_capacity(codebook.messages);
    for m in 0..codebook.messages {
        let eta = bin_state(codebook, m, &l.members);
        let marginal = linalg::partial_trace_matrix(&eta, &dims, &keep);
        residual += linalg::trace_norm_hermitian(&(marginal - target.matrix()));
        let fixed = uhlmann_fixup(&DensityOperator::from_raw(space.clone(), eta), &target, &marginal_labels)?;
        costs.push(fixed.correction);
    }
    let mf = codebook.messages as f64;
    Ok(MarginalRepair {
        residual: residual / mf,
        fixup_cost: costs.iter().sum::<f64>() / mf,
        max_fixup_cost: costs.iter().copied().fold(0.0, f64::max),
    })
}

/// Marginal residual of the bin averages and the cost of repairing it.
pub fn marginal_residual_and_fixup(
    codebook: &Codebook,
    ens: &CqEnsemble,
    n_ch: &WiretapChannel,
    res: &ResourceState,
) -> Result<MarginalRepair> {
    let l = letters(ens, n_ch, res)?;
    check_codebook(codebook, ens.len())?;
    check_dim("member", l.members[0].nrows(), codebook.n, DEFAULT_MAX_DIM)?;
    repair_of(codebook, &l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: Vec<usize>,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Holds the message rate fixed instead of using `rate − 2ε`.
    pub rate: Option<f64>,
    pub max_dim: usize,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: vec![1, 2],
            epsilon: 0.05,
            trials: 20,
            seed: 0,
            rate: None,
            max_dim: DEFAULT_MAX_DIM,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub mu_max: f64,
    pub marginal_residual: f64,
    pub fixup_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub messages: usize,
    pub bin_size: usize,
    pub message_exponent: f64,
    pub bin_exponent: f64,
    /// `log₂ M / n`.
    pub rate: f64,
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub marginal_residual: f64,
    pub fixup_cost: f64,
    pub trials: usize,
    /// 95% normal half-width of `λ̂` from the trial variance; absent for a
    /// single trial.
    pub ci_halfwidth: Option<f64>,
    pub degenerate: bool,
    pub records: Vec<TrialRecord>,
}

pub const CSV_HEADER: &str = "n,M,S,rate,lambda_hat,mu_hat,marginal_residual,fixup_cost,ci";

impl SimReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.messages,
            self.bin_size,
            self.rate,
            self.lambda_hat,
            self.mu_hat,
            self.marginal_residual,
            self.fixup_cost,
            self.ci_halfwidth.map_or(String::new(), |c| c.to_string())
        )
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

/// Runs `cfg.trials` independent codebooks at every block length in
/// `cfg.n`.
pub fn simulate(ens: &CqEnsemble, n_ch: &WiretapChannel, res: &ResourceState, cfg: &SimConfig) -> Result<Vec<SimReport>> {
    if cfg.trials == 0 || cfg.n.is_empty() {
        return Err(Error::Config("simulation needs at least one trial and one block length".into()));
    }
    let l = letters(ens, n_ch, res)?;
    for &n in &cfg.n {
        check_dim("Bob", l.bob[0].nrows(), n, cfg.max_dim)?;
        check_dim("Eve", l.eve[0].nrows(), n, cfg.max_dim)?;
        check_dim("member", l.members[0].nrows(), n, cfg.max_dim)?;
    }
    let report = theorem1_rate(ens, n_ch, res)?;
    let mut out = Vec::with_capacity(cfg.n.len());
    for (idx, &n) in cfg.n.iter().enumerate() {
        let p = parameters_from_report(report.clone(), n, cfg.epsilon, cfg.rate)?;
        let records = map_indexed(cfg.execution, cfg.trials, |trial| -> Result<TrialRecord> {
            let stream = ((idx as u64) << 32) | trial as u64;
            let book = sample_on_stream(ens.probs(), n, p.messages, p.bin_size, cfg.seed, stream)?;
            let leak = leakage_of(&book, &l, ens.probs());
            let repair = repair_of(&book, &l)?;
            Ok(TrialRecord {
                trial,
                lambda_hat: decoding_error(&book, &l)?,
                mu_hat: leak.average,
                mu_max: leak.max,
                marginal_residual: repair.residual,
                fixup_cost: repair.fixup_cost,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let lambda_hat = mean(records.iter().map(|r| r.lambda_hat));
        let ci_halfwidth = (records.len() > 1).then(|| {
            let var = records.iter().map(|r| (r.lambda_hat - lambda_hat).powi(2)).sum::<f64>() / (records.len() - 1) as f64;
            1.96 * (var / records.len() as f64).sqrt()
        });
        out.push(SimReport {
            n,
            messages: p.messages,
            bin_size: p.bin_size,
            message_exponent: p.message_exponent,
            bin_exponent: p.bin_exponent,
            rate: (p.messages as f64).log2() / n as f64,
            lambda_hat,
            mu_hat: mean(records.iter().map(|r| r.mu_hat)),
            marginal_residual: mean(records.iter().map(|r| r.marginal_residual)),
            fixup_cost: mean(records.iter().map(|r| r.fixup_cost)),
            trials: records.len(),
            ci_halfwidth,
            degenerate: p.degenerate,
            records,
        });
    }
    Ok(out)
}

/// [`simulate`] on the channel, resource and ensemble of a scenario.
pub fn run_experiment(scenario: &Scenario, cfg: &SimConfig) -> Result<Vec<SimReport>> {
    let ens = scenario
        .ensemble
        .as_ref()
        .ok_or_else(|| Error::Config(format!("scenario '{}' has no ensemble to build codewords from", scenario.name)))?;
    simulate(ens, &scenario.wiretap()?, &scenario.resource_state()?, cfg)
}
