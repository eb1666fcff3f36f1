//! Experiment orchestration: configuration, seeded trials, CSV reports,
//! re-validation of reports and the progressive-precision study.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    per_line_bounds, progressive_epsilon, BoundReport, ProofStep, StructuralConstants,
};
use crate::cycles::{
    make_perturbed_coarse, make_recursive_coarse, rho_star, tg_cycle, CoarseSolver, RelaxationOp,
    Smoother,
};
use crate::error::{Error, Result};
use crate::hierarchy::{build_multilevel, GridLevel, Problem};
use crate::linops::norm2;
use crate::precision::PrecisionFormat;

/// First line of every trial CSV.
pub const CSV_VERSION_LINE: &str = "# mpmg-trials v1";

/// Largest admitted ratio between the biggest and smallest `delta_rho_tg`
/// across sizes in the progressive study.
pub const PROGRESSIVE_SPREAD_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoarseConfig {
    #[default]
    Exact,
    Perturbed {
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    /// One V(mu, nu)-cycle on the levels below the finest.
    Recursive { mu: usize, nu: usize },
}

/// Either a fixed list of formats or one format chosen from the
/// conditioning so that `kappa^{1/2} eps <= pi_target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PrecisionPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_target: Option<f64>,
}

impl PrecisionPlan {
    pub fn bits(bits: Vec<u32>) -> Self {
        Self {
            bits: Some(bits),
            pi_target: None,
        }
    }

    pub fn progressive(pi_target: f64) -> Self {
        Self {
            bits: None,
            pi_target: Some(pi_target),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trials: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    pub problem: Problem,
    pub smoother: Smoother,
    #[serde(default)]
    pub coarse: CoarseConfig,
    pub precision: PrecisionPlan,
    pub run: RunConfig,
}

fn default_levels() -> usize {
    2
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            levels: 2,
            problem: Problem::Poisson1d { n: 31 },
            smoother: Smoother::Jacobi { omega: 2.0 / 3.0 },
            coarse: CoarseConfig::Exact,
            precision: PrecisionPlan::bits(vec![8, 12, 16, 23]),
            run: RunConfig {
                trials: 100,
                rng_seed: 0,
                output_path: None,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.run.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.levels < 2 {
            return bad(format!("levels must be at least 2, got {}", self.levels));
        }
        match (&self.precision.bits, self.precision.pi_target) {
            (Some(_), Some(_)) => {
                return bad("give either precision.bits or precision.pi_target".into())
            }
            (None, None) => return bad("precision.bits or precision.pi_target is required".into()),
            (Some(bits), None) => {
                if bits.is_empty() {
                    return bad("precision.bits is empty".into());
                }
                for &b in bits {
                    PrecisionFormat::new(b)?;
                }
            }
            (None, Some(t)) => {
                if !(t > 0.0 && t < 1.0) {
                    return bad(format!("pi_target must be in (0, 1), got {t}"));
                }
            }
        }
        let mut size = self.problem.size();
        for _ in 1..self.levels {
            if size < 3 || size.is_multiple_of(2) {
                return bad(format!(
                    "{} size {} cannot be coarsened to {} levels",
                    self.problem.name(),
                    self.problem.size(),
                    self.levels
                ));
            }
            size = (size - 1) / 2;
        }
        match self.coarse {
            CoarseConfig::Perturbed { sigma, .. } if !(0.0..1.0).contains(&sigma) => {
                return bad(format!("sigma must be in [0, 1), got {sigma}"));
            }
            CoarseConfig::Recursive { mu, nu } if mu + nu == 0 => {
                return bad("recursive coarse solve needs mu + nu >= 1".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// One-line description used in error messages and logs.
    pub fn echo(&self) -> String {
        let precision = match (&self.precision.bits, self.precision.pi_target) {
            (Some(b), _) => format!("bits={b:?}"),
            (_, Some(t)) => format!("pi_target={t:e}"),
            _ => "precision=?".into(),
        };
        format!(
            "{}({}) levels={} {} {} {} trials={} seed={}",
            self.problem.name(),
            self.problem.size(),
            self.levels,
            self.smoother.label(),
            coarse_label(&self.coarse),
            precision,
            self.run.trials,
            self.run.rng_seed
        )
    }
}

fn coarse_label(c: &CoarseConfig) -> String {
    match c {
        CoarseConfig::Exact => "exact".into(),
        CoarseConfig::Perturbed { sigma, .. } => format!("perturbed({sigma})"),
        CoarseConfig::Recursive { mu, nu } => format!("recursive({mu},{nu})"),
    }
}

/// Standard-normal vector from `seed`, scaled to unit Euclidean norm.
pub fn draw_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = norm2(&r);
    if s > 0.0 {
        r.iter_mut().for_each(|v| *v /= s);
    }
    r
}

/// Constants of the bounds for `level` with pre-relaxation `m` and
/// post-relaxation `n`.
pub fn structural_constants(
    level: &GridLevel,
    m: &RelaxationOp,
    n: &RelaxationOp,
) -> Result<StructuralConstants> {
    let c = level.coarsening()?;
    Ok(StructuralConstants {
        kappa: level.kappa,
        kappa_c: c.kappa_c,
        eta_a: level.a_consts.eta_abs,
        eta_p: c.p_consts.eta_abs,
        eta_m: m.eta,
        eta_n: n.eta_energy,
        m_a: level.a_consts.m,
        m_p: c.p_consts.m,
        alpha_m_base: m.eta,
        alpha_n_base: n.eta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub problem: String,
    pub levels: usize,
    pub smoother: String,
    pub coarse: String,
    pub bc_deviation: f64,
    pub trial: usize,
    pub seed: u64,
    pub report: BoundReport,
    /// `||A^{-1} r||_A`.
    pub rhs_energy: f64,
    /// Energy error of the carrier-precision cycle.
    pub ref_error: f64,
    /// Energy error of the reduced-precision cycle.
    pub fp_error: f64,
    /// `fp_error / rhs_energy`.
    pub ratio: f64,
    /// Measured-to-predicted ratio of each per-line deviation.
    pub line_ratios: [f64; 16],
    pub pass: bool,
}

impl TrialRecord {
    pub fn recompute_pass(ratio: f64, rho_tg: f64, line_ratios: &[f64]) -> bool {
        ratio <= rho_tg && line_ratios.iter().all(|&r| r <= 1.0)
    }

    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = [
            "problem",
            "levels",
            "smoother",
            "coarse",
            "bc_deviation",
            "trial",
            "seed",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(BoundReport::CSV_COLUMNS.iter().map(|s| s.to_string()));
        h.extend(
            ["rhs_energy", "ref_error", "fp_error", "ratio"]
                .iter()
                .map(|s| s.to_string()),
        );
        h.extend(
            ProofStep::ALL
                .iter()
                .map(|s| format!("ratio_{}", s.label())),
        );
        h.push("pass".into());
        h
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut f = vec![
            self.problem.clone(),
            self.levels.to_string(),
            self.smoother.clone(),
            self.coarse.clone(),
            format!("{:e}", self.bc_deviation),
            self.trial.to_string(),
            self.seed.to_string(),
        ];
        f.extend(self.report.csv_fields());
        for v in [self.rhs_energy, self.ref_error, self.fp_error, self.ratio] {
            f.push(format!("{v:e}"));
        }
        f.extend(self.line_ratios.iter().map(|v| format!("{v:e}")));
        f.push(self.pass.to_string());
        f
    }
}

/// A prepared experiment: the hierarchy and coarse solver are built once and
/// never modified by the trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    levels: Vec<GridLevel>,
    coarse: CoarseSolver,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let levels = build_multilevel(config.problem, config.levels)?;
        let coarse = match config.coarse {
            CoarseConfig::Exact => CoarseSolver::exact(),
            CoarseConfig::Perturbed { sigma, seed } => {
                make_perturbed_coarse(&levels[0], sigma, seed)?
            }
            CoarseConfig::Recursive { mu, nu } => {
                make_recursive_coarse(levels[1..].to_vec(), config.smoother, mu, nu)?
            }
        };
        Ok(Self {
            config: config.clone(),
            levels,
            coarse,
        })
    }

    pub fn level(&self) -> &GridLevel {
        &self.levels[0]
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn coarse(&self) -> &CoarseSolver {
        &self.coarse
    }

    /// Hash of all operator data in the hierarchy.
    pub fn fingerprint(&self) -> u64 {
        self.levels.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, l| {
            (h ^ l.fingerprint()).wrapping_mul(0x0100_0000_01b3)
        })
    }

    pub fn formats(&self) -> Result<Vec<PrecisionFormat>> {
        match (&self.config.precision.bits, self.config.precision.pi_target) {
            (Some(bits), _) => bits.iter().map(|&b| PrecisionFormat::new(b)).collect(),
            (None, Some(t)) => Ok(vec![progressive_epsilon(self.level().kappa, t)?]),
            (None, None) => Err(Error::InvalidArgument("no precision given".into())),
        }
    }

    pub fn relaxation(&self, fmt: PrecisionFormat) -> Result<RelaxationOp> {
        RelaxationOp::new(&self.level().a, self.config.smoother, fmt)
    }

    /// Predicted constants for `fmt`, without running any trial.
    pub fn report(&self, fmt: PrecisionFormat) -> Result<BoundReport> {
        let m = self.relaxation(fmt)?;
        self.report_with(&m, fmt)
    }

    fn report_with(&self, m: &RelaxationOp, fmt: PrecisionFormat) -> Result<BoundReport> {
        let level = self.level();
        let inputs = structural_constants(level, m, m)?.at_eps(fmt.unit_roundoff())?;
        let rho = rho_star(level, m, m, &self.coarse)?;
        Ok(BoundReport::new(
            level.n(),
            level.n_c().unwrap_or(0),
            fmt.significand_bits(),
            inputs,
            rho,
        ))
    }

    pub fn run_precision(&self, fmt: PrecisionFormat) -> Result<Vec<TrialRecord>> {
        let level = self.level();
        let m = self.relaxation(fmt)?;
        let report = self.report_with(&m, fmt)?;
        let bounds = per_line_bounds(&report.inputs);
        (0..self.config.run.trials)
            .map(|trial| {
                let seed = self.config.run.rng_seed.wrapping_add(trial as u64);
                let r = draw_rhs(level.n(), seed);
                let (_, trace) = tg_cycle(level, &r, &m, &m, &self.coarse, fmt)?;
                let line_ratios = trace.ratios(&bounds);
                let ratio = trace.error_ratio();
                Ok(TrialRecord {
                    problem: format!(
                        "{}({})",
                        self.config.problem.name(),
                        self.config.problem.size()
                    ),
                    levels: self.config.levels,
                    smoother: self.config.smoother.label(),
                    coarse: self.coarse.variant.label(),
                    bc_deviation: self.coarse.bc_deviation,
                    trial,
                    seed,
                    report: report.clone(),
                    rhs_energy: trace.rhs_energy,
                    ref_error: trace.reference_error_energy,
                    fp_error: trace.error_energy,
                    ratio,
                    pass: TrialRecord::recompute_pass(ratio, report.rho_tg, &line_ratios),
                    line_ratios,
                })
            })
            .collect()
    }

    pub fn run(&self) -> Result<Vec<TrialRecord>> {
        let before = self.fingerprint();
        let mut out = Vec::new();
        for fmt in self.formats()? {
            out.extend(self.run_precision(fmt)?);
        }
        if self.fingerprint() != before {
            return Err(Error::InvalidArgument(
                "operator data changed during the run".into(),
            ));
        }
        Ok(out)
    }
}

fn with_echo<T>(config: &ExperimentConfig, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Experiment {
        config: config.echo(),
        source: Box::new(e),
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    with_echo(config, Experiment::prepare(config).and_then(|e| e.run()))
}

/// `run_experiment` over several sizes of the configured problem.
pub fn sweep(base: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for &size in sizes {
        let mut config = base.clone();
        config.problem = base.problem.with_size(size);
        out.extend(run_experiment(&config)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut out = out;
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TrialRecord::csv_header())?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(records: &[TrialRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Outcome of re-checking a trial CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub rows: usize,
    /// Rows (0-based) whose recorded pass flag is false.
    pub failed: Vec<usize>,
    /// Rows whose stored values disagree with each other.
    pub inconsistent: Vec<String>,
}

impl Validation {
    pub fn ok(&self) -> bool {
        self.rows > 0 && self.failed.is_empty() && self.inconsistent.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

/// Re-derives every pass flag and the predicted rates from the stored
/// columns of a trial CSV.
pub fn validate_csv<R: Read>(input: R) -> Result<Validation> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
    if first.trim_end() != CSV_VERSION_LINE {
        return Err(Error::Parse(format!(
            "unsupported CSV version line {first:?}"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let expected = TrialRecord::csv_header();
    for name in &expected {
        if !index.contains_key(name.as_str()) {
            return Err(Error::Parse(format!("missing column {name}")));
        }
    }
    let mut v = Validation::default();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |name: &str| -> Result<f64> {
            let s = &rec[index[name]];
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {row}: column {name}: cannot parse {s:?}")))
        };
        let pass = match &rec[index["pass"]] {
            "true" => true,
            "false" => false,
            s => return Err(Error::Parse(format!("row {row}: pass flag {s:?}"))),
        };
        let lines = ProofStep::ALL
            .iter()
            .map(|s| get(&format!("ratio_{}", s.label())))
            .collect::<Result<Vec<_>>>()?;
        let (ratio, rho_tg, rho_star, delta) = (
            get("ratio")?,
            get("rho_tg")?,
            get("rho_star")?,
            get("delta_rho")?,
        );
        let (c3, c4, c5) = (get("c3")?, get("c4")?, get("c5")?);
        let (fp, rhs) = (get("fp_error")?, get("rhs_energy")?);
        let mut problems = String::new();
        if TrialRecord::recompute_pass(ratio, rho_tg, &lines) != pass {
            let _ = write!(
                problems,
                " pass flag {pass} does not match the stored norms;"
            );
        }
        if !close(delta, c3 + c4 + c5) {
            let _ = write!(problems, " delta_rho {delta:e} != c3 + c4 + c5;");
        }
        if !close(rho_tg, rho_star + delta) {
            let _ = write!(problems, " rho_tg {rho_tg:e} != rho_star + delta_rho;");
        }
        let expect_ratio = if fp == 0.0 { 0.0 } else { fp / rhs };
        if !close(ratio, expect_ratio) {
            let _ = write!(problems, " ratio {ratio:e} != fp_error / rhs_energy;");
        }
        if !problems.is_empty() {
            v.inconsistent.push(format!("row {row}:{problems}"));
        }
        if !pass {
            v.failed.push(row);
        }
        v.rows += 1;
    }
    Ok(v)
}

pub fn validate_file(path: &Path) -> Result<Validation> {
    validate_csv(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressiveRow {
    pub size: usize,
    pub n: usize,
    pub kappa: f64,
    pub significand_bits: u32,
    pub eps: f64,
    pub pi_dot: f64,
    pub rho_star: f64,
    pub delta_rho_tg: f64,
    /// Largest `ratio - rho_star` over the trials.
    pub max_observed_delta_rho: f64,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressiveSummary {
    pub pi_target: f64,
    pub rows: Vec<ProgressiveRow>,
    /// `max / min` of `delta_rho_tg` over the sizes.
    pub spread: f64,
}

impl ProgressiveSummary {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            if r.max_observed_delta_rho > r.delta_rho_tg {
                out.push(format!(
                    "size {}: observed delta_rho {:e} exceeds predicted {:e}",
                    r.size, r.max_observed_delta_rho, r.delta_rho_tg
                ));
            }
            if !r.all_pass {
                out.push(format!("size {}: a trial failed", r.size));
            }
        }
        if !(self.spread < PROGRESSIVE_SPREAD_LIMIT) {
            out.push(format!(
                "delta_rho_tg spread {:.3} is not below {PROGRESSIVE_SPREAD_LIMIT}",
                self.spread
            ));
        }
        out
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "pi_target = {:e}\n{:>6} {:>6} {:>12} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            self.pi_target,
            "size",
            "n",
            "kappa",
            "bits",
            "eps",
            "pi_dot",
            "rho_star",
            "delta_rho_tg",
            "observed"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>6} {:>6} {:>12.4e} {:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.size,
                r.n,
                r.kappa,
                r.significand_bits,
                r.eps,
                r.pi_dot,
                r.rho_star,
                r.delta_rho_tg,
                r.max_observed_delta_rho
            );
        }
        let _ = writeln!(s, "spread = {:.4}", self.spread);
        s
    }
}

/// For each size, picks the format from `pi_target`, runs `trials` trials
/// and compares the observed with the predicted increase of the rate.
pub fn progressive_study(
    base: &ExperimentConfig,
    sizes: &[usize],
    pi_target: f64,
    trials: usize,
) -> Result<ProgressiveSummary> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no sizes given".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut config = base.clone();
        config.problem = base.problem.with_size(size);
        config.precision = PrecisionPlan::progressive(pi_target);
        config.run.trials = trials;
        let exp = with_echo(&config, Experiment::prepare(&config))?;
        let records = with_echo(&config, exp.run())?;
        let report = &records[0].report;
        rows.push(ProgressiveRow {
            size,
            n: report.n,
            kappa: report.inputs.kappa,
            significand_bits: report.significand_bits,
            eps: report.inputs.eps,
            pi_dot: report.pi_dot,
            rho_star: report.rho_star,
            delta_rho_tg: report.delta_rho,
            max_observed_delta_rho: records
                .iter()
                .map(|r| r.ratio - report.rho_star)
                .fold(f64::NEG_INFINITY, f64::max),
            all_pass: records.iter().all(|r| r.pass),
        });
    }
    let max = rows
        .iter()
        .map(|r| r.delta_rho_tg)
        .fold(f64::NEG_INFINITY, f64::max);
    let min = rows
        .iter()
        .map(|r| r.delta_rho_tg)
        .fold(f64::INFINITY, f64::min);
    Ok(ProgressiveSummary {
        pi_target,
        rows,
        spread: max / min,
    })
}

#[cfg(test)]
#[allow(
    clippy::excessive_precision,
    clippy::field_reassign_with_default,
    clippy::type_complexity
)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.problem = Problem::Poisson1d { n: 15 };
        c.precision = PrecisionPlan::bits(vec![8, 16]);
        c.run.trials = trials;
        c
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn config_parses_documented_layout() {
        let text = r#"
levels = 3

[problem]
kind = "poisson2d"
k = 7

[smoother]
kind = "richardson"
omega = 0.5

[coarse]
kind = "perturbed"
sigma = 0.3
seed = 9

[precision]
pi_target = 0.00390625

[run]
trials = 4
rng_seed = 11
output_path = "out.csv"
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.levels, 3);
        assert_eq!(c.problem, Problem::Poisson2d { k: 7 });
        assert_eq!(
            c.coarse,
            CoarseConfig::Perturbed {
                sigma: 0.3,
                seed: 9
            }
        );
        assert_eq!(c.precision.pi_target, Some(0.00390625));
        assert_eq!(c.run.output_path.as_deref(), Some("out.csv"));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = small(0);
        assert!(c.validate().is_err());
        c.run.trials = 1;
        c.precision = PrecisionPlan::bits(vec![]);
        assert!(c.validate().is_err());
        c.precision = PrecisionPlan::bits(vec![52]);
        assert!(c.validate().is_err());
        c.precision = PrecisionPlan::default();
        assert!(c.validate().is_err());
        c.precision = PrecisionPlan::bits(vec![8]);
        c.problem = Problem::Poisson1d { n: 16 };
        assert!(c.validate().is_err());
        c.problem = Problem::Poisson1d { n: 15 };
        c.levels = 5;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("levels = 2").is_err());
    }

    #[test]
    fn rhs_is_seeded_and_normalized() {
        let a = draw_rhs(31, 5);
        assert_eq!(a, draw_rhs(31, 5));
        assert_ne!(a, draw_rhs(31, 6));
        assert!((norm2(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn run_is_deterministic() {
        let c = small(2);
        let a = csv_string(&run_experiment(&c).unwrap()).unwrap();
        let b = csv_string(&run_experiment(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 2 + 2 * 2);
    }

    #[test]
    fn carrier_run_matches_reference() {
        let mut c = small(5);
        c.precision = PrecisionPlan::bits(vec![53]);
        let exp = Experiment::prepare(&c).unwrap();
        for r in exp.run().unwrap() {
            let tol = 1e3 * f64::EPSILON / 2.0 * r.rhs_energy;
            assert!((r.fp_error - r.ref_error).abs() <= tol);
            assert!(r.pass);
        }
    }

    #[test]
    fn validation_accepts_own_output_and_flags_edits() {
        let recs = run_experiment(&small(3)).unwrap();
        let text = csv_string(&recs).unwrap();
        assert!(validate_csv(text.as_bytes()).unwrap().ok());
        let flipped = text.replacen(",true\n", ",false\n", 1);
        let v = validate_csv(flipped.as_bytes()).unwrap();
        assert!(!v.ok());
        assert_eq!(v.failed, vec![0]);
        assert_eq!(v.inconsistent.len(), 1);
        assert!(validate_csv("n,m\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn errors_echo_the_config() {
        let mut c = small(1);
        c.smoother = Smoother::Jacobi { omega: 3.0 };
        let err = run_experiment(&c).unwrap_err().to_string();
        assert!(err.contains("poisson1d(15)"), "{err}");
    }

    #[test]
    fn progressive_single_size_matches_run() {
        let base = small(3);
        let s = progressive_study(&base, &[15], 2f64.powi(-8), 3).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.spread, 1.0);
        let mut c = base.clone();
        c.precision = PrecisionPlan::progressive(2f64.powi(-8));
        let recs = run_experiment(&c).unwrap();
        assert_eq!(s.rows[0].delta_rho_tg, recs[0].report.delta_rho);
        assert_eq!(s.rows[0].significand_bits, recs[0].report.significand_bits);
    }
}
