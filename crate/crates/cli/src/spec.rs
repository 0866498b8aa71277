//! Experiment specification: key=value config text plus flag overrides,
//! resolved against scenario presets into a fully validated plan.

use std::path::PathBuf;

use weit_core::model::{dbm_to_watts, FormulaMode, SystemParams};
use weit_core::montecarlo::{uniform_grid, BeamMode, McConfig, SearchMethod};
use weit_core::tradeoff::Algorithm;

use crate::CliError;

/// Bundled experiment presets; `custom` starts from the desk-link defaults
/// and requires an explicit sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// UA/LA/EA/OA rate comparison over transmit power.
    Fig3,
    /// UA over transmit power at feedback budgets 0, 2, 4 bits and the
    /// full-CSI beam.
    Fig4,
    /// UA over transmit power at estimation correlations 1.0, 0.9, 0.5.
    Fig5,
    Custom,
}

impl Scenario {
    pub fn token(self) -> &'static str {
        match self {
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Result<Scenario, CliError> {
        match s {
            "fig3" => Ok(Scenario::Fig3),
            "fig4" => Ok(Scenario::Fig4),
            "fig5" => Ok(Scenario::Fig5),
            "custom" => Ok(Scenario::Custom),
            _ => Err(CliError::config(format!(
                "scenario must be one of fig3, fig4, fig5, custom; got `{s}`"
            ))),
        }
    }
}

/// Which variable the sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    P1Dbm,
    FeedbackBits,
    Rho,
    Tau,
}

impl SweepVar {
    pub fn token(self) -> &'static str {
        match self {
            SweepVar::P1Dbm => "p1_dbm",
            SweepVar::FeedbackBits => "feedback_bits",
            SweepVar::Rho => "rho",
            SweepVar::Tau => "tau",
        }
    }

    fn parse(s: &str) -> Result<SweepVar, CliError> {
        match s {
            "p1_dbm" => Ok(SweepVar::P1Dbm),
            "feedback_bits" => Ok(SweepVar::FeedbackBits),
            "rho" => Ok(SweepVar::Rho),
            "tau" => Ok(SweepVar::Tau),
            _ => Err(CliError::config(format!(
                "sweep must be one of p1_dbm, feedback_bits, rho, tau; got `{s}`"
            ))),
        }
    }
}

/// Inclusive sweep range, `steps >= 1` points from `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        (0..self.steps)
            .map(|i| {
                self.start + (self.stop - self.start) * (i as f64 / (self.steps - 1) as f64)
            })
            .collect()
    }

    fn parse(text: &str) -> Result<SweepRange, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::config(format!(
                "range must look like start:stop:steps; got `{text}`"
            )));
        }
        let start = parse_f64("range start", parts[0])?;
        let stop = parse_f64("range stop", parts[1])?;
        let steps: usize = parts[2]
            .parse()
            .map_err(|_| CliError::config(format!("range steps must be an integer; got `{}`", parts[2])))?;
        if steps < 1 {
            return Err(CliError::config("steps must be >= 1".to_string()));
        }
        Ok(SweepRange { start, stop, steps })
    }
}

impl std::fmt::Display for SweepRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

/// A fully resolved experiment plan.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub sweep: SweepVar,
    pub range: SweepRange,
    pub algorithms: Vec<Algorithm>,
    pub params: SystemParams,
    pub mc: McConfig,
    pub output_path: Option<PathBuf>,
    /// Adds a wall-clock line to the CSV metadata; off by default so
    /// repeated runs stay byte-identical.
    pub timestamp: bool,
}

/// Collects key=value pairs from config text and flags, then resolves them
/// against the scenario preset. Later pairs win, so flags appended after
/// file content override it.
#[derive(Debug, Default)]
pub struct SpecBuilder {
    pairs: Vec<(String, String)>,
}

impl SpecBuilder {
    pub fn new() -> SpecBuilder {
        SpecBuilder::default()
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.pairs.push((key.trim().to_string(), value.trim().to_string()));
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped.
    pub fn parse_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {}: expected key=value, got `{line}`",
                    lineno + 1
                )));
            };
            self.set(key, value);
        }
        Ok(())
    }

    pub fn resolve(self) -> Result<ExperimentSpec, CliError> {
        // the scenario decides the preset, so it is extracted first; the
        // last occurrence wins, like every other key
        let mut scenario = Scenario::Custom;
        for (key, value) in &self.pairs {
            if key == "scenario" {
                scenario = Scenario::parse(value)?;
            }
        }
        let mut draft = Draft::preset(scenario);
        for (key, value) in &self.pairs {
            if key != "scenario" {
                draft.apply(key, value)?;
            }
        }
        draft.finish()
    }
}

/// Parses config text alone (no flag overrides) into a resolved spec.
pub fn parse_spec(config_text: &str) -> Result<ExperimentSpec, CliError> {
    let mut builder = SpecBuilder::new();
    builder.parse_text(config_text)?;
    builder.resolve()
}

struct Draft {
    scenario: Scenario,
    sweep: Option<SweepVar>,
    range: Option<SweepRange>,
    algorithms: Option<Vec<Algorithm>>,
    params: SystemParams,
    draws: usize,
    seed: u64,
    search: SearchMethod,
    tau_points: usize,
    fixed_codebook: Option<u64>,
    out: Option<PathBuf>,
    timestamp: bool,
}

const ALL_ALGORITHMS: [Algorithm; 4] =
    [Algorithm::Ua, Algorithm::La, Algorithm::Ea, Algorithm::Oa];

impl Draft {
    fn preset(scenario: Scenario) -> Draft {
        let mut draft = Draft {
            scenario,
            sweep: None,
            range: None,
            algorithms: None,
            params: SystemParams::default(),
            draws: 100_000,
            seed: 42,
            search: SearchMethod::GoldenSection,
            tau_points: 101,
            fixed_codebook: None,
            out: None,
            timestamp: false,
        };
        match scenario {
            Scenario::Custom => {}
            Scenario::Fig3 => {
                draft.sweep = Some(SweepVar::P1Dbm);
                draft.range = Some(SweepRange {
                    start: -10.0,
                    stop: 30.0,
                    steps: 21,
                });
                draft.algorithms = Some(ALL_ALGORITHMS.to_vec());
            }
            Scenario::Fig4 | Scenario::Fig5 => {
                draft.sweep = Some(SweepVar::P1Dbm);
                draft.range = Some(SweepRange {
                    start: -10.0,
                    stop: 30.0,
                    steps: 21,
                });
                draft.algorithms = Some(vec![Algorithm::Ua]);
            }
        }
        draft
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "sweep" => self.sweep = Some(SweepVar::parse(value)?),
            "range" => self.range = Some(SweepRange::parse(value)?),
            "alg" => self.algorithms = Some(parse_algorithms(value)?),
            "nt" => self.params.nt = parse_usize(key, value)?,
            "bits" => {
                let bits = parse_usize(key, value)?;
                if bits > 16 {
                    return Err(CliError::config(format!(
                        "bits must lie in [0, 16], got {bits}"
                    )));
                }
                self.params.feedback_bits = bits as u32;
            }
            "eta" => self.params.eta = parse_f64(key, value)?,
            "p1_dbm" => self.params.p1_watts = dbm_to_watts(parse_f64(key, value)?),
            "sigma2_dbm" => self.params.sigma2_watts = dbm_to_watts(parse_f64(key, value)?),
            "slot_ms" => self.params.slot_seconds = parse_f64(key, value)? * 1e-3,
            "alpha" => self.params.alpha = parse_f64(key, value)?,
            "theta" => self.params.theta = parse_f64(key, value)?,
            "distance_m" => {
                // convenience: sets both path losses from the power law
                let loss = weit_core::model::path_loss(parse_f64(key, value)?, 4.0)
                    .map_err(|e| CliError::config(format!("distance_m: {e}")))?;
                self.params.alpha = loss;
                self.params.theta = loss;
            }
            "rho" => {
                let rho = parse_f64(key, value)?;
                if !(0.0..=1.0).contains(&rho) {
                    return Err(CliError::config(format!(
                        "rho must lie in [0, 1], got {rho}"
                    )));
                }
                self.params.rho = rho;
            }
            "entry_variance" => self.params.entry_variance = parse_f64(key, value)?,
            "mode" => {
                self.params.mode = value
                    .parse()
                    .map_err(|_| CliError::config(format!(
                        "mode must be consistent or paper-exact; got `{value}`"
                    )))?;
            }
            "draws" => self.draws = parse_usize(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "search" => {
                self.search = match value {
                    "grid" => SearchMethod::Grid,
                    "golden-section" => SearchMethod::GoldenSection,
                    _ => {
                        return Err(CliError::config(format!(
                            "search must be grid or golden-section; got `{value}`"
                        )))
                    }
                };
            }
            "tau_points" => {
                let points = parse_usize(key, value)?;
                if points < 2 {
                    return Err(CliError::config(format!(
                        "tau_points must be at least 2, got {points}"
                    )));
                }
                self.tau_points = points;
            }
            "fixed_codebook" => self.fixed_codebook = Some(parse_u64(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "timestamp" => {
                self.timestamp = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => {
                        return Err(CliError::config(format!(
                            "timestamp must be true or false; got `{value}`"
                        )))
                    }
                };
            }
            _ => {
                return Err(CliError::config(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentSpec, CliError> {
        let sweep = self
            .sweep
            .ok_or_else(|| CliError::config("missing required key `sweep`".to_string()))?;
        let range = self
            .range
            .ok_or_else(|| CliError::config("missing required key `range`".to_string()))?;
        let algorithms = self.algorithms.unwrap_or_else(|| ALL_ALGORITHMS.to_vec());

        if matches!(self.scenario, Scenario::Fig4 | Scenario::Fig5) && sweep != SweepVar::P1Dbm {
            return Err(CliError::config(format!(
                "scenario {} fixes sweep=p1_dbm",
                self.scenario.token()
            )));
        }
        if sweep == SweepVar::Tau {
            let bad = algorithms
                .iter()
                .find(|a| !matches!(a, Algorithm::Ua | Algorithm::La));
            if let Some(alg) = bad {
                return Err(CliError::config(format!(
                    "sweep=tau only supports UA and LA (no per-tau closed form exists for {alg})"
                )));
            }
        }

        self.params
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;

        // range values must sit inside the swept variable's domain
        for value in range.values() {
            match sweep {
                SweepVar::P1Dbm => {
                    if !value.is_finite() {
                        return Err(CliError::config(format!(
                            "p1_dbm sweep value must be finite, got {value}"
                        )));
                    }
                }
                SweepVar::FeedbackBits => {
                    if value < 0.0 || value > 16.0 || value.fract() != 0.0 {
                        return Err(CliError::config(format!(
                            "feedback_bits sweep values must be integers in [0, 16], got {value}"
                        )));
                    }
                }
                SweepVar::Rho => {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(CliError::config(format!(
                            "rho sweep values must lie in [0, 1], got {value}"
                        )));
                    }
                }
                SweepVar::Tau => {
                    if !(0.0..=self.params.slot_seconds).contains(&value) {
                        return Err(CliError::config(format!(
                            "tau sweep values must lie in [0, {}], got {value}",
                            self.params.slot_seconds
                        )));
                    }
                }
            }
        }

        if self.draws < 1 {
            return Err(CliError::config(format!(
                "draws must be at least 1, got {}",
                self.draws
            )));
        }

        let beam = match self.fixed_codebook {
            Some(seed) => BeamMode::FixedRvq(seed),
            None => BeamMode::PerDrawRvq,
        };
        let mc = McConfig {
            n_draws: self.draws,
            master_seed: self.seed,
            tau_grid: uniform_grid(self.params.slot_seconds, self.tau_points),
            search: self.search,
            beam,
        };

        Ok(ExperimentSpec {
            scenario: self.scenario,
            sweep,
            range,
            algorithms,
            params: self.params,
            mc,
            output_path: self.out,
            timestamp: self.timestamp,
        })
    }
}

fn parse_algorithms(value: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut algorithms = Vec::new();
    for token in value.split(',') {
        let alg = match token.trim().to_ascii_uppercase().as_str() {
            "UA" => Algorithm::Ua,
            "LA" => Algorithm::La,
            "EA" => Algorithm::Ea,
            "OA" => Algorithm::Oa,
            other => {
                return Err(CliError::config(format!(
                    "alg must be a comma-separated subset of UA,LA,EA,OA; got `{other}`"
                )))
            }
        };
        if !algorithms.contains(&alg) {
            algorithms.push(alg);
        }
    }
    if algorithms.is_empty() {
        return Err(CliError::config("alg must name at least one algorithm".to_string()));
    }
    Ok(algorithms)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("{key} must be a number; got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("{key} must be a non-negative integer; got `{value}`")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, CliError> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("{key} must be a non-negative integer; got `{value}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_preset_alone_resolves_fully() {
        let spec = parse_spec("scenario = fig3\n").unwrap();
        assert_eq!(spec.scenario, Scenario::Fig3);
        assert_eq!(spec.sweep, SweepVar::P1Dbm);
        assert_eq!(spec.range.start, -10.0);
        assert_eq!(spec.range.stop, 30.0);
        assert_eq!(spec.range.steps, 21);
        assert_eq!(spec.algorithms, ALL_ALGORITHMS.to_vec());
        assert_eq!(spec.params.feedback_bits, 4);
        assert_eq!(spec.mc.n_draws, 100_000);
        assert_eq!(spec.mc.tau_grid.len(), 101);
    }

    #[test]
    fn zero_steps_is_named_in_the_error() {
        let err = parse_spec("scenario=fig3\nrange=0:10:0\n").unwrap_err();
        assert!(err.to_string().contains("steps must be >= 1"), "{err}");
    }

    #[test]
    fn out_of_domain_rho_is_rejected() {
        let err = parse_spec("scenario=fig3\nrho=1.5\n").unwrap_err();
        assert!(err.to_string().contains("rho"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_spec("scenario=fig3\nfrobnicate=1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `frobnicate`"), "{err}");
    }

    #[test]
    fn custom_without_sweep_is_missing_a_key() {
        let err = parse_spec("draws=10\n").unwrap_err();
        assert!(err.to_string().contains("missing required key `sweep`"), "{err}");
    }

    #[test]
    fn later_pairs_override_earlier_ones() {
        let mut builder = SpecBuilder::new();
        builder.parse_text("scenario=fig3\nseed=1\n").unwrap();
        builder.set("seed", "9");
        let spec = builder.resolve().unwrap();
        assert_eq!(spec.mc.master_seed, 9);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let spec = parse_spec("# a comment\n\nscenario=fig3 # trailing\n").unwrap();
        assert_eq!(spec.scenario, Scenario::Fig3);
    }

    #[test]
    fn malformed_lines_are_reported_with_numbers() {
        let err = parse_spec("scenario=fig3\nnot a pair\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn tau_sweep_rejects_algorithms_without_curves() {
        let err = parse_spec("sweep=tau\nrange=0:0.005:11\nalg=UA,EA\n").unwrap_err();
        assert!(err.to_string().contains("sweep=tau"), "{err}");
        let ok = parse_spec("sweep=tau\nrange=0:0.005:11\nalg=UA,LA\n").unwrap();
        assert_eq!(ok.algorithms.len(), 2);
    }

    #[test]
    fn bits_sweep_requires_integers() {
        let err = parse_spec("sweep=feedback_bits\nrange=0:3:7\nalg=UA\n").unwrap_err();
        assert!(err.to_string().contains("integers"), "{err}");
        let ok = parse_spec("sweep=feedback_bits\nrange=0:4:3\nalg=UA\n").unwrap();
        assert_eq!(ok.range.values(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn fixed_codebook_switches_the_beam_mode() {
        let spec = parse_spec("scenario=fig3\nfixed_codebook=77\n").unwrap();
        assert_eq!(spec.mc.beam, BeamMode::FixedRvq(77));
    }

    #[test]
    fn fig4_cannot_change_the_sweep_variable() {
        let err = parse_spec("scenario=fig4\nsweep=rho\nrange=0:1:5\n").unwrap_err();
        assert!(err.to_string().contains("fig4"), "{err}");
    }

    #[test]
    fn dbm_and_milliseconds_convert_at_the_boundary() {
        let spec = parse_spec("scenario=fig3\np1_dbm=20\nslot_ms=2\n").unwrap();
        assert!((spec.params.p1_watts - 0.1).abs() < 1e-15);
        assert!((spec.params.slot_seconds - 2e-3).abs() < 1e-18);
    }
}
