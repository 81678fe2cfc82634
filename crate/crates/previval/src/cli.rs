//! Command-line front end: figure presets, custom scans from a flat
//! key-value config format, deterministic CSV emission, and validation runs
//! (Bayes equivalence + oracle deviation).
//!
//! CSV contract: a `#`-prefixed parameter block, a `lambda_tau,probability`
//! header, then one row per defined grid point with both columns printed to
//! 12 significant digits. Identical configuration yields identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::{scan, Grid, ScanContext, ScanQuantity, ScanResult};
use crate::core_state::{
    choose_truncation, AtomMatrix, AtomState, CoherentField, JointState, ModelParams, PomElement,
    PreparationEnsemble, DEFAULT_TAIL_TOL,
};
use crate::jc_evolution::EvolutionSpec;
use crate::oracle::max_deviation;
use crate::retrodiction::{bayes_invert_with_tol, retrodictive_prob_with_tol};
use crate::{Error, Result};
use num_complex::Complex64;

/// Bayes-equivalence threshold reported by `check` and `--validate`.
pub const BAYES_THRESHOLD: f64 = 1e-10;
/// Analytic-vs-numeric deviation threshold reported by `check` and `--validate`.
pub const ORACLE_THRESHOLD: f64 = 1e-8;

/// Scan direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Predictive,
    Retrodictive,
}

/// The measured POM element, by name or as an explicit Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PomChoice {
    Excited,
    Ground,
    Minus,
    Plus,
    Custom { gg: f64, ge_re: f64, ge_im: f64, ee: f64 },
}

/// Named pure atomic states usable as preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateChoice {
    Excited,
    Ground,
    Minus,
    Plus,
}

impl StateChoice {
    fn label(self) -> &'static str {
        match self {
            StateChoice::Excited => "e",
            StateChoice::Ground => "g",
            StateChoice::Minus => "minus",
            StateChoice::Plus => "plus",
        }
    }

    fn state(self, phase: f64) -> AtomState {
        match self {
            StateChoice::Excited => AtomState::excited(),
            StateChoice::Ground => AtomState::ground(),
            StateChoice::Minus => AtomState::minus(phase),
            StateChoice::Plus => AtomState::plus(phase),
        }
    }
}

/// A fully resolved scan configuration: figure presets and parsed config
/// files both end up here, so both render through the same CSV path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub scenario: String,
    pub magnitude: f64,
    pub phase: f64,
    pub detuning: f64,
    pub direction: Direction,
    pub pom: PomChoice,
    /// Preparation for predictive scans.
    pub prep: Option<StateChoice>,
    /// Ensemble member whose posterior a retrodictive scan reports.
    pub target: Option<String>,
    pub prior_e: f64,
    pub prior_g: f64,
    pub grid: Grid,
    pub tail_tol: f64,
}

impl ScanConfig {
    pub fn field(&self) -> Result<CoherentField> {
        CoherentField::new(self.magnitude, self.phase)
    }

    pub fn params(&self) -> Result<ModelParams> {
        // detuning is given in units of the coupling; fix coupling = 1
        ModelParams::new(self.detuning, 1.0)
    }

    pub fn pom_element(&self) -> Result<PomElement> {
        let pom = match self.pom {
            PomChoice::Excited => PomElement::projector(&AtomState::excited(), "e"),
            PomChoice::Ground => PomElement::projector(&AtomState::ground(), "g"),
            PomChoice::Minus => PomElement::projector(&AtomState::minus(self.phase), "minus"),
            PomChoice::Plus => PomElement::projector(&AtomState::plus(self.phase), "plus"),
            PomChoice::Custom { gg, ge_re, ge_im, ee } => {
                let matrix = AtomMatrix::hermitian(gg, Complex64::new(ge_re, ge_im), ee);
                PomElement::new(matrix, "custom")?
            }
        };
        Ok(pom)
    }

    pub fn ensemble(&self) -> Result<PreparationEnsemble> {
        PreparationEnsemble::ground_excited(self.prior_e, self.prior_g)
    }

    pub fn quantity(&self) -> Result<ScanQuantity> {
        let pom = self.pom_element()?;
        match self.direction {
            Direction::Predictive => {
                let prep = self.prep.ok_or_else(|| {
                    Error::InvalidParameter("predictive scan needs a prep state".into())
                })?;
                Ok(ScanQuantity::Predictive {
                    prep: prep.state(self.phase),
                    prep_label: prep.label().to_string(),
                    pom,
                })
            }
            Direction::Retrodictive => {
                let target = self.target.clone().ok_or_else(|| {
                    Error::InvalidParameter("retrodictive scan needs a target label".into())
                })?;
                Ok(ScanQuantity::Retrodictive { ensemble: self.ensemble()?, target, pom })
            }
        }
    }

    pub fn run(&self) -> Result<ScanResult> {
        let context = ScanContext {
            field: self.field()?,
            params: self.params()?,
            scenario: self.scenario.clone(),
            tail_tol: self.tail_tol,
        };
        scan(&self.quantity()?, &self.grid, &context)
    }
}

/// The figure presets, parameterized exactly as the published captions.
pub fn preset(name: &str) -> Result<ScanConfig> {
    let base = ScanConfig {
        scenario: name.to_string(),
        magnitude: 5.0,
        phase: 0.0,
        detuning: 0.0,
        direction: Direction::Retrodictive,
        pom: PomChoice::Excited,
        prep: None,
        target: Some("g".into()),
        prior_e: 0.5,
        prior_g: 0.5,
        grid: Grid::new(0.0, 50.0, 0.02)?,
        tail_tol: DEFAULT_TAIL_TOL,
    };
    let config = match name {
        // retrodictive P(g prepared | e measured), alpha = 5
        "fig1" => base,
        // same curve at alpha = 1.4
        "fig2a" => ScanConfig { magnitude: 1.4, grid: Grid::new(0.0, 25.0, 0.02)?, ..base },
        // predictive P(g measured | e prepared), alpha = 1.4
        "fig2b" => ScanConfig {
            magnitude: 1.4,
            direction: Direction::Predictive,
            pom: PomChoice::Ground,
            prep: Some(StateChoice::Excited),
            target: None,
            grid: Grid::new(0.0, 25.0, 0.02)?,
            ..base
        },
        // predictive P(e measured | g prepared), alpha = 1.4
        "fig2c" => ScanConfig {
            magnitude: 1.4,
            direction: Direction::Predictive,
            pom: PomChoice::Excited,
            prep: Some(StateChoice::Ground),
            target: None,
            grid: Grid::new(0.0, 25.0, 0.02)?,
            ..base
        },
        // retrodictive P(e prepared | minus measured), alpha = 5
        "fig3" => ScanConfig { pom: PomChoice::Minus, target: Some("e".into()), ..base },
        other => {
            return Err(Error::Config {
                line: 0,
                message: format!(
                    "unknown preset {other:?} (expected fig1, fig2a, fig2b, fig2c or fig3)"
                ),
            })
        }
    };
    Ok(config)
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

/// Parse the flat `key = value` config format. `#` starts a comment, blank
/// lines are ignored, keys may appear once.
pub fn parse_config(text: &str) -> Result<ScanConfig> {
    let mut keys: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(line_no, format!("expected `key = value`, got {line:?}")));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(config_err(line_no, format!("key {key:?} has no value")));
        }
        if keys.insert(key.clone(), (line_no, value)).is_some() {
            return Err(config_err(line_no, format!("duplicate key {key:?}")));
        }
    }

    let mut take = |key: &str| keys.remove(key);
    let parse_f64 = |key: &str, entry: (usize, String)| -> Result<f64> {
        entry.1.parse::<f64>().map_err(|_| {
            config_err(entry.0, format!("key {key:?}: expected a number, got {:?}", entry.1))
        })
    };

    let require = |key: &str, entry: Option<(usize, String)>| -> Result<(usize, String)> {
        entry.ok_or_else(|| config_err(0, format!("missing required key {key:?}")))
    };

    let magnitude = parse_f64("alpha", require("alpha", take("alpha"))?)?;
    let phase = take("phi").map(|e| parse_f64("phi", e)).transpose()?.unwrap_or(0.0);
    let detuning = take("delta").map(|e| parse_f64("delta", e)).transpose()?.unwrap_or(0.0);
    let scenario = take("scenario").map(|e| e.1).unwrap_or_else(|| "custom".to_string());

    let direction_entry = require("direction", take("direction"))?;
    let direction = match direction_entry.1.as_str() {
        "predictive" => Direction::Predictive,
        "retrodictive" => Direction::Retrodictive,
        other => {
            return Err(config_err(
                direction_entry.0,
                format!("direction must be predictive or retrodictive, got {other:?}"),
            ))
        }
    };

    let pom_entry = require("pom", take("pom"))?;
    let pom = match pom_entry.1.as_str() {
        "e" => PomChoice::Excited,
        "g" => PomChoice::Ground,
        "minus" => PomChoice::Minus,
        "plus" => PomChoice::Plus,
        "custom" => {
            let mut custom_value = |key: &str| -> Result<f64> {
                let entry = take(key).ok_or_else(|| {
                    config_err(pom_entry.0, format!("pom = custom requires key {key:?}"))
                })?;
                parse_f64(key, entry)
            };
            PomChoice::Custom {
                gg: custom_value("pom_gg")?,
                ge_re: custom_value("pom_ge_re")?,
                ge_im: custom_value("pom_ge_im")?,
                ee: custom_value("pom_ee")?,
            }
        }
        other => {
            return Err(config_err(
                pom_entry.0,
                format!("pom must be e, g, minus, plus or custom, got {other:?}"),
            ))
        }
    };

    let prep = match take("prep") {
        None => None,
        Some((line_no, value)) => Some(match value.as_str() {
            "e" => StateChoice::Excited,
            "g" => StateChoice::Ground,
            "minus" => StateChoice::Minus,
            "plus" => StateChoice::Plus,
            other => {
                return Err(config_err(
                    line_no,
                    format!("prep must be e, g, minus or plus, got {other:?}"),
                ))
            }
        }),
    };
    let target = take("target").map(|e| e.1);

    let prior_e = take("prior_e").map(|e| parse_f64("prior_e", e)).transpose()?.unwrap_or(0.5);
    let prior_g = take("prior_g").map(|e| parse_f64("prior_g", e)).transpose()?.unwrap_or(0.5);
    let tail_tol = take("tail_tol")
        .map(|e| parse_f64("tail_tol", e))
        .transpose()?
        .unwrap_or(DEFAULT_TAIL_TOL);

    let grid_start = parse_f64("grid_start", require("grid_start", take("grid_start"))?)?;
    let grid_stop = parse_f64("grid_stop", require("grid_stop", take("grid_stop"))?)?;
    let grid_step = parse_f64("grid_step", require("grid_step", take("grid_step"))?)?;

    if let Some((line_no, _)) = keys.into_iter().next().map(|(k, v)| (v.0, k)) {
        return Err(config_err(line_no, "unknown key"));
    }

    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(config_err(0, format!("tail_tol must lie in (0, 1), got {tail_tol}")));
    }
    match direction {
        Direction::Predictive if prep.is_none() => {
            return Err(config_err(0, "direction = predictive requires key \"prep\""));
        }
        Direction::Retrodictive if target.is_none() => {
            return Err(config_err(0, "direction = retrodictive requires key \"target\""));
        }
        _ => {}
    }

    let config = ScanConfig {
        scenario,
        magnitude,
        phase,
        detuning,
        direction,
        pom,
        prep,
        target,
        prior_e,
        prior_g,
        grid: Grid::new(grid_start, grid_stop, grid_step)
            .map_err(|e| config_err(0, e.to_string()))?,
        tail_tol,
    };
    // surface invalid physical values as config errors too
    config.field().map_err(|e| config_err(0, e.to_string()))?;
    config.params().map_err(|e| config_err(0, e.to_string()))?;
    config.ensemble().map_err(|e| config_err(0, e.to_string()))?;
    config.pom_element().map_err(|e| config_err(0, e.to_string()))?;
    Ok(config)
}

/// 12 significant digits, `.` decimal separator, byte deterministic.
fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Render a completed scan to CSV text.
pub fn render_csv(config: &ScanConfig, result: &ScanResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# previval scan");
    let _ = writeln!(out, "# scenario = {}", config.scenario);
    let _ = writeln!(out, "# alpha = {}", fmt_sig(config.magnitude));
    let _ = writeln!(out, "# phi = {}", fmt_sig(config.phase));
    let _ = writeln!(out, "# delta = {}", fmt_sig(config.detuning));
    let direction = match config.direction {
        Direction::Predictive => "predictive",
        Direction::Retrodictive => "retrodictive",
    };
    let _ = writeln!(out, "# direction = {direction}");
    let _ = writeln!(out, "# pom = {}", result.meta.pom_label);
    match config.direction {
        Direction::Predictive => {
            let prep = config.prep.map(StateChoice::label).unwrap_or("?");
            let _ = writeln!(out, "# prep = {prep}");
        }
        Direction::Retrodictive => {
            let _ = writeln!(out, "# target = {}", config.target.as_deref().unwrap_or("?"));
            let _ = writeln!(out, "# prior_e = {}", fmt_sig(config.prior_e));
            let _ = writeln!(out, "# prior_g = {}", fmt_sig(config.prior_g));
        }
    }
    let _ = writeln!(out, "# tail_tol = {}", fmt_sig(config.tail_tol));
    let _ = writeln!(
        out,
        "# grid = {} {} {}",
        fmt_sig(config.grid.start),
        fmt_sig(config.grid.stop),
        fmt_sig(config.grid.step)
    );
    let _ = writeln!(out, "lambda_tau,probability");
    for point in &result.points {
        match point.value {
            Some(v) => {
                let _ = writeln!(out, "{},{}", fmt_sig(point.lambda_tau), fmt_sig(v));
            }
            None => {
                let _ = writeln!(out, "# gap lambda_tau = {}", fmt_sig(point.lambda_tau));
            }
        }
    }
    out
}

/// Run a config and write its CSV. Errors with
/// [`Error::ZeroProbabilityOutcome`] when no grid point is defined.
pub fn run_to_file(config: &ScanConfig, output: &Path) -> Result<ScanResult> {
    let result = config.run()?;
    if result.points.iter().all(|p| p.value.is_none()) {
        let first = result.points.first().map(|p| p.lambda_tau).unwrap_or(0.0);
        return Err(Error::ZeroProbabilityOutcome { lambda_tau: first });
    }
    std::fs::write(output, render_csv(config, &result))?;
    Ok(result)
}

/// Outcome of a validation run.
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport {
    pub bayes_deviation: f64,
    pub oracle_deviation: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.bayes_deviation < BAYES_THRESHOLD && self.oracle_deviation < ORACLE_THRESHOLD
    }
}

/// Bayes-equivalence and oracle-deviation checks for one configured
/// scenario, over its own grid.
pub fn validate_config(config: &ScanConfig) -> Result<ValidationReport> {
    let field = config.field()?;
    let params = config.params()?;
    let pom = config.pom_element()?;
    let ensemble = config.ensemble()?;
    let grid_points = config.grid.points();

    let mut bayes_deviation = 0.0f64;
    for &lambda_tau in &grid_points {
        let spec = EvolutionSpec::new(params, lambda_tau)?;
        for label in ["e", "g"] {
            let direct = retrodictive_prob_with_tol(
                &ensemble, label, &pom, &field, &spec, config.tail_tol,
            );
            let bayes =
                bayes_invert_with_tol(&ensemble, &pom, &field, &spec, label, config.tail_tol);
            match (direct, bayes) {
                (Ok(a), Ok(b)) => bayes_deviation = bayes_deviation.max((a - b).abs()),
                (Err(Error::ZeroProbabilityOutcome { .. }), Err(Error::ZeroProbabilityOutcome { .. })) => {}
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }

    let n_max = choose_truncation(&field, config.tail_tol);
    let mut oracle_deviation = 0.0f64;
    for atom in [AtomState::ground(), AtomState::excited()] {
        let initial = JointState::from_product(&atom, &field, n_max)?;
        oracle_deviation =
            oracle_deviation.max(max_deviation(&initial, &params, &grid_points)?);
    }
    Ok(ValidationReport { bayes_deviation, oracle_deviation })
}

/// The full consistency suite: Bayes equivalence and oracle deviation over
/// the standard parameter sweep. Returns the per-scenario reports with
/// their labels; every report must pass.
pub fn check_suite() -> Result<Vec<(String, ValidationReport)>> {
    let grid = Grid::new(0.0, 50.0, 0.1)?;
    let mut reports = Vec::new();
    for &magnitude in &[0.0, 1.4, 5.0] {
        for &detuning in &[0.0, 1.0] {
            for pom in [PomChoice::Excited, PomChoice::Ground, PomChoice::Minus] {
                let config = ScanConfig {
                    scenario: "check".into(),
                    magnitude,
                    phase: 0.0,
                    detuning,
                    direction: Direction::Retrodictive,
                    pom,
                    prep: None,
                    target: Some("g".into()),
                    prior_e: 0.5,
                    prior_g: 0.5,
                    grid,
                    tail_tol: DEFAULT_TAIL_TOL,
                };
                let label = format!(
                    "alpha={magnitude} delta={detuning} pom={}",
                    config.pom_element()?.label()
                );
                reports.push((label, validate_config(&config)?));
            }
        }
    }
    Ok(reports)
}
