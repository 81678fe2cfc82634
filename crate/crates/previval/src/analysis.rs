//! Curve scanning over `lambda * tau` grids and extraction of the
//! collapse/revival observables: early Rabi period, collapse plateau,
//! revival (or previval) location, and the unretrodictability gap.

use crate::core_state::{
    pom_projector, AtomState, CoherentField, ModelParams, PomElement, PreparationEnsemble,
    DEFAULT_TAIL_TOL,
};
use crate::jc_evolution::{rabi_frequency, EvolutionSpec};
use crate::retrodiction::{predictive_prob_with_tol, retrodictive_prob, retrodictive_prob_with_tol};
use crate::{Error, Result};

/// Uniform grid of `lambda * tau` values, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!("grid step must be > 0, got {step}")));
        }
        if !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::InvalidParameter(format!(
                "grid range [{start}, {stop}] is empty or not finite"
            )));
        }
        Ok(Self { start, stop, step })
    }

    /// Grid points `start + k * step`, computed from the index so repeated
    /// addition cannot drift.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step).round() as usize;
        (0..=count).map(|k| self.start + self.step * k as f64).collect()
    }
}

/// Which conditional probability a scan evaluates at each grid point.
#[derive(Debug, Clone)]
pub enum ScanQuantity {
    /// `P(outcome | prep)`: probability of the measurement outcome given a
    /// pure preparation.
    Predictive { prep: AtomState, prep_label: String, pom: PomElement },
    /// `P(target prepared | outcome)`: probability that the ensemble member
    /// `target` was prepared given the measurement outcome.
    Retrodictive { ensemble: PreparationEnsemble, target: String, pom: PomElement },
}

impl ScanQuantity {
    pub fn pom_label(&self) -> &str {
        match self {
            ScanQuantity::Predictive { pom, .. } => pom.label(),
            ScanQuantity::Retrodictive { pom, .. } => pom.label(),
        }
    }
}

/// One sampled point. `value` is `None` where the scanned quantity is
/// undefined (conditioning on a zero-probability outcome).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub lambda_tau: f64,
    pub value: Option<f64>,
}

/// Scan metadata, carried along for reporting and CSV emission.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanMeta {
    pub scenario: String,
    pub magnitude: f64,
    pub phase: f64,
    pub detuning: f64,
    pub ensemble: String,
    pub pom_label: String,
    pub step: f64,
}

/// A sampled probability curve with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub meta: ScanMeta,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    /// Defined points within a `lambda * tau` window (inclusive).
    fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.lambda_tau >= lo && p.lambda_tau <= hi)
            .filter_map(|p| p.value.map(|v| (p.lambda_tau, v)))
            .collect()
    }
}

/// Everything a scan needs besides the quantity and the grid: the field,
/// the model constants, a scenario label and the truncation tolerance.
#[derive(Debug, Clone)]
pub struct ScanContext {
    pub field: CoherentField,
    pub params: ModelParams,
    pub scenario: String,
    pub tail_tol: f64,
}

impl ScanContext {
    pub fn new(field: CoherentField, params: ModelParams, scenario: impl Into<String>) -> Self {
        Self { field, params, scenario: scenario.into(), tail_tol: DEFAULT_TAIL_TOL }
    }
}

/// Evaluate the quantity over the grid. Deterministic; zero-probability
/// outcomes become gap points rather than silent zeros, while any other
/// error aborts the scan.
pub fn scan(quantity: &ScanQuantity, grid: &Grid, context: &ScanContext) -> Result<ScanResult> {
    let field = &context.field;
    let params = &context.params;
    let mut points = Vec::new();
    for lambda_tau in grid.points() {
        let spec = EvolutionSpec::new(*params, lambda_tau)?;
        let value = match quantity {
            ScanQuantity::Predictive { prep, pom, .. } => {
                Some(predictive_prob_with_tol(prep, field, pom, &spec, context.tail_tol))
            }
            ScanQuantity::Retrodictive { ensemble, target, pom } => {
                match retrodictive_prob_with_tol(ensemble, target, pom, field, &spec, context.tail_tol)
                {
                    Ok(v) => Some(v),
                    Err(Error::ZeroProbabilityOutcome { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
        };
        points.push(ScanPoint { lambda_tau, value });
    }
    let ensemble = match quantity {
        ScanQuantity::Predictive { prep_label, .. } => format!("prep={prep_label}"),
        ScanQuantity::Retrodictive { ensemble, target, .. } => {
            let members: Vec<String> = ensemble
                .members()
                .iter()
                .map(|m| format!("{}:{}", m.label, m.prior))
                .collect();
            format!("{{{}}} target={target}", members.join(", "))
        }
    };
    Ok(ScanResult {
        meta: ScanMeta {
            scenario: context.scenario.clone(),
            magnitude: field.magnitude(),
            phase: field.phase(),
            detuning: params.detuning,
            ensemble,
            pom_label: quantity.pom_label().to_string(),
            step: grid.step,
        },
        points,
    })
}

/// Summary of a curve over a window: mean level, peak deviation from that
/// mean, and the oscillation period estimated from the mean spacing of
/// local maxima (absent when fewer than two are found).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeStats {
    pub mean: f64,
    pub peak_deviation: f64,
    pub period: Option<f64>,
}

/// Requires at least 20 defined samples in the window. Only local maxima at
/// or above the window mean count toward the period, which suppresses the
/// micro-ripple near the floor of a collapsed curve.
pub fn envelope_stats(result: &ScanResult, window: (f64, f64)) -> Result<EnvelopeStats> {
    let samples = result.window(window.0, window.1);
    if samples.len() < 20 {
        return Err(Error::InvalidParameter(format!(
            "window [{}, {}] holds {} samples, need >= 20",
            window.0,
            window.1,
            samples.len()
        )));
    }
    let mean = samples.iter().map(|(_, v)| v).sum::<f64>() / samples.len() as f64;
    let peak_deviation = samples.iter().map(|(_, v)| (v - mean).abs()).fold(0.0, f64::max);

    let mut maxima = Vec::new();
    for i in 1..samples.len() - 1 {
        let (x, v) = samples[i];
        if v >= samples[i - 1].1 && v > samples[i + 1].1 && v >= mean {
            maxima.push(x);
        }
    }
    let period = if maxima.len() >= 2 {
        Some((maxima.last().unwrap() - maxima[0]) / (maxima.len() - 1) as f64)
    } else {
        None
    };
    Ok(EnvelopeStats { mean, peak_deviation, period })
}

/// Locate the strongest resurgence of oscillations after a collapse.
///
/// The curve's deviation from the collapse-window mean is smoothed with a
/// centered moving average of width `smoothing_width` (in `lambda * tau`)
/// and maximized over the search window. Returns `None` when the peak does
/// not rise above twice the smoothed noise floor of the collapse window.
pub fn find_revival(
    result: &ScanResult,
    collapse_window: (f64, f64),
    search_window: (f64, f64),
    smoothing_width: f64,
) -> Result<Option<f64>> {
    if collapse_window.1 > search_window.0 {
        return Err(Error::InvalidParameter(
            "collapse window must precede the search window".into(),
        ));
    }
    let collapse = result.window(collapse_window.0, collapse_window.1);
    if collapse.is_empty() {
        return Err(Error::InvalidParameter("collapse window holds no samples".into()));
    }
    let baseline = collapse.iter().map(|(_, v)| v).sum::<f64>() / collapse.len() as f64;

    let all: Vec<(f64, f64)> =
        result.points.iter().filter_map(|p| p.value.map(|v| (p.lambda_tau, v))).collect();
    let deviation: Vec<f64> = all.iter().map(|(_, v)| (v - baseline).abs()).collect();
    let half_width = 0.5 * smoothing_width.max(result.meta.step);
    let smoothed: Vec<f64> = (0..all.len())
        .map(|i| {
            let x = all[i].0;
            let mut total = 0.0;
            let mut count = 0usize;
            let mut j = i;
            while j > 0 && all[j - 1].0 >= x - half_width {
                j -= 1;
            }
            while j < all.len() && all[j].0 <= x + half_width {
                total += deviation[j];
                count += 1;
                j += 1;
            }
            total / count as f64
        })
        .collect();

    let floor = all
        .iter()
        .zip(&smoothed)
        .filter(|((x, _), _)| *x >= collapse_window.0 && *x <= collapse_window.1)
        .map(|(_, s)| *s)
        .fold(0.0, f64::max);

    let peak = all
        .iter()
        .zip(&smoothed)
        .filter(|((x, _), _)| *x >= search_window.0 && *x <= search_window.1)
        .max_by(|a, b| a.1.total_cmp(b.1));
    match peak {
        Some(((x, _), s)) if *s > (2.0 * floor).max(1e-3) => Ok(Some(*x)),
        _ => Ok(None),
    }
}

/// Distance of the retrodicted preparation probabilities from the
/// no-information value 1/2, for a measurement in the superposition state
/// matched to the field phase and the uniform ground/excited ensemble.
///
/// Zero means the preparation is unretrodictable at this elapsed time.
pub fn unretrodictability_gap(field: &CoherentField, spec: &EvolutionSpec) -> Result<f64> {
    let pom = pom_projector(&AtomState::minus(field.phase()), "minus");
    let ensemble = PreparationEnsemble::uniform_ground_excited();
    let mut gap = 0.0f64;
    for label in ["e", "g"] {
        let p = retrodictive_prob(&ensemble, label, &pom, field, spec)?;
        gap = gap.max((p - 0.5).abs());
    }
    Ok(gap)
}

/// Resonant revival time in `lambda * tau` units: `2 * pi * sqrt(nbar)`.
pub fn revival_time(field: &CoherentField) -> f64 {
    2.0 * std::f64::consts::PI * field.mean_photon_number().sqrt()
}

/// Half the resonant revival time, `pi * sqrt(nbar)`: the elapsed time at
/// which a minus-state measurement makes the preparation unretrodictable.
pub fn half_revival_time(field: &CoherentField) -> f64 {
    0.5 * revival_time(field)
}

/// The literal expression `tau = pi / (2 * Omega(nbar))` converted to
/// `lambda * tau` units, with `Omega` evaluated at the mean photon number.
///
/// Kept alongside [`half_revival_time`] because the two differ by a factor
/// of `4 * nbar` on resonance; the semantic half-revival value is the one
/// the no-information point actually tracks.
pub fn half_revival_time_literal(field: &CoherentField, params: &ModelParams) -> f64 {
    let nbar = field.mean_photon_number();
    let omega = (params.detuning * params.detuning
        + 4.0 * params.coupling * params.coupling * nbar)
        .sqrt();
    std::f64::consts::PI * params.coupling / (2.0 * omega)
}

/// Early-oscillation Rabi period in `lambda * tau` units, `2*pi*lambda/Omega(nbar)`,
/// used as the natural smoothing scale for envelope extraction.
pub fn rabi_period(field: &CoherentField, params: &ModelParams) -> f64 {
    let nbar = field.mean_photon_number().round() as usize;
    2.0 * std::f64::consts::PI * params.coupling / rabi_frequency(nbar.max(1), params)
}
