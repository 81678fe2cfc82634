//! Domain types: atom, field and joint states, measurement POM elements,
//! preparation ensembles, coherent-state construction and truncation control.
//!
//! Basis conventions: atomic matrices and amplitude pairs are ordered
//! `{|g>, |e>}`; joint amplitudes carry one coefficient per photon number
//! `n = 0..=n_max` for each atomic level.

use num_complex::Complex64;

use crate::{Error, Result};

/// Default Poisson-tail tolerance for Fock-space truncation.
///
/// Keeps the truncation error far below every tolerance asserted elsewhere.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const HERMITICITY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;

/// Physical parameters of the atom-field model.
///
/// Natural units with `hbar = 1`. The coupling constant sets the time scale;
/// elapsed times are reported as the dimensionless product `lambda * tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Detuning between the atomic transition and the field mode (angular
    /// frequency, same units as the coupling).
    pub detuning: f64,
    /// Atom-field coupling constant, strictly positive.
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(detuning: f64, coupling: f64) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "detuning must be finite, got {detuning}"
            )));
        }
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be positive and finite, got {coupling}"
            )));
        }
        Ok(Self { detuning, coupling })
    }

    /// Resonant model with unit coupling: times are `lambda * tau` directly.
    pub fn resonant() -> Self {
        Self { detuning: 0.0, coupling: 1.0 }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::resonant()
    }
}

/// A coherent field state `|alpha>` with `alpha = magnitude * exp(i*phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentField {
    magnitude: f64,
    phase: f64,
}

impl CoherentField {
    /// The phase is reduced into `[0, 2*pi)`.
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coherent magnitude must be >= 0 and finite, got {magnitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coherent phase must be finite, got {phase}"
            )));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let mut phase = phase.rem_euclid(tau);
        if phase >= tau {
            phase = 0.0;
        }
        Ok(Self { magnitude, phase })
    }

    /// Vacuum field, `alpha = 0`.
    pub fn vacuum() -> Self {
        Self { magnitude: 0.0, phase: 0.0 }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Complex amplitude `alpha`.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }

    /// Mean photon number `|alpha|^2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.magnitude * self.magnitude
    }
}

/// A pure atomic state `c_g |g> + c_e |e>`, normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomState {
    pub c_g: Complex64,
    pub c_e: Complex64,
}

impl AtomState {
    pub fn new(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        let norm_sq = c_g.norm_sqr() + c_e.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm: norm_sq.sqrt() });
        }
        Ok(Self { c_g, c_e })
    }

    pub fn ground() -> Self {
        Self { c_g: Complex64::ONE, c_e: Complex64::ZERO }
    }

    pub fn excited() -> Self {
        Self { c_g: Complex64::ZERO, c_e: Complex64::ONE }
    }

    /// The superposition `(|g> - exp(i*phase) |e>) / sqrt(2)`.
    ///
    /// This is the state into which, for a strong resonant coherent field,
    /// every prepared atomic state relaxes once its Rabi oscillations have
    /// collapsed; `phase` is the phase of the coherent amplitude.
    pub fn minus(phase: f64) -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c_g: Complex64::new(inv_sqrt2, 0.0),
            c_e: -Complex64::from_polar(inv_sqrt2, phase),
        }
    }

    /// Orthogonal partner of [`AtomState::minus`]:
    /// `(|g> + exp(i*phase) |e>) / sqrt(2)`.
    pub fn plus(phase: f64) -> Self {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c_g: Complex64::new(inv_sqrt2, 0.0),
            c_e: Complex64::from_polar(inv_sqrt2, phase),
        }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.c_g.conj() * other.c_g + self.c_e.conj() * other.c_e
    }
}

/// Joint atom-field amplitudes over `{|g>, |e>} (x) {|0> ... |n_max>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    c_g: Vec<Complex64>,
    c_e: Vec<Complex64>,
}

impl JointState {
    /// Build from raw amplitude sequences (each of length `n_max + 1`).
    pub fn new(c_g: Vec<Complex64>, c_e: Vec<Complex64>) -> Result<Self> {
        if c_g.len() != c_e.len() {
            return Err(Error::DimensionMismatch { expected: c_g.len(), actual: c_e.len() });
        }
        if c_g.len() < 2 {
            return Err(Error::InvalidParameter(
                "joint state needs n_max >= 1 (at least two photon slots)".into(),
            ));
        }
        let state = Self { c_g, c_e };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Product state `atom (x) field`, truncated at `n_max` and renormalized.
    ///
    /// The renormalization only removes the (tiny) Poisson tail cut off by
    /// the truncation, so the stored amplitudes satisfy the unit-norm
    /// invariant exactly.
    pub fn from_product(atom: &AtomState, field: &CoherentField, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        let coeffs = coherent_coefficients(field, n_max);
        let c_g: Vec<_> = coeffs.iter().map(|a| a * atom.c_g).collect();
        let c_e: Vec<_> = coeffs.iter().map(|a| a * atom.c_e).collect();
        let mut state = Self { c_g, c_e };
        let norm = state.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        let scale = Complex64::new(1.0 / norm, 0.0);
        for c in state.c_g.iter_mut().chain(state.c_e.iter_mut()) {
            *c *= scale;
        }
        Ok(state)
    }

    /// Truncation bound: the highest retained photon number.
    pub fn n_max(&self) -> usize {
        self.c_g.len() - 1
    }

    /// Amplitude of `|g>|n>`.
    pub fn c_g(&self, n: usize) -> Complex64 {
        self.c_g[n]
    }

    /// Amplitude of `|e>|n>`.
    pub fn c_e(&self, n: usize) -> Complex64 {
        self.c_e[n]
    }

    pub fn amplitudes_g(&self) -> &[Complex64] {
        &self.c_g
    }

    pub fn amplitudes_e(&self) -> &[Complex64] {
        &self.c_e
    }

    pub fn norm(&self) -> f64 {
        self.c_g
            .iter()
            .chain(self.c_e.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Joint-space inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.c_g.len() != other.c_g.len() {
            return Err(Error::DimensionMismatch {
                expected: self.c_g.len(),
                actual: other.c_g.len(),
            });
        }
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        Ok(dot(&self.c_g, &other.c_g) + dot(&self.c_e, &other.c_e))
    }

    pub(crate) fn from_raw_unchecked(c_g: Vec<Complex64>, c_e: Vec<Complex64>) -> Self {
        Self { c_g, c_e }
    }

    /// Max elementwise amplitude difference to another state.
    pub fn max_amplitude_deviation(&self, other: &Self) -> f64 {
        self.c_g
            .iter()
            .zip(&other.c_g)
            .chain(self.c_e.iter().zip(&other.c_e))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A 2x2 Hermitian matrix over the atomic basis `{|g>, |e>}`.
///
/// Used both for atomic density operators and for preparation-device
/// operators; Hermiticity is enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomMatrix {
    m: [[Complex64; 2]; 2],
}

impl AtomMatrix {
    /// Validates Hermiticity within `1e-12`.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m[0][0].im.abs() > HERMITICITY_TOL
            || m[1][1].im.abs() > HERMITICITY_TOL
            || (m[0][1] - m[1][0].conj()).norm() > HERMITICITY_TOL
        {
            return Err(Error::InvalidParameter("matrix is not Hermitian".into()));
        }
        Ok(Self { m })
    }

    /// Infallible Hermitian builder from real diagonal entries and the
    /// upper off-diagonal element.
    pub fn hermitian(gg: f64, ge: Complex64, ee: f64) -> Self {
        Self {
            m: [
                [Complex64::new(gg, 0.0), ge],
                [ge.conj(), Complex64::new(ee, 0.0)],
            ],
        }
    }

    /// Rank-1 projector `|psi><psi|`.
    pub fn from_pure(state: &AtomState) -> Self {
        Self {
            m: [
                [state.c_g * state.c_g.conj(), state.c_g * state.c_e.conj()],
                [state.c_e * state.c_g.conj(), state.c_e * state.c_e.conj()],
            ],
        }
    }

    pub fn identity() -> Self {
        Self::hermitian(1.0, Complex64::ZERO, 1.0)
    }

    pub fn zero() -> Self {
        Self::hermitian(0.0, Complex64::ZERO, 0.0)
    }

    /// Element in `{g, e}` ordering: `(0,0) = <g|..|g>`, `(1,1) = <e|..|e>`.
    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// `Tr(self * other)`; real for Hermitian factors.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let mut t = Complex64::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                t += self.m[i][j] * other.m[j][i];
            }
        }
        t.re
    }

    pub fn scale(&self, factor: f64) -> Self {
        let f = Complex64::new(factor, 0.0);
        Self {
            m: [
                [self.m[0][0] * f, self.m[0][1] * f],
                [self.m[1][0] * f, self.m[1][1] * f],
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.m;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += other.m[i][j];
            }
        }
        Self { m }
    }

    /// Eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let half_diff = 0.5 * (a - d);
        let r = (half_diff * half_diff + self.m[0][1].norm_sqr()).sqrt();
        let mean = 0.5 * (a + d);
        [mean - r, mean + r]
    }

    /// Spectral decomposition into weighted orthonormal pure states.
    ///
    /// For a (near-)diagonal matrix the basis states `|g>`, `|e>` are
    /// returned directly, which also covers the degenerate case.
    pub fn eigendecomposition(&self) -> [(f64, AtomState); 2] {
        let [lo, hi] = self.eigenvalues();
        let b = self.m[0][1];
        if b.norm() <= 1e-14 {
            let a = self.m[0][0].re;
            let d = self.m[1][1].re;
            let (first, second) = if a <= d {
                ((a, AtomState::ground()), (d, AtomState::excited()))
            } else {
                ((d, AtomState::excited()), (a, AtomState::ground()))
            };
            return [first, second];
        }
        let vector_for = |lambda: f64| -> AtomState {
            // (a - lambda) c_g + b c_e = 0; pick the better-conditioned row.
            let a = self.m[0][0].re;
            let d = self.m[1][1].re;
            let (c_g, c_e) = if (a - lambda).abs() >= (d - lambda).abs() {
                (b, Complex64::new(lambda - a, 0.0))
            } else {
                (Complex64::new(lambda - d, 0.0), b.conj())
            };
            let n = (c_g.norm_sqr() + c_e.norm_sqr()).sqrt();
            AtomState { c_g: c_g / n, c_e: c_e / n }
        };
        [(lo, vector_for(lo)), (hi, vector_for(hi))]
    }

    /// Check density-operator invariants: trace 1 within `trace_tol` and
    /// eigenvalues `>= -psd_tol`.
    pub fn is_density(&self, trace_tol: f64, psd_tol: f64) -> bool {
        let [lo, _] = self.eigenvalues();
        (self.trace().re - 1.0).abs() <= trace_tol
            && self.trace().im.abs() <= trace_tol
            && lo >= -psd_tol
    }
}

/// One element of a probability operator measure (POM / POVM), with a label
/// naming the measurement outcome it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct PomElement {
    matrix: AtomMatrix,
    label: String,
}

impl PomElement {
    /// Validates non-negativity: eigenvalues in `[-1e-12, 1 + 1e-12]`.
    pub fn new(matrix: AtomMatrix, label: impl Into<String>) -> Result<Self> {
        let [lo, hi] = matrix.eigenvalues();
        if lo < -1e-12 || hi > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "POM element eigenvalues [{lo}, {hi}] outside [0, 1]"
            )));
        }
        Ok(Self { matrix, label: label.into() })
    }

    /// Rank-1 projector onto a pure atomic state (von Neumann outcome).
    pub fn projector(state: &AtomState, label: impl Into<String>) -> Self {
        Self { matrix: AtomMatrix::from_pure(state), label: label.into() }
    }

    /// The unit operator: a measurement carrying no information.
    pub fn unit(label: impl Into<String>) -> Self {
        Self { matrix: AtomMatrix::identity(), label: label.into() }
    }

    pub fn matrix(&self) -> &AtomMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Shorthand for [`PomElement::projector`].
pub fn pom_projector(state: &AtomState, label: impl Into<String>) -> PomElement {
    PomElement::projector(state, label)
}

/// One possible preparation: a density operator with its prior probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub state: AtomMatrix,
    pub prior: f64,
    pub label: String,
}

/// The set of states the preparation device can produce, with priors.
///
/// Houses the preparation-device operators `prior * state` and their sum,
/// the a-priori operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationEnsemble {
    members: Vec<EnsembleMember>,
}

impl PreparationEnsemble {
    /// Priors must be non-negative and sum to 1 within `1e-12`.
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut total = 0.0;
        for m in &members {
            if !(m.prior >= 0.0) || !m.prior.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "prior for {:?} must be >= 0, got {}",
                    m.label, m.prior
                )));
            }
            total += m.prior;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "priors must sum to 1, got {total}"
            )));
        }
        Ok(Self { members })
    }

    /// The default ensemble: excited or ground, equal priors, labels
    /// `"e"` and `"g"`.
    pub fn uniform_ground_excited() -> Self {
        Self {
            members: vec![
                EnsembleMember {
                    state: AtomMatrix::from_pure(&AtomState::excited()),
                    prior: 0.5,
                    label: "e".into(),
                },
                EnsembleMember {
                    state: AtomMatrix::from_pure(&AtomState::ground()),
                    prior: 0.5,
                    label: "g".into(),
                },
            ],
        }
    }

    /// Ground/excited pure states with arbitrary priors.
    pub fn ground_excited(prior_e: f64, prior_g: f64) -> Result<Self> {
        Self::new(vec![
            EnsembleMember {
                state: AtomMatrix::from_pure(&AtomState::excited()),
                prior: prior_e,
                label: "e".into(),
            },
            EnsembleMember {
                state: AtomMatrix::from_pure(&AtomState::ground()),
                prior: prior_g,
                label: "g".into(),
            },
        ])
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn member(&self, label: &str) -> Result<&EnsembleMember> {
        self.members
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// Number-state expansion coefficients of the coherent state:
/// `a_n = exp(-|alpha|^2 / 2) * alpha^n / sqrt(n!)` for `n = 0..=n_max`.
pub fn coherent_coefficients(field: &CoherentField, n_max: usize) -> Vec<Complex64> {
    let alpha = field.amplitude();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut a = Complex64::new((-0.5 * field.mean_photon_number()).exp(), 0.0);
    coeffs.push(a);
    for n in 1..=n_max {
        a *= alpha / (n as f64).sqrt();
        coeffs.push(a);
    }
    coeffs
}

/// Smallest photon-number cutoff whose Poisson tail is below `tail_tol`,
/// clamped to at least 1 so the vacuum keeps one excitation slot.
///
/// The search is bounded by `nbar + 10*sqrt(nbar)` plus slack, which is
/// ample for any tolerance down to `1e-12`.
pub fn choose_truncation(field: &CoherentField, tail_tol: f64) -> usize {
    assert!(
        tail_tol > 0.0 && tail_tol < 1.0,
        "tail_tol must lie in (0, 1), got {tail_tol}"
    );
    let nbar = field.mean_photon_number();
    if nbar == 0.0 {
        return 1;
    }
    let bound = (nbar + 10.0 * nbar.sqrt()).ceil() as usize + 10;
    let mut pmf = (-nbar).exp();
    let mut cdf = pmf;
    let mut n = 0;
    while 1.0 - cdf >= tail_tol && n < bound {
        n += 1;
        pmf *= nbar / n as f64;
        cdf += pmf;
    }
    n.max(1)
}

/// The superposition state of [`AtomState::minus`] as a free function.
pub fn minus_state(phase: f64) -> AtomState {
    AtomState::minus(phase)
}

/// The a-priori operator: the prior-weighted sum of the preparation density
/// operators. Hermitian with unit trace.
pub fn apriori_operator(ensemble: &PreparationEnsemble) -> Result<AtomMatrix> {
    if ensemble.members().is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut total = AtomMatrix::zero();
    for m in ensemble.members() {
        total = total.add(&m.state.scale(m.prior));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherent_coefficients_vacuum() {
        let field = CoherentField::vacuum();
        let a = coherent_coefficients(&field, 3);
        assert_eq!(a[0], Complex64::ONE);
        assert!(a[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn coherent_coefficients_alpha_one() {
        let field = CoherentField::new(1.0, 0.0).unwrap();
        let a = coherent_coefficients(&field, 2);
        let e_half = (-0.5f64).exp();
        assert_abs_diff_eq!(a[0].re, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1].re, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(a[2].re, e_half / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn coherent_coefficients_norm_alpha_five() {
        let field = CoherentField::new(5.0, 0.0).unwrap();
        let n_max = choose_truncation(&field, 1e-12);
        let total: f64 = coherent_coefficients(&field, n_max)
            .iter()
            .map(|x| x.norm_sqr())
            .sum();
        assert!(total >= 1.0 - 1e-12);
    }

    #[test]
    fn truncation_vacuum() {
        assert_eq!(choose_truncation(&CoherentField::vacuum(), 1e-12), 1);
    }

    // Independent Poisson tail oracle via statrs.
    fn poisson_tail(nbar: f64, n: usize) -> f64 {
        use statrs::distribution::{DiscreteCDF, Poisson};
        let p = Poisson::new(nbar).unwrap();
        1.0 - p.cdf(n as u64)
    }

    #[test]
    fn truncation_alpha_five_against_poisson_oracle() {
        let field = CoherentField::new(5.0, 0.0).unwrap();
        let n_max = choose_truncation(&field, 1e-12);
        assert!(n_max <= 75, "n_max = {n_max}");
        assert!(poisson_tail(25.0, n_max) < 1e-12);
        assert!(poisson_tail(25.0, n_max - 1) >= 1e-12);
    }

    #[test]
    fn truncation_alpha_1_4_against_poisson_oracle() {
        let field = CoherentField::new(1.4, 0.0).unwrap();
        let n_max = choose_truncation(&field, 1e-12);
        assert!(poisson_tail(1.96, n_max) < 1e-12);
        assert!(poisson_tail(1.96, n_max - 1) >= 1e-12);
    }

    #[test]
    fn minus_state_values() {
        let s = minus_state(0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.c_g.re, r, epsilon = 1e-10);
        assert_abs_diff_eq!(s.c_e.re, -r, epsilon = 1e-10);

        let s = minus_state(std::f64::consts::PI);
        assert_abs_diff_eq!(s.c_e.re, r, epsilon = 1e-10);
        assert_abs_diff_eq!(s.c_e.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pom_projectors_basis() {
        let pe = pom_projector(&AtomState::excited(), "e");
        assert_eq!(pe.matrix().element(0, 0), Complex64::ZERO);
        assert_eq!(pe.matrix().element(1, 1), Complex64::ONE);
        let pg = pom_projector(&AtomState::ground(), "g");
        assert_eq!(pg.matrix().element(0, 0), Complex64::ONE);
        assert_eq!(pg.matrix().element(1, 1), Complex64::ZERO);

        let pm = pom_projector(&minus_state(0.0), "minus");
        assert_abs_diff_eq!(pm.matrix().element(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pm.matrix().element(0, 1).re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pm.matrix().element(1, 1).re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn apriori_operator_examples() {
        let uniform = PreparationEnsemble::uniform_ground_excited();
        let lam = apriori_operator(&uniform).unwrap();
        assert_abs_diff_eq!(lam.element(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(lam.element(1, 1).re, 0.5, epsilon = 1e-12);
        assert_eq!(lam.element(0, 1), Complex64::ZERO);

        let single = PreparationEnsemble::new(vec![EnsembleMember {
            state: AtomMatrix::from_pure(&AtomState::excited()),
            prior: 1.0,
            label: "e".into(),
        }])
        .unwrap();
        let lam = apriori_operator(&single).unwrap();
        assert_eq!(lam.element(1, 1), Complex64::ONE);

        let skewed = PreparationEnsemble::ground_excited(0.3, 0.7).unwrap();
        let lam = apriori_operator(&skewed).unwrap();
        assert_abs_diff_eq!(lam.element(0, 0).re, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(lam.element(1, 1).re, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn ensemble_rejects_bad_priors() {
        assert!(PreparationEnsemble::ground_excited(0.6, 0.6).is_err());
        assert!(PreparationEnsemble::ground_excited(-0.1, 1.1).is_err());
        assert!(matches!(
            PreparationEnsemble::new(vec![]),
            Err(Error::EmptyEnsemble)
        ));
    }

    #[test]
    fn atom_matrix_rejects_non_hermitian() {
        let m = [
            [c(1.0, 0.0), c(0.5, 0.0)],
            [c(0.2, 0.0), c(0.0, 0.0)],
        ];
        assert!(AtomMatrix::new(m).is_err());
    }

    #[test]
    fn eigendecomposition_reconstructs() {
        let m = AtomMatrix::hermitian(0.3, c(0.2, -0.1), 0.7);
        let decomp = m.eigendecomposition();
        let mut rebuilt = AtomMatrix::zero();
        for (w, v) in &decomp {
            rebuilt = rebuilt.add(&AtomMatrix::from_pure(v).scale(*w));
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((rebuilt.element(i, j) - m.element(i, j)).norm() < 1e-12);
            }
        }
        // eigenvectors orthonormal
        let (_, v0) = decomp[0];
        let (_, v1) = decomp[1];
        assert!(v0.inner(&v1).norm() < 1e-12);
    }

    #[test]
    fn joint_state_product_normalized() {
        let field = CoherentField::new(1.4, 0.3).unwrap();
        let n_max = choose_truncation(&field, 1e-12);
        let s = JointState::from_product(&AtomState::minus(0.3), &field, n_max).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn truncation_tail_below_tolerance(mag in 0.0f64..6.0, log_tol in -12f64..-3.0) {
            let tol = 10f64.powf(log_tol);
            let field = CoherentField::new(mag, 0.0).unwrap();
            let n_max = choose_truncation(&field, tol);
            let total: f64 = coherent_coefficients(&field, n_max)
                .iter()
                .map(|x| x.norm_sqr())
                .sum();
            prop_assert!(1.0 - total < tol);
        }

        #[test]
        fn projectors_idempotent(re_g in -1.0f64..1.0, im_g in -1.0f64..1.0,
                                 re_e in -1.0f64..1.0, im_e in -1.0f64..1.0) {
            let n = (re_g * re_g + im_g * im_g + re_e * re_e + im_e * im_e).sqrt();
            prop_assume!(n > 1e-3);
            let state = AtomState::new(
                Complex64::new(re_g / n, im_g / n),
                Complex64::new(re_e / n, im_e / n),
            ).unwrap();
            let p = AtomMatrix::from_pure(&state);
            // P^2 = P elementwise
            for i in 0..2 {
                for j in 0..2 {
                    let sq = p.element(i, 0) * p.element(0, j) + p.element(i, 1) * p.element(1, j);
                    prop_assert!((sq - p.element(i, j)).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn minus_plus_complete(phase in 0.0f64..(2.0 * std::f64::consts::PI)) {
            let pm = pom_projector(&AtomState::minus(phase), "minus");
            let pp = pom_projector(&AtomState::plus(phase), "plus");
            let total = pm.matrix().add(pp.matrix());
            prop_assert!((total.element(0, 0) - Complex64::ONE).norm() < 1e-12);
            prop_assert!((total.element(1, 1) - Complex64::ONE).norm() < 1e-12);
            prop_assert!(total.element(0, 1).norm() < 1e-12);
            prop_assert!(total.element(1, 0).norm() < 1e-12);
        }

        #[test]
        fn apriori_is_density(p_e in 0.0f64..1.0) {
            let ens = PreparationEnsemble::ground_excited(p_e, 1.0 - p_e).unwrap();
            let lam = apriori_operator(&ens).unwrap();
            prop_assert!((lam.trace().re - 1.0).abs() < 1e-12);
            let [lo, hi] = lam.eigenvalues();
            prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn basis_projectors_complete_exactly() {
        let pe = pom_projector(&AtomState::excited(), "e");
        let pg = pom_projector(&AtomState::ground(), "g");
        let total = pe.matrix().add(pg.matrix());
        assert_eq!(total.element(0, 0), Complex64::ONE);
        assert_eq!(total.element(1, 1), Complex64::ONE);
        assert_eq!(total.element(0, 1), Complex64::ZERO);
    }
}
