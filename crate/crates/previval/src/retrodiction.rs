//! Predictive and retrodictive conditional probabilities, and the
//! retrodictive atomic density operator at the preparation time.
//!
//! The measured outcome fixes the retrodictive state at the measurement time
//! (the normalized POM element); carrying it back to the preparation time
//! and weighing it against the preparation-device operators yields the
//! probability that a given state was prepared. [`bayes_invert`] computes
//! the same probability purely from predictive quantities and serves as the
//! independent cross-check path.

use num_complex::Complex64;

use crate::core_state::{
    apriori_operator, choose_truncation, AtomMatrix, AtomState, CoherentField, JointState,
    PomElement, PreparationEnsemble, DEFAULT_TAIL_TOL,
};
use crate::jc_evolution::{evolve_joint_unchecked, predictive_atom_state_with_tol, EvolutionSpec};
use crate::{Error, Result};

/// Denominators at or below this are treated as zero-probability outcomes.
const PROBABILITY_FLOOR: f64 = 1e-300;

/// Predictive probability of the measurement outcome `pom` given the pure
/// preparation `prep` with the field in `|alpha>`: the Born rule applied to
/// the evolved reduced atomic state, the field being unmeasured.
pub fn predictive_prob(
    prep: &AtomState,
    field: &CoherentField,
    pom: &PomElement,
    spec: &EvolutionSpec,
) -> f64 {
    predictive_prob_with_tol(prep, field, pom, spec, DEFAULT_TAIL_TOL)
}

/// [`predictive_prob`] with an explicit truncation tolerance.
pub fn predictive_prob_with_tol(
    prep: &AtomState,
    field: &CoherentField,
    pom: &PomElement,
    spec: &EvolutionSpec,
    tail_tol: f64,
) -> f64 {
    let rho = predictive_atom_state_with_tol(prep, field, spec, tail_tol);
    rho.trace_product(pom.matrix())
}

/// Unnormalized retrodictive density matrix element `<l| rho |m>` at the
/// preparation time.
///
/// Computed as the joint-space sandwich
/// `<psi_l(tau)| (pom (x) 1_field) |psi_m(tau)>` with
/// `|psi_x(tau)> = U(tau) |x>|alpha>`; the unmeasured-field unit operator is
/// never materialized, the field trace is the photon-number sum itself.
/// Conjugate-symmetric in `(l, m)`.
pub fn retrodictive_matrix_element(
    l: &AtomState,
    m: &AtomState,
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
) -> Complex64 {
    let n_max = choose_truncation(field, DEFAULT_TAIL_TOL);
    let evolved_l = evolved_product(l, field, n_max, spec);
    let evolved_m = evolved_product(m, field, n_max, spec);
    pom_sandwich(&evolved_l, &evolved_m, pom)
}

fn evolved_product(
    atom: &AtomState,
    field: &CoherentField,
    n_max: usize,
    spec: &EvolutionSpec,
) -> JointState {
    let joint = JointState::from_product(atom, field, n_max)
        .expect("product of normalized states is normalizable");
    evolve_joint_unchecked(&joint, spec)
}

/// `<l| (pom (x) 1_field) |m>` summed over photon numbers.
fn pom_sandwich(l: &JointState, m: &JointState, pom: &PomElement) -> Complex64 {
    let p = pom.matrix();
    let (pgg, pge, peg, pee) = (
        p.element(0, 0),
        p.element(0, 1),
        p.element(1, 0),
        p.element(1, 1),
    );
    let mut total = Complex64::ZERO;
    for n in 0..=l.n_max() {
        let (lg, le) = (l.c_g(n).conj(), l.c_e(n).conj());
        let (mg, me) = (m.c_g(n), m.c_e(n));
        total += lg * (pgg * mg + pge * me) + le * (peg * mg + pee * me);
    }
    total
}

/// Retrodictive atomic density operator at the preparation time, normalized
/// to unit trace. Assumes no prior preparation information (atomic a-priori
/// state proportional to the unit operator).
pub fn retrodictive_state_at_prep(
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
) -> Result<AtomMatrix> {
    retrodictive_state_at_prep_with_tol(pom, field, spec, DEFAULT_TAIL_TOL)
}

/// [`retrodictive_state_at_prep`] with an explicit truncation tolerance.
pub fn retrodictive_state_at_prep_with_tol(
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
    tail_tol: f64,
) -> Result<AtomMatrix> {
    let n_max = choose_truncation(field, tail_tol);
    let evolved_g = evolved_product(&AtomState::ground(), field, n_max, spec);
    let evolved_e = evolved_product(&AtomState::excited(), field, n_max, spec);

    let gg = pom_sandwich(&evolved_g, &evolved_g, pom);
    let ge = pom_sandwich(&evolved_g, &evolved_e, pom);
    let ee = pom_sandwich(&evolved_e, &evolved_e, pom);

    let trace = gg.re + ee.re;
    if trace <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { lambda_tau: spec.lambda_tau });
    }
    Ok(AtomMatrix::hermitian(gg.re / trace, ge / trace, ee.re / trace))
}

/// Retrodictive conditional probability that the preparation labelled `i`
/// produced the state, given the measurement outcome `pom`:
/// `Tr(Lambda_i rho_retr) / Tr(Lambda rho_retr)`.
pub fn retrodictive_prob(
    ensemble: &PreparationEnsemble,
    label: &str,
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
) -> Result<f64> {
    retrodictive_prob_with_tol(ensemble, label, pom, field, spec, DEFAULT_TAIL_TOL)
}

/// [`retrodictive_prob`] with an explicit truncation tolerance.
pub fn retrodictive_prob_with_tol(
    ensemble: &PreparationEnsemble,
    label: &str,
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
    tail_tol: f64,
) -> Result<f64> {
    let member = ensemble.member(label)?;
    let rho_retr = retrodictive_state_at_prep_with_tol(pom, field, spec, tail_tol)?;
    let numerator = member.prior * member.state.trace_product(&rho_retr);
    let apriori = apriori_operator(ensemble)?;
    let denominator = apriori.trace_product(&rho_retr);
    if denominator <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { lambda_tau: spec.lambda_tau });
    }
    Ok(numerator / denominator)
}

/// The same conditional probability via Bayes' theorem over predictive
/// probabilities: `P(i|j) = P(j|i) P(i) / sum_k P(j|k) P(k)`.
///
/// Built entirely from [`predictive_prob`]; mixed ensemble members are
/// spectrally decomposed into pure states first.
pub fn bayes_invert(
    ensemble: &PreparationEnsemble,
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
    label: &str,
) -> Result<f64> {
    bayes_invert_with_tol(ensemble, pom, field, spec, label, DEFAULT_TAIL_TOL)
}

/// [`bayes_invert`] with an explicit truncation tolerance.
pub fn bayes_invert_with_tol(
    ensemble: &PreparationEnsemble,
    pom: &PomElement,
    field: &CoherentField,
    spec: &EvolutionSpec,
    label: &str,
    tail_tol: f64,
) -> Result<f64> {
    ensemble.member(label)?;
    let mut denominator = 0.0;
    let mut numerator = 0.0;
    for member in ensemble.members() {
        let mut likelihood = 0.0;
        for (weight, pure) in member.state.eigendecomposition() {
            if weight <= 0.0 {
                continue;
            }
            likelihood += weight * predictive_prob_with_tol(&pure, field, pom, spec, tail_tol);
        }
        let joint = member.prior * likelihood;
        denominator += joint;
        if member.label == label {
            numerator = joint;
        }
    }
    if denominator <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { lambda_tau: spec.lambda_tau });
    }
    Ok(numerator / denominator)
}
