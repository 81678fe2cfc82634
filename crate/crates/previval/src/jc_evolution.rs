//! Exact analytic Jaynes-Cummings evolution.
//!
//! The rotating-wave Hamiltonian couples each `|g,n>` only to `|e,n-1>`, so
//! the joint state evolves as independent two-dimensional rotations at the
//! Rabi frequency of each excitation pair, plus free phases on the two
//! uncoupled corner amplitudes. No time stepping is involved; one call costs
//! O(n_max) regardless of the elapsed time.

use num_complex::Complex64;

use crate::core_state::{
    choose_truncation, AtomMatrix, AtomState, CoherentField, JointState, ModelParams,
    DEFAULT_TAIL_TOL,
};
use crate::{Error, Result};

/// Evolution parameters: the model constants and the dimensionless elapsed
/// time `lambda * tau` between preparation and measurement.
///
/// Negative `lambda_tau` means backward evolution (the adjoint propagator),
/// which is how retrodictive states are carried back to the preparation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub params: ModelParams,
    pub lambda_tau: f64,
}

impl EvolutionSpec {
    pub fn new(params: ModelParams, lambda_tau: f64) -> Result<Self> {
        if !lambda_tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda_tau must be finite, got {lambda_tau}"
            )));
        }
        Ok(Self { params, lambda_tau })
    }

    /// Resonant, unit-coupling spec at the given `lambda * tau`.
    pub fn resonant(lambda_tau: f64) -> Self {
        Self { params: ModelParams::resonant(), lambda_tau }
    }

    /// Physical elapsed time `tau` in units of the coupling.
    pub fn tau(&self) -> f64 {
        self.lambda_tau / self.params.coupling
    }

    /// The same spec with the direction of time reversed.
    pub fn reversed(&self) -> Self {
        Self { params: self.params, lambda_tau: -self.lambda_tau }
    }
}

/// Rabi frequency of the n-excitation pair:
/// `Omega(n) = sqrt(detuning^2 + 4 * coupling^2 * n)`.
pub fn rabi_frequency(n: usize, params: &ModelParams) -> f64 {
    let d = params.detuning;
    let l = params.coupling;
    (d * d + 4.0 * l * l * n as f64).sqrt()
}

/// Evolve a joint state for the elapsed time of `spec`.
///
/// Each pair `(c_{g,n}, c_{e,n-1})` rotates at `Omega(n)`; `c_{g,0}` and the
/// top amplitude `c_{e,n_max}` (whose partner lies above the truncation)
/// pick up only their detuning phases. The map is exactly unitary on the
/// truncated space and `evolve_joint(s, -lambda_tau)` inverts it.
pub fn evolve_joint(state: &JointState, spec: &EvolutionSpec) -> Result<JointState> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(evolve_joint_unchecked(state, spec))
}

pub(crate) fn evolve_joint_unchecked(state: &JointState, spec: &EvolutionSpec) -> JointState {
    let n_max = state.n_max();
    let tau = spec.tau();
    let delta = spec.params.detuning;
    let lambda = spec.params.coupling;

    let mut c_g: Vec<Complex64> = state.amplitudes_g().to_vec();
    let mut c_e: Vec<Complex64> = state.amplitudes_e().to_vec();

    // Uncoupled corners: |g,0> at energy -delta/2, |e,n_max> at +delta/2.
    c_g[0] *= Complex64::from_polar(1.0, 0.5 * delta * tau);
    c_e[n_max] *= Complex64::from_polar(1.0, -0.5 * delta * tau);

    for n in 1..=n_max {
        let omega = rabi_frequency(n, &spec.params);
        let half_angle = 0.5 * omega * tau;
        let (sin, cos) = half_angle.sin_cos();
        let diag = Complex64::new(cos, delta / omega * sin);
        let coupling = 2.0 * lambda * (n as f64).sqrt() / omega * sin;

        let g_old = c_g[n];
        let e_old = c_e[n - 1];
        c_g[n] = diag * g_old + coupling * e_old;
        c_e[n - 1] = diag.conj() * e_old - coupling * g_old;
    }

    JointState::from_raw_unchecked(c_g, c_e)
}

/// Predictive reduced atomic state at the measurement time: prepare
/// `prep (x) |alpha>`, evolve by `spec`, trace out the field.
pub fn predictive_atom_state(
    prep: &AtomState,
    field: &CoherentField,
    spec: &EvolutionSpec,
) -> AtomMatrix {
    predictive_atom_state_with_tol(prep, field, spec, DEFAULT_TAIL_TOL)
}

/// [`predictive_atom_state`] with an explicit truncation tolerance.
pub fn predictive_atom_state_with_tol(
    prep: &AtomState,
    field: &CoherentField,
    spec: &EvolutionSpec,
    tail_tol: f64,
) -> AtomMatrix {
    let n_max = choose_truncation(field, tail_tol);
    let joint = JointState::from_product(prep, field, n_max)
        .expect("product of normalized states is normalizable");
    let evolved = evolve_joint_unchecked(&joint, spec);
    reduced_atom_state(&evolved)
}

/// Partial trace of a joint pure state over the field.
pub fn reduced_atom_state(state: &JointState) -> AtomMatrix {
    let mut gg = 0.0;
    let mut ee = 0.0;
    let mut ge = Complex64::ZERO;
    for (g, e) in state.amplitudes_g().iter().zip(state.amplitudes_e()) {
        gg += g.norm_sqr();
        ee += e.norm_sqr();
        ge += g * e.conj();
    }
    AtomMatrix::hermitian(gg, ge, ee)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_state::choose_truncation;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_joint(n_max: usize, rng: &mut impl Rng) -> JointState {
        let mut c_g: Vec<Complex64> = (0..=n_max)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut c_e: Vec<Complex64> = (0..=n_max)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = c_g
            .iter()
            .chain(c_e.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        for c in c_g.iter_mut().chain(c_e.iter_mut()) {
            *c /= norm;
        }
        JointState::new(c_g, c_e).unwrap()
    }

    #[test]
    fn rabi_frequency_examples() {
        let p = ModelParams::new(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(rabi_frequency(0, &p), 2.0);
        let p = ModelParams::resonant();
        assert_abs_diff_eq!(rabi_frequency(1, &p), 2.0);
        assert_abs_diff_eq!(rabi_frequency(25, &p), 10.0);
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_joint(6, &mut rng);
        let out = evolve_joint(&s, &EvolutionSpec::resonant(0.0)).unwrap();
        assert_eq!(s, out);
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        // |e>|0> at resonance: c_e0 = cos(lt), c_g1 = sin(lt).
        let s = JointState::from_product(&AtomState::excited(), &CoherentField::vacuum(), 1)
            .unwrap();
        for &lt in &[0.3, 1.0, 2.5] {
            let out = evolve_joint(&s, &EvolutionSpec::resonant(lt)).unwrap();
            assert_abs_diff_eq!(out.c_e(0).re, lt.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(out.c_g(1).re, lt.sin(), epsilon = 1e-12);
            assert!(out.c_e(0).im.abs() < 1e-12 && out.c_g(1).im.abs() < 1e-12);
        }
    }

    #[test]
    fn ground_vacuum_is_stationary() {
        let s = JointState::from_product(&AtomState::ground(), &CoherentField::vacuum(), 1)
            .unwrap();
        let out = evolve_joint(&s, &EvolutionSpec::resonant(13.7)).unwrap();
        assert_abs_diff_eq!(out.c_g(0).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn unnormalized_input_rejected() {
        let s = JointState::from_raw_unchecked(
            vec![Complex64::new(0.5, 0.0); 2],
            vec![Complex64::ZERO; 2],
        );
        assert!(matches!(
            evolve_joint(&s, &EvolutionSpec::resonant(1.0)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn predictive_state_trivial_cases() {
        let vac = CoherentField::vacuum();
        let rho = predictive_atom_state(&AtomState::ground(), &vac, &EvolutionSpec::resonant(0.0));
        assert_abs_diff_eq!(rho.element(0, 0).re, 1.0, epsilon = 1e-14);

        // ground + vacuum is stationary for all times
        let rho = predictive_atom_state(&AtomState::ground(), &vac, &EvolutionSpec::resonant(9.4));
        assert_abs_diff_eq!(rho.element(0, 0).re, 1.0, epsilon = 1e-14);
        assert!(rho.element(0, 1).norm() < 1e-14);
    }

    #[test]
    fn excitation_pairs_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = CoherentField::new(1.4, 0.0).unwrap();
        let n_max = choose_truncation(&field, 1e-12);
        for _ in 0..50 {
            let s = random_joint(n_max, &mut rng);
            let lt = rng.gen_range(0.0..50.0);
            let delta = rng.gen_range(-2.0..2.0);
            let spec = EvolutionSpec::new(ModelParams::new(delta, 1.0).unwrap(), lt).unwrap();
            let out = evolve_joint(&s, &spec).unwrap();
            assert!((out.c_g(0).norm_sqr() - s.c_g(0).norm_sqr()).abs() < 1e-12);
            for n in 1..=n_max {
                let before = s.c_g(n).norm_sqr() + s.c_e(n - 1).norm_sqr();
                let after = out.c_g(n).norm_sqr() + out.c_e(n - 1).norm_sqr();
                assert!((after - before).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn unitary_and_invertible(seed in any::<u64>(), lt in 0.0f64..50.0, delta in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_joint(8, &mut rng);
            let spec = EvolutionSpec::new(ModelParams::new(delta, 1.0).unwrap(), lt).unwrap();
            let out = evolve_joint(&s, &spec).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
            let back = evolve_joint(&out, &spec.reversed()).unwrap();
            prop_assert!(back.max_amplitude_deviation(&s) < 1e-10);
        }

        #[test]
        fn composition(seed in any::<u64>(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_joint(8, &mut rng);
            let params = ModelParams::new(0.7, 1.0).unwrap();
            let once = evolve_joint(&s, &EvolutionSpec::new(params, t1 + t2).unwrap()).unwrap();
            let twice = evolve_joint(
                &evolve_joint(&s, &EvolutionSpec::new(params, t1).unwrap()).unwrap(),
                &EvolutionSpec::new(params, t2).unwrap(),
            ).unwrap();
            prop_assert!(once.max_amplitude_deviation(&twice) < 1e-10);
        }

        #[test]
        fn predictive_state_is_density(lt in 0.0f64..50.0, mag in 0.0f64..3.0) {
            let field = CoherentField::new(mag, 0.0).unwrap();
            let rho = predictive_atom_state(&AtomState::minus(0.0), &field,
                &EvolutionSpec::resonant(lt));
            prop_assert!(rho.is_density(1e-10, 1e-10));
        }
    }
}
