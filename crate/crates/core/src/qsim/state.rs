//! Exact statevector evolution, Pauli-Z expectations, and shift-rule
//! gradients.

use num_complex::Complex;

use crate::qsim::{AngleSource, CircuitSpec, GateOp, QsimError};
use crate::scalar::Scalar;

/// Pure state over `n_qubits`, qubit 0 stored in the least significant bit
/// of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<S> {
    n_qubits: usize,
    amps: Vec<Complex<S>>,
}

impl<S: Scalar> StateVector<S> {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = vec![Complex::new(S::zero(), S::zero()); 1 << n_qubits];
        amps[0] = Complex::new(S::one(), S::zero());
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amps
    }

    pub fn norm(&self) -> S {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(S::zero(), |acc, x| acc + x)
            .sqrt()
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: S) {
        let half = theta / S::real(2.0);
        let c = half.cos();
        let s = half.sin();
        let bit = 1usize << qubit;
        for base in 0..self.amps.len() {
            if base & bit != 0 {
                continue;
            }
            let a0 = self.amps[base];
            let a1 = self.amps[base | bit];
            self.amps[base] = a0.scale(c) - a1.scale(s);
            self.amps[base | bit] = a0.scale(s) + a1.scale(c);
        }
    }

    pub fn apply_rz(&mut self, qubit: usize, theta: S) {
        let half = theta / S::real(2.0);
        let phase_lo = Complex::new(half.cos(), -half.sin());
        let phase_hi = Complex::new(half.cos(), half.sin());
        let bit = 1usize << qubit;
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if idx & bit == 0 { phase_lo } else { phase_hi };
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        assert_ne!(control, target, "CX needs distinct qubits");
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for idx in 0..self.amps.len() {
            if idx & cbit != 0 && idx & tbit == 0 {
                self.amps.swap(idx, idx | tbit);
            }
        }
    }
}

/// Weighted sum of Pauli strings over `{I, Z}`; bit `q` of a term's mask
/// marks a `Z` on qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub n_qubits: usize,
    pub terms: Vec<(u64, f64)>,
}

impl Observable {
    /// `Z` on a single qubit.
    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        assert!(qubit < n_qubits);
        Self {
            n_qubits,
            terms: vec![(1 << qubit, 1.0)],
        }
    }

    /// `Z (x) Z` on a pair of qubits.
    pub fn zz(n_qubits: usize, a: usize, b: usize) -> Self {
        assert!(a < n_qubits && b < n_qubits && a != b);
        Self {
            n_qubits,
            terms: vec![((1 << a) | (1 << b), 1.0)],
        }
    }
}

/// Expectation value of a `{I, Z}` observable; diagonal, so a weighted
/// parity sum over amplitude probabilities.
pub fn expectation<S: Scalar>(state: &StateVector<S>, obs: &Observable) -> Result<S, QsimError> {
    if obs.n_qubits != state.n_qubits {
        return Err(QsimError::DimensionMismatch {
            expected: obs.n_qubits,
            found: state.n_qubits,
        });
    }
    let mut total = S::zero();
    for &(mask, coeff) in &obs.terms {
        let mut acc = S::zero();
        for (idx, amp) in state.amps.iter().enumerate() {
            let parity = (idx as u64 & mask).count_ones() & 1;
            let p = amp.norm_sqr();
            if parity == 0 {
                acc += p;
            } else {
                acc -= p;
            }
        }
        total += S::real(coeff) * acc;
    }
    Ok(total)
}

fn resolve_angle<S: Scalar>(source: AngleSource, features: &[S], params: &[S]) -> S {
    match source {
        AngleSource::Feature { slot, scale } => S::real(scale) * features[slot],
        AngleSource::Param { slot } => params[slot],
        AngleSource::Constant { value } => S::real(value),
    }
}

/// Runs the circuit, optionally adding `delta` to the resolved angle of the
/// single gate at `shift`, which is how the shift rule perturbs one gate
/// occurrence at a time.
fn run_with_shift<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    shift: Option<(usize, S)>,
) -> StateVector<S> {
    let mut state = StateVector::zero_state(spec.n_qubits);
    for (idx, gate) in spec.gates.iter().enumerate() {
        let delta = match shift {
            Some((gate_idx, delta)) if gate_idx == idx => delta,
            _ => S::zero(),
        };
        match *gate {
            GateOp::Ry { qubit, angle } => {
                state.apply_ry(qubit, resolve_angle(angle, features, params) + delta);
            }
            GateOp::Rz { qubit, angle } => {
                state.apply_rz(qubit, resolve_angle(angle, features, params) + delta);
            }
            GateOp::Cx { control, target } => state.apply_cx(control, target),
        }
    }
    state
}

/// Evaluates the circuit on the given feature and parameter vectors.
///
/// # Errors
///
/// Feature or parameter vectors whose lengths do not match the declared
/// slot counts are contract violations.
pub fn run_circuit<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
) -> Result<StateVector<S>, QsimError> {
    if features.len() != spec.n_features {
        return Err(QsimError::SlotMismatch {
            kind: "feature",
            expected: spec.n_features,
            found: features.len(),
        });
    }
    if params.len() != spec.n_params {
        return Err(QsimError::SlotMismatch {
            kind: "parameter",
            expected: spec.n_params,
            found: params.len(),
        });
    }
    spec.validate()?;
    Ok(run_with_shift(spec, features, params, None))
}

/// Exact derivative of the expectation with respect to parameter slot `j`,
/// by the two-point shift rule. Each rotation fed by the slot is shifted
/// by `+/- pi/2` separately and the halves are summed, which stays exact
/// when one slot drives several gates.
pub fn param_shift_grad<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    obs: &Observable,
    j: usize,
) -> Result<S, QsimError> {
    if j >= spec.n_params {
        return Err(QsimError::SlotOutOfRange {
            gate: 0,
            slot: j,
            bound: spec.n_params,
            kind: "parameter",
        });
    }
    let grads = shift_table(spec, features, params, std::slice::from_ref(&obs), |angle| {
        matches!(angle, AngleSource::Param { slot } if slot == j).then_some(S::one())
    })?;
    Ok(grads[0])
}

/// Exact derivative of the expectation with respect to feature slot `i`
/// (chain rule through the encoded angle's scale factor).
pub fn feature_shift_grad<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    obs: &Observable,
    i: usize,
) -> Result<S, QsimError> {
    if i >= spec.n_features {
        return Err(QsimError::SlotOutOfRange {
            gate: 0,
            slot: i,
            bound: spec.n_features,
            kind: "feature",
        });
    }
    let grads = shift_table(spec, features, params, std::slice::from_ref(&obs), |angle| {
        match angle {
            AngleSource::Feature { slot, scale } if slot == i => Some(S::real(scale)),
            _ => None,
        }
    })?;
    Ok(grads[0])
}

/// Shift-rule gradients of every observable with respect to one resolved
/// angle family. `chain(angle)` returns the outer derivative of the angle
/// with respect to the differentiation variable, or `None` when the gate
/// does not depend on it. Returns one gradient per observable.
fn shift_table<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    observables: &[&Observable],
    chain: impl Fn(AngleSource) -> Option<S>,
) -> Result<Vec<S>, QsimError> {
    let half_pi = S::FRAC_PI_2();
    let two = S::real(2.0);
    let mut grads = vec![S::zero(); observables.len()];
    for (idx, gate) in spec.gates.iter().enumerate() {
        let Some(angle) = gate.angle() else { continue };
        let Some(outer) = chain(angle) else { continue };
        let plus = run_with_shift(spec, features, params, Some((idx, half_pi)));
        let minus = run_with_shift(spec, features, params, Some((idx, -half_pi)));
        for (g, obs) in grads.iter_mut().zip(observables) {
            let e_plus = expectation(&plus, obs)?;
            let e_minus = expectation(&minus, obs)?;
            *g += outer * (e_plus - e_minus) / two;
        }
    }
    Ok(grads)
}

/// Gradients of every observable with respect to every parameter slot:
/// `table[j][k]` is `d<obs_k>/d(theta_j)`.
pub fn param_shift_table<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    observables: &[&Observable],
) -> Result<Vec<Vec<S>>, QsimError> {
    (0..spec.n_params)
        .map(|j| {
            shift_table(spec, features, params, observables, |angle| {
                matches!(angle, AngleSource::Param { slot } if slot == j).then_some(S::one())
            })
        })
        .collect()
}

/// Gradients of every observable with respect to every feature slot:
/// `table[i][k]` is `d<obs_k>/d(feature_i)`.
pub fn feature_shift_table<S: Scalar>(
    spec: &CircuitSpec,
    features: &[S],
    params: &[S],
    observables: &[&Observable],
) -> Result<Vec<Vec<S>>, QsimError> {
    (0..spec.n_features)
        .map(|i| {
            shift_table(spec, features, params, observables, |angle| match angle {
                AngleSource::Feature { slot, scale } if slot == i => Some(S::real(scale)),
                _ => None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;
    use crate::qsim::{build_minimal_circuit, build_refined_circuit};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn empty_spec() -> CircuitSpec {
        CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params: 0,
            reps: 0,
            entanglement: crate::qsim::Entanglement::Linear,
            gates: vec![],
        }
    }

    fn constant_circuit(gates: Vec<GateOp>) -> CircuitSpec {
        CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params: 0,
            reps: 0,
            entanglement: crate::qsim::Entanglement::Linear,
            gates,
        }
    }

    #[test]
    fn empty_circuit_stays_in_ground_state() {
        let state = run_circuit::<f64>(&empty_spec(), &[], &[]).unwrap();
        assert_eq!(state.amplitudes()[0], Complex64::new(1.0, 0.0));
        for amp in &state.amplitudes()[1..] {
            assert_eq!(*amp, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn ry_pi_flips_qubit_zero() {
        let spec = constant_circuit(vec![GateOp::Ry {
            qubit: 0,
            angle: AngleSource::Constant { value: PI },
        }]);
        let state = run_circuit::<f64>(&spec, &[], &[]).unwrap();
        assert!(state.amplitudes()[0].norm() < 1e-15);
        assert!((state.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ry_half_pi_then_cx_builds_bell_state() {
        let spec = constant_circuit(vec![
            GateOp::Ry {
                qubit: 0,
                angle: AngleSource::Constant { value: FRAC_PI_2 },
            },
            GateOp::Cx {
                control: 0,
                target: 1,
            },
        ]);
        let state = run_circuit::<f64>(&spec, &[], &[]).unwrap();
        let amp = 1.0 / 2.0_f64.sqrt();
        assert!((state.amplitudes()[0].re - amp).abs() < 1e-15);
        assert!((state.amplitudes()[3].re - amp).abs() < 1e-15);
        assert!(state.amplitudes()[1].norm() < 1e-15);
        assert!(state.amplitudes()[2].norm() < 1e-15);
    }

    #[test]
    fn z_expectation_on_ground_state_is_one() {
        let state = StateVector::<f64>::zero_state(2);
        assert_eq!(expectation(&state, &Observable::z(2, 0)).unwrap(), 1.0);
        assert_eq!(expectation(&state, &Observable::z(2, 1)).unwrap(), 1.0);
        assert_eq!(expectation(&state, &Observable::zz(2, 0, 1)).unwrap(), 1.0);
    }

    #[test]
    fn ry_rotation_gives_cosine_expectation() {
        for theta in [0.0, 0.3, FRAC_PI_2, 1.2, PI] {
            let spec = constant_circuit(vec![GateOp::Ry {
                qubit: 0,
                angle: AngleSource::Constant { value: theta },
            }]);
            let state = run_circuit::<f64>(&spec, &[], &[]).unwrap();
            let z = expectation(&state, &Observable::z(2, 0)).unwrap();
            assert!((z - theta.cos()).abs() < 1e-12, "theta {theta}");
        }
    }

    /// Dense-matrix oracle: kron-built Pauli matrix applied to the raw
    /// amplitudes, independent of the parity-sum fast path.
    fn dense_expectation(state: &StateVector<f64>, mask: u64) -> f64 {
        let dim = state.amplitudes().len();
        let mut matrix = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (i, row) in matrix.iter_mut().enumerate() {
            let parity = (i as u64 & mask).count_ones() & 1;
            row[i] = Complex64::new(if parity == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += state.amplitudes()[i].conj() * matrix[i][j] * state.amplitudes()[j];
            }
        }
        assert!(acc.im.abs() < 1e-14);
        acc.re
    }

    #[test]
    fn random_state_zz_matches_dense_matrix_oracle() {
        let mut rng = SeededRng::new(17);
        for _ in 0..20 {
            let spec = random_circuit(&mut rng, 12);
            let params: Vec<f64> = (0..spec.n_params)
                .map(|_| rng.uniform_in(-PI, PI))
                .collect();
            let state = run_circuit(&spec, &[], &params).unwrap();
            for obs in [
                Observable::z(2, 0),
                Observable::z(2, 1),
                Observable::zz(2, 0, 1),
            ] {
                let fast = expectation(&state, &obs).unwrap();
                let dense = dense_expectation(&state, obs.terms[0].0);
                assert!((fast - dense).abs() < 1e-13);
            }
        }
    }

    fn random_circuit(rng: &mut SeededRng, n_gates: usize) -> CircuitSpec {
        let mut gates = Vec::new();
        let mut n_params = 0;
        for _ in 0..n_gates {
            match rng.index(3) {
                0 => {
                    gates.push(GateOp::Ry {
                        qubit: rng.index(2),
                        angle: AngleSource::Param { slot: n_params },
                    });
                    n_params += 1;
                }
                1 => {
                    gates.push(GateOp::Rz {
                        qubit: rng.index(2),
                        angle: AngleSource::Param { slot: n_params },
                    });
                    n_params += 1;
                }
                _ => {
                    let control = rng.index(2);
                    gates.push(GateOp::Cx {
                        control,
                        target: 1 - control,
                    });
                }
            }
        }
        CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params,
            reps: 0,
            entanglement: crate::qsim::Entanglement::Linear,
            gates,
        }
    }

    #[test]
    fn shift_rule_matches_analytic_sine() {
        // <Z> = cos(theta), so the derivative is -sin(theta).
        let spec = CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params: 1,
            reps: 0,
            entanglement: crate::qsim::Entanglement::Linear,
            gates: vec![GateOp::Ry {
                qubit: 0,
                angle: AngleSource::Param { slot: 0 },
            }],
        };
        let obs = Observable::z(2, 0);
        let grad: f64 = param_shift_grad(&spec, &[], &[FRAC_PI_2], &obs, 0).unwrap();
        assert!((grad + 1.0).abs() < 1e-12);
        let grad: f64 = param_shift_grad(&spec, &[], &[0.0], &obs, 0).unwrap();
        assert!(grad.abs() < 1e-12);
    }

    #[test]
    fn shift_rule_matches_finite_differences_on_random_circuits() {
        let h = 1e-5;
        for seed in 1..=5u64 {
            let mut rng = SeededRng::new(seed);
            let spec = random_circuit(&mut rng, 14);
            let params: Vec<f64> = (0..spec.n_params)
                .map(|_| rng.uniform_in(-PI, PI))
                .collect();
            let obs = Observable::zz(2, 0, 1);
            for j in 0..spec.n_params {
                let analytic = param_shift_grad(&spec, &[], &params, &obs, j).unwrap();
                let mut plus = params.clone();
                plus[j] += h;
                let mut minus = params.clone();
                minus[j] -= h;
                let e_plus =
                    expectation(&run_circuit(&spec, &[], &plus).unwrap(), &obs).unwrap();
                let e_minus =
                    expectation(&run_circuit(&spec, &[], &minus).unwrap(), &obs).unwrap();
                let numeric = (e_plus - e_minus) / (2.0 * h);
                assert!(
                    (analytic - numeric).abs() < 1e-6,
                    "seed {seed} param {j}: {analytic} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn shift_rule_is_exact_for_shared_parameter_slots() {
        // One slot feeding two rotations; the per-occurrence sum must match
        // finite differences on the shared variable.
        let spec = CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params: 1,
            reps: 0,
            entanglement: crate::qsim::Entanglement::Linear,
            gates: vec![
                GateOp::Ry {
                    qubit: 0,
                    angle: AngleSource::Param { slot: 0 },
                },
                GateOp::Cx {
                    control: 0,
                    target: 1,
                },
                GateOp::Ry {
                    qubit: 1,
                    angle: AngleSource::Param { slot: 0 },
                },
            ],
        };
        let obs = Observable::zz(2, 0, 1);
        let at = 0.83;
        let analytic = param_shift_grad(&spec, &[], &[at], &obs, 0).unwrap();
        let h = 1e-6;
        let e = |theta: f64| {
            expectation(&run_circuit(&spec, &[], &[theta]).unwrap(), &obs).unwrap()
        };
        let numeric = (e(at + h) - e(at - h)) / (2.0 * h);
        assert!((analytic - numeric).abs() < 1e-7);
    }

    #[test]
    fn norm_is_preserved_over_a_thousand_random_gates() {
        let mut rng = SeededRng::new(99);
        let mut state = StateVector::<f64>::zero_state(2);
        for _ in 0..1000 {
            match rng.index(3) {
                0 => state.apply_ry(rng.index(2), rng.uniform_in(-PI, PI)),
                1 => state.apply_rz(rng.index(2), rng.uniform_in(-PI, PI)),
                _ => {
                    let control = rng.index(2);
                    state.apply_cx(control, 1 - control);
                }
            }
        }
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_are_unitary_inverse_recovers_state() {
        let mut rng = SeededRng::new(4);
        for _ in 0..50 {
            let mut state = StateVector::<f64>::zero_state(2);
            // Random preparation.
            for _ in 0..6 {
                state.apply_ry(rng.index(2), rng.uniform_in(-PI, PI));
                state.apply_rz(rng.index(2), rng.uniform_in(-PI, PI));
            }
            let before = state.clone();
            let theta = rng.uniform_in(-PI, PI);
            let qubit = rng.index(2);
            state.apply_ry(qubit, theta);
            state.apply_ry(qubit, -theta);
            state.apply_rz(qubit, theta);
            state.apply_rz(qubit, -theta);
            state.apply_cx(0, 1);
            state.apply_cx(0, 1);
            for (a, b) in state.amplitudes().iter().zip(before.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn slot_mismatch_is_rejected() {
        let spec = build_minimal_circuit();
        assert!(run_circuit::<f64>(&spec, &[0.0; 3], &[0.0; 4]).is_err());
        assert!(run_circuit::<f64>(&spec, &[0.0; 4], &[0.0; 3]).is_err());
        assert!(run_circuit::<f64>(&spec, &[0.0; 4], &[0.0; 4]).is_ok());
        let obs = Observable::z(2, 0);
        assert!(param_shift_grad(&spec, &[0.0; 4], &[0.0; 4], &obs, 9).is_err());
    }

    #[test]
    fn refined_circuit_runs_and_stays_normalized() {
        let spec = build_refined_circuit(3);
        let mut rng = SeededRng::new(1);
        let features: Vec<f64> = (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let params: Vec<f64> = (0..spec.n_params).map(|_| rng.uniform_in(-PI, PI)).collect();
        let state = run_circuit(&spec, &features, &params).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }
}
