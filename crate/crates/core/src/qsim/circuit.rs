//! Parameterized circuit descriptions and the two model architectures.

use serde::{Deserialize, Serialize};

use crate::qsim::QsimError;

/// Where a rotation gate takes its angle from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSource {
    /// `scale * feature[slot]`.
    Feature { slot: usize, scale: f64 },
    /// `params[slot]`.
    Param { slot: usize },
    /// Fixed angle.
    Constant { value: f64 },
}

/// One gate in program order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOp {
    Ry { qubit: usize, angle: AngleSource },
    Rz { qubit: usize, angle: AngleSource },
    Cx { control: usize, target: usize },
}

impl GateOp {
    /// Angle source for rotation gates, `None` for CX.
    pub fn angle(&self) -> Option<AngleSource> {
        match self {
            GateOp::Ry { angle, .. } | GateOp::Rz { angle, .. } => Some(*angle),
            GateOp::Cx { .. } => None,
        }
    }
}

/// Entangling-layer topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    Linear,
    Circular,
}

/// Full circuit description: feature map plus ansatz, as an ordered gate
/// list with declared feature and parameter slot counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_features: usize,
    pub n_params: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
    pub gates: Vec<GateOp>,
}

impl CircuitSpec {
    /// Checks qubit indices and slot references against the declared counts.
    pub fn validate(&self) -> Result<(), QsimError> {
        for (idx, gate) in self.gates.iter().enumerate() {
            match gate {
                GateOp::Ry { qubit, angle } | GateOp::Rz { qubit, angle } => {
                    if *qubit >= self.n_qubits {
                        return Err(QsimError::InvalidQubit {
                            gate: idx,
                            qubit: *qubit,
                            n_qubits: self.n_qubits,
                        });
                    }
                    match angle {
                        AngleSource::Feature { slot, .. } if *slot >= self.n_features => {
                            return Err(QsimError::SlotOutOfRange {
                                gate: idx,
                                slot: *slot,
                                bound: self.n_features,
                                kind: "feature",
                            });
                        }
                        AngleSource::Param { slot } if *slot >= self.n_params => {
                            return Err(QsimError::SlotOutOfRange {
                                gate: idx,
                                slot: *slot,
                                bound: self.n_params,
                                kind: "parameter",
                            });
                        }
                        _ => {}
                    }
                }
                GateOp::Cx { control, target } => {
                    if control == target {
                        return Err(QsimError::InvalidCx { gate: idx });
                    }
                    if *control >= self.n_qubits || *target >= self.n_qubits {
                        return Err(QsimError::InvalidQubit {
                            gate: idx,
                            qubit: (*control).max(*target),
                            n_qubits: self.n_qubits,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cx_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, GateOp::Cx { .. }))
            .count()
    }
}

/// Angle-encoding feature map shared by both architectures: each of the
/// four inputs drives one rotation, scaled by pi so inputs in [-1, 1]
/// sweep the full rotation range.
fn feature_map(gates: &mut Vec<GateOp>) {
    let pi = std::f64::consts::PI;
    gates.push(GateOp::Ry {
        qubit: 0,
        angle: AngleSource::Feature { slot: 0, scale: pi },
    });
    gates.push(GateOp::Rz {
        qubit: 0,
        angle: AngleSource::Feature { slot: 1, scale: pi },
    });
    gates.push(GateOp::Ry {
        qubit: 1,
        angle: AngleSource::Feature { slot: 2, scale: pi },
    });
    gates.push(GateOp::Rz {
        qubit: 1,
        angle: AngleSource::Feature { slot: 3, scale: pi },
    });
}

/// Two-qubit architecture with a single entangling block: one RY layer,
/// CX(0,1), one RY layer. Four trainable angles.
pub fn build_minimal_circuit() -> CircuitSpec {
    let mut gates = Vec::new();
    feature_map(&mut gates);
    let mut param = 0;
    let mut ry_layer = |gates: &mut Vec<GateOp>| {
        for qubit in 0..2 {
            gates.push(GateOp::Ry {
                qubit,
                angle: AngleSource::Param { slot: param },
            });
            param += 1;
        }
    };
    ry_layer(&mut gates);
    gates.push(GateOp::Cx {
        control: 0,
        target: 1,
    });
    ry_layer(&mut gates);
    let spec = CircuitSpec {
        n_qubits: 2,
        n_features: 4,
        n_params: param,
        reps: 1,
        entanglement: Entanglement::Linear,
        gates,
    };
    debug_assert!(spec.validate().is_ok());
    spec
}

/// Deeper fully entangling architecture: `reps` blocks of RY+RZ rotations,
/// circular CX(0,1)/CX(1,0), and a post-entanglement RY layer, closed by a
/// final RY layer. `6 * reps + 2` trainable angles.
pub fn build_refined_circuit(reps: usize) -> CircuitSpec {
    assert!(reps >= 1, "refined circuit needs at least one block");
    let mut gates = Vec::new();
    feature_map(&mut gates);
    let mut param = 0;
    let mut next = || {
        let slot = param;
        param += 1;
        AngleSource::Param { slot }
    };
    for _ in 0..reps {
        for qubit in 0..2 {
            gates.push(GateOp::Ry {
                qubit,
                angle: next(),
            });
            gates.push(GateOp::Rz {
                qubit,
                angle: next(),
            });
        }
        gates.push(GateOp::Cx {
            control: 0,
            target: 1,
        });
        gates.push(GateOp::Cx {
            control: 1,
            target: 0,
        });
        for qubit in 0..2 {
            gates.push(GateOp::Ry {
                qubit,
                angle: next(),
            });
        }
    }
    for qubit in 0..2 {
        gates.push(GateOp::Ry {
            qubit,
            angle: next(),
        });
    }
    let spec = CircuitSpec {
        n_qubits: 2,
        n_features: 4,
        n_params: param,
        reps,
        entanglement: Entanglement::Circular,
        gates,
    };
    debug_assert!(spec.validate().is_ok());
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_circuit_counts() {
        let spec = build_minimal_circuit();
        assert_eq!(spec.n_params, 4);
        assert_eq!(spec.cx_count(), 1);
        assert_eq!(spec.n_features, 4);
        assert_eq!(spec.entanglement, Entanglement::Linear);
    }

    #[test]
    fn refined_circuit_counts() {
        let spec = build_refined_circuit(3);
        assert_eq!(spec.n_params, 20);
        assert_eq!(spec.cx_count(), 6);
        assert_eq!(spec.reps, 3);
        assert_eq!(spec.entanglement, Entanglement::Circular);
    }

    #[test]
    fn validate_catches_bad_slots() {
        let mut spec = build_minimal_circuit();
        spec.gates.push(GateOp::Ry {
            qubit: 0,
            angle: AngleSource::Param { slot: 99 },
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_serializes_as_a_gate_list() {
        let spec = build_minimal_circuit();
        let json = serde_json::to_string(&spec).unwrap();
        let back: CircuitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert!(json.contains("\"gates\""));
    }
}
