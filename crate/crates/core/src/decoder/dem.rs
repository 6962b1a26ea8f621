//! Detector error model: which detectors and logical operators each fault
//! mechanism flips.
//!
//! Computed in one backward sweep over the circuit. For every qubit we keep
//! the set of detectors (and logical flips) that an X or a Z error inserted
//! at the current point would toggle; walking backwards, gates conjugate
//! these sets and measurements add their detectors.

use crate::circuit::{Circuit, FaultMechanism, Instruction, LOGICAL_X_FLIP, LOGICAL_Z_FLIP};
use crate::pauli::Pauli;
use smallvec::SmallVec;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Effect {
    /// Sorted detector indices.
    pub detectors: SmallVec<[u32; 4]>,
    pub logical_mask: u8,
}

impl Effect {
    pub fn xor_with(&mut self, other: &Effect) {
        if other.detectors.is_empty() {
            self.logical_mask ^= other.logical_mask;
            return;
        }
        let (a, b) = (&self.detectors, &other.detectors);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.detectors = out;
        self.logical_mask ^= other.logical_mask;
    }

    pub fn xor(&self, other: &Effect) -> Effect {
        let mut e = self.clone();
        e.xor_with(other);
        e
    }

    pub fn is_silent(&self) -> bool {
        self.detectors.is_empty()
    }
}

struct Sensitivity {
    x: Vec<Effect>,
    z: Vec<Effect>,
}

impl Sensitivity {
    fn of(&self, q: usize, p: Pauli) -> Effect {
        match p {
            Pauli::I => Effect::default(),
            Pauli::X => self.x[q].clone(),
            Pauli::Z => self.z[q].clone(),
            Pauli::Y => self.x[q].xor(&self.z[q]),
        }
    }
}

/// Effect of every mechanism, aligned with `mechanisms`
/// (which must come from `enumerate_fault_mechanisms(circuit)`).
pub fn mechanism_effects(circuit: &Circuit, mechanisms: &[FaultMechanism]) -> Vec<Effect> {
    let offsets = circuit.mechanism_offsets();
    assert_eq!(*offsets.last().unwrap(), mechanisms.len());
    let record_dets: Vec<Effect> = circuit
        .record_detectors()
        .into_iter()
        .map(|d| Effect {
            detectors: d.iter().map(|&x| x as u32).collect(),
            logical_mask: 0,
        })
        .collect();

    let n = circuit.num_qubits;
    let mut sens = Sensitivity {
        x: vec![Effect::default(); n],
        z: vec![Effect::default(); n],
    };
    for &q in &circuit.observable.z_support {
        sens.x[q].logical_mask ^= LOGICAL_Z_FLIP;
    }
    for &q in &circuit.observable.x_support {
        sens.z[q].logical_mask ^= LOGICAL_X_FLIP;
    }

    let mut effects = vec![Effect::default(); mechanisms.len()];
    for ins in circuit.instructions.iter().rev() {
        match *ins {
            Instruction::IdealInit(_) => {}
            Instruction::H(q) => std::mem::swap(&mut sens.x[q], &mut sens.z[q]),
            Instruction::Cnot { control, target } => {
                let xt = sens.x[target].clone();
                sens.x[control].xor_with(&xt);
                let zc = sens.z[control].clone();
                sens.z[target].xor_with(&zc);
            }
            Instruction::Measure {
                qubit,
                record,
                location,
                ..
            } => {
                if let Some(l) = location {
                    effects[offsets[l]] = record_dets[record].clone();
                }
                sens.x[qubit].xor_with(&record_dets[record]);
            }
            Instruction::Reset(q) => {
                sens.x[q] = Effect::default();
                sens.z[q] = Effect::default();
            }
            Instruction::Dep1 {
                qubit, location, ..
            } => {
                for (k, p) in Pauli::NONTRIVIAL.into_iter().enumerate() {
                    effects[offsets[location] + k] = sens.of(qubit, p);
                }
            }
            Instruction::Idle {
                ref qubits,
                first_location,
                ..
            } => {
                for (i, &q) in qubits.iter().enumerate() {
                    let base = offsets[first_location + i];
                    for (k, p) in Pauli::NONTRIVIAL.into_iter().enumerate() {
                        effects[base + k] = sens.of(q, p);
                    }
                }
            }
            Instruction::Dep2 { a, b, location, .. } => {
                for (k, (pa, pb)) in Pauli::nontrivial_pairs().into_iter().enumerate() {
                    effects[offsets[location] + k] = sens.of(a, pa).xor(&sens.of(b, pb));
                }
            }
        }
    }
    effects
}
