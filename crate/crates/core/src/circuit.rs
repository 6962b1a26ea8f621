//! Memory-experiment circuits.
//!
//! The patch is prepared ideally in the +1 eigenstate of the chosen logical
//! Pauli, then goes through `N` noisy syndrome-extraction rounds followed by
//! one perfect round, and is finally read out transversally without noise.
//! Each noisy round is: H on the X ancillas, four CNOT layers, H again,
//! ancilla readout, data idling for `T/N` and ancilla reset. Every gate is
//! followed by a depolarizing channel.

use crate::error::{invalid, Error, Result};
use crate::layout::{PatchLayout, StabKind};
use crate::noise::{ChannelProbs, NoiseParams};
use crate::pauli::Pauli;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Whether a logical flip mask (see [`LOGICAL_Z_FLIP`], [`LOGICAL_X_FLIP`])
    /// flips the sign of this basis' logical operator.
    #[inline]
    pub fn is_flipped_by(self, mask: u8) -> bool {
        match self {
            Basis::Z => mask & LOGICAL_Z_FLIP != 0,
            Basis::X => mask & LOGICAL_X_FLIP != 0,
            Basis::Y => ((mask & LOGICAL_Z_FLIP != 0) as u8 ^ (mask & LOGICAL_X_FLIP != 0) as u8) != 0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        })
    }
}

/// Set when the X part of a frame overlaps `z_logical` oddly (Z_L anticommutes).
pub const LOGICAL_Z_FLIP: u8 = 1;
/// Set when the Z part of a frame overlaps `x_logical` oddly (X_L anticommutes).
pub const LOGICAL_X_FLIP: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Instruction {
    /// Noise-free preparation of the logical +1 eigenstate; ancillas start in |0>.
    IdealInit(Basis),
    H(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Z-basis measurement written to `record`, misrecorded with probability `flip`.
    Measure {
        qubit: usize,
        flip: f64,
        record: usize,
        location: Option<usize>,
    },
    Reset(usize),
    /// Twirled damping on each qubit; qubit `qubits[i]` is fault location `first_location + i`.
    Idle {
        qubits: Vec<usize>,
        duration: f64,
        probs: ChannelProbs,
        first_location: usize,
    },
    Dep1 {
        qubit: usize,
        p: f64,
        location: usize,
    },
    Dep2 {
        a: usize,
        b: usize,
        p: f64,
        location: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detector {
    /// 0-based; round `rounds` is the perfect round.
    pub round: usize,
    /// Global stabilizer index.
    pub stabilizer: usize,
    pub kind: StabKind,
    pub records: SmallVec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    pub basis: Basis,
    /// Data qubits of `Z_L`; an odd X-frame overlap flips it.
    pub z_support: Vec<usize>,
    /// Data qubits of `X_L`; an odd Z-frame overlap flips it.
    pub x_support: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub basis: Basis,
    pub d: usize,
    pub rounds: usize,
    pub noise: NoiseParams,
    pub shots: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 3 || self.d.is_multiple_of(2) {
            return Err(Error::InvalidDistance(self.d));
        }
        if self.rounds < 1 {
            return Err(invalid("rounds", "at least one noisy round is required"));
        }
        if self.shots < 1 {
            return Err(invalid("shots", "must be positive"));
        }
        self.noise.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    pub d: usize,
    pub rounds: usize,
    pub num_qubits: usize,
    pub num_data: usize,
    pub num_x_stabs: usize,
    pub num_z_stabs: usize,
    pub noise: NoiseParams,
    pub instructions: Vec<Instruction>,
    pub detectors: Vec<Detector>,
    pub observable: Observable,
    pub num_records: usize,
    pub num_locations: usize,
}

/// Which stochastic error a fault mechanism inserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FaultKind {
    Pauli1 { qubit: usize, pauli: Pauli },
    Pauli2 { a: usize, b: usize, paulis: (Pauli, Pauli) },
    ReadoutFlip { record: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaultMechanism {
    pub location: usize,
    /// Index of the noise instruction that hosts this mechanism.
    pub instruction: usize,
    pub kind: FaultKind,
    pub probability: f64,
}

struct Emitter {
    ins: Vec<Instruction>,
    locations: usize,
}

impl Emitter {
    fn take(&mut self, n: usize) -> usize {
        self.locations += n;
        self.locations - n
    }

    fn hadamards(&mut self, qubits: impl Iterator<Item = usize>, p: Option<f64>) {
        for qubit in qubits {
            self.ins.push(Instruction::H(qubit));
            if let Some(p) = p {
                let location = self.take(1);
                self.ins.push(Instruction::Dep1 { qubit, p, location });
            }
        }
    }
}

pub fn build_memory_circuit(config: &ExperimentConfig, layout: &PatchLayout) -> Result<Circuit> {
    config.validate()?;
    if layout.d != config.d {
        return Err(invalid(
            "d",
            format!("layout has d = {} but config has d = {}", layout.d, config.d),
        ));
    }
    let noise = config.noise;
    let rounds = config.rounds;
    let n_data = layout.num_data();
    let n_stabs = layout.num_stabilizers();
    let nx = layout.x_stabs.len();
    let ancilla = |s: usize| n_data + s;
    let schedule = layout.cnot_schedule();
    let idle = noise.idle_per_round(rounds);
    let dt = noise.total_time / rounds as f64;

    let mut e = Emitter {
        ins: vec![Instruction::IdealInit(config.basis)],
        locations: 0,
    };
    for round in 0..=rounds {
        let noisy = round < rounds;
        let p = if noisy { Some(noise.p) } else { None };
        e.hadamards((0..nx).map(ancilla), p);
        for step in &schedule {
            for g in step {
                let (control, target) = match g.kind {
                    StabKind::X => (ancilla(g.stabilizer), g.data),
                    StabKind::Z => (g.data, ancilla(g.stabilizer)),
                };
                e.ins.push(Instruction::Cnot { control, target });
                if let Some(p) = p {
                    let location = e.take(1);
                    e.ins.push(Instruction::Dep2 {
                        a: control,
                        b: target,
                        p,
                        location,
                    });
                }
            }
        }
        e.hadamards((0..nx).map(ancilla), p);
        for s in 0..n_stabs {
            let location = noisy.then(|| e.take(1));
            e.ins.push(Instruction::Measure {
                qubit: ancilla(s),
                flip: if noisy { noise.q } else { 0.0 },
                record: round * n_stabs + s,
                location,
            });
        }
        if noisy {
            let first_location = e.take(n_data);
            e.ins.push(Instruction::Idle {
                qubits: (0..n_data).collect(),
                duration: dt,
                probs: idle,
                first_location,
            });
            for s in 0..n_stabs {
                e.ins.push(Instruction::Reset(ancilla(s)));
            }
        }
    }
    let Emitter {
        ins,
        locations: location,
    } = e;

    let mut detectors = Vec::with_capacity((rounds + 1) * n_stabs);
    for round in 0..=rounds {
        for s in 0..n_stabs {
            let rec = round * n_stabs + s;
            let mut records = SmallVec::new();
            if round > 0 {
                records.push(rec - n_stabs);
            }
            records.push(rec);
            detectors.push(Detector {
                round,
                stabilizer: s,
                kind: if s < nx { StabKind::X } else { StabKind::Z },
                records,
            });
        }
    }

    Ok(Circuit {
        d: config.d,
        rounds,
        num_qubits: n_data + n_stabs,
        num_data: n_data,
        num_x_stabs: nx,
        num_z_stabs: n_stabs - nx,
        noise,
        instructions: ins,
        detectors,
        observable: Observable {
            basis: config.basis,
            z_support: layout.z_logical_indices(),
            x_support: layout.x_logical_indices(),
        },
        num_records: (rounds + 1) * n_stabs,
        num_locations: location,
    })
}

impl Circuit {
    pub fn num_stabilizers(&self) -> usize {
        self.num_x_stabs + self.num_z_stabs
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    /// Family of a detector and its index within that family.
    #[inline]
    pub fn detector_family(&self, det: usize) -> (StabKind, usize) {
        let n = self.num_stabilizers();
        let (round, s) = (det / n, det % n);
        if s < self.num_x_stabs {
            (StabKind::X, round * self.num_x_stabs + s)
        } else {
            (StabKind::Z, round * self.num_z_stabs + s - self.num_x_stabs)
        }
    }

    pub fn family_size(&self, kind: StabKind) -> usize {
        let per_round = match kind {
            StabKind::X => self.num_x_stabs,
            StabKind::Z => self.num_z_stabs,
        };
        per_round * (self.rounds + 1)
    }

    /// Inverse of [`Circuit::detector_family`].
    pub fn family_detector(&self, kind: StabKind, local: usize) -> usize {
        let n = self.num_stabilizers();
        match kind {
            StabKind::X => (local / self.num_x_stabs) * n + local % self.num_x_stabs,
            StabKind::Z => {
                (local / self.num_z_stabs) * n + self.num_x_stabs + local % self.num_z_stabs
            }
        }
    }

    /// Detector indices that read each measurement record.
    pub fn record_detectors(&self) -> Vec<SmallVec<[usize; 2]>> {
        let mut out = vec![SmallVec::new(); self.num_records];
        for (i, det) in self.detectors.iter().enumerate() {
            for &r in &det.records {
                out[r].push(i);
            }
        }
        out
    }

    /// Logical flip mask of a frame restricted to data qubits.
    pub fn logical_mask(&self, has_x: impl Fn(usize) -> bool, has_z: impl Fn(usize) -> bool) -> u8 {
        let zl = self.observable.z_support.iter().filter(|&&q| has_x(q)).count() % 2 == 1;
        let xl = self.observable.x_support.iter().filter(|&&q| has_z(q)).count() % 2 == 1;
        ((zl as u8) * LOGICAL_Z_FLIP) | ((xl as u8) * LOGICAL_X_FLIP)
    }

    pub fn count(&self, pred: impl Fn(&Instruction) -> bool) -> usize {
        self.instructions.iter().filter(|i| pred(i)).count()
    }

    /// Total idling duration applied to one data qubit.
    pub fn idle_time(&self, qubit: usize) -> f64 {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Idle {
                    qubits, duration, ..
                } if qubits.contains(&qubit) => Some(*duration),
                _ => None,
            })
            .sum()
    }

    /// Index of the first mechanism of each fault location, plus a final sentinel.
    pub fn mechanism_offsets(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_locations];
        for ins in &self.instructions {
            match ins {
                Instruction::Dep1 { location, .. } => sizes[*location] = 3,
                Instruction::Dep2 { location, .. } => sizes[*location] = 15,
                Instruction::Measure {
                    location: Some(l), ..
                } => sizes[*l] = 1,
                Instruction::Idle {
                    qubits,
                    first_location,
                    ..
                } => {
                    for i in 0..qubits.len() {
                        sizes[first_location + i] = 3;
                    }
                }
                _ => {}
            }
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in sizes {
            acc += s;
            offsets.push(acc);
        }
        offsets
    }

    /// Human-readable listing of instructions, detectors and the observable.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# memory circuit d={} rounds={} basis={} qubits={} detectors={} locations={}",
            self.d,
            self.rounds,
            self.observable.basis,
            self.num_qubits,
            self.detectors.len(),
            self.num_locations
        );
        let _ = writeln!(s, "# data qubits 0-{}, ancillas {}-{}", self.num_data - 1, self.num_data, self.num_qubits - 1);
        for ins in &self.instructions {
            let _ = match ins {
                Instruction::IdealInit(b) => writeln!(s, "INIT_IDEAL {b}"),
                Instruction::H(q) => writeln!(s, "H {q}"),
                Instruction::Cnot { control, target } => writeln!(s, "CX {control} {target}"),
                Instruction::Measure {
                    qubit,
                    flip,
                    record,
                    location,
                } => match location {
                    Some(l) => writeln!(s, "M({flip}) {qubit} -> rec[{record}] @{l}"),
                    None => writeln!(s, "M {qubit} -> rec[{record}]"),
                },
                Instruction::Reset(q) => writeln!(s, "R {q}"),
                Instruction::Idle {
                    qubits,
                    duration,
                    probs,
                    first_location,
                } => writeln!(
                    s,
                    "IDLE({duration}) {} px={} py={} pz={} @{first_location}..{}",
                    join(qubits),
                    probs.px,
                    probs.py,
                    probs.pz,
                    first_location + qubits.len()
                ),
                Instruction::Dep1 { qubit, p, location } => {
                    writeln!(s, "DEPOLARIZE1({p}) {qubit} @{location}")
                }
                Instruction::Dep2 { a, b, p, location } => {
                    writeln!(s, "DEPOLARIZE2({p}) {a} {b} @{location}")
                }
            };
        }
        for (i, det) in self.detectors.iter().enumerate() {
            let recs: Vec<String> = det.records.iter().map(|r| format!("rec[{r}]")).collect();
            let _ = writeln!(
                s,
                "DETECTOR {i} round={} stab={} kind={} {}",
                det.round,
                det.stabilizer,
                det.kind.name(),
                recs.join(" ")
            );
        }
        let o = &self.observable;
        let _ = match o.basis {
            Basis::Z => writeln!(s, "OBSERVABLE Z_L x-frame {}", join(&o.z_support)),
            Basis::X => writeln!(s, "OBSERVABLE X_L z-frame {}", join(&o.x_support)),
            Basis::Y => writeln!(
                s,
                "OBSERVABLE Y_L x-frame {} z-frame {}",
                join(&o.z_support),
                join(&o.x_support)
            ),
        };
        s
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ")
}

/// Every (fault location, nontrivial Pauli or flip) pair, in location order.
/// Zero-probability entries are kept; see [`nonzero_mechanisms`].
pub fn enumerate_fault_mechanisms(circuit: &Circuit) -> Vec<FaultMechanism> {
    let mut out = Vec::new();
    let mut by_location: Vec<Vec<FaultMechanism>> = vec![Vec::new(); circuit.num_locations];
    for (idx, ins) in circuit.instructions.iter().enumerate() {
        match *ins {
            Instruction::Dep1 { qubit, p, location } => {
                by_location[location] = Pauli::NONTRIVIAL
                    .iter()
                    .map(|&pauli| FaultMechanism {
                        location,
                        instruction: idx,
                        kind: FaultKind::Pauli1 { qubit, pauli },
                        probability: p / 3.0,
                    })
                    .collect();
            }
            Instruction::Dep2 { a, b, p, location } => {
                by_location[location] = Pauli::nontrivial_pairs()
                    .iter()
                    .map(|&paulis| FaultMechanism {
                        location,
                        instruction: idx,
                        kind: FaultKind::Pauli2 { a, b, paulis },
                        probability: p / 15.0,
                    })
                    .collect();
            }
            Instruction::Idle {
                ref qubits,
                probs,
                first_location,
                ..
            } => {
                for (i, &qubit) in qubits.iter().enumerate() {
                    let location = first_location + i;
                    by_location[location] = Pauli::NONTRIVIAL
                        .iter()
                        .map(|&pauli| FaultMechanism {
                            location,
                            instruction: idx,
                            kind: FaultKind::Pauli1 { qubit, pauli },
                            probability: probs.get(pauli),
                        })
                        .collect();
                }
            }
            Instruction::Measure {
                flip,
                record,
                location: Some(location),
                ..
            } => {
                by_location[location] = vec![FaultMechanism {
                    location,
                    instruction: idx,
                    kind: FaultKind::ReadoutFlip { record },
                    probability: flip,
                }];
            }
            _ => {}
        }
    }
    for v in by_location {
        out.extend(v);
    }
    out
}

/// Indices (into `mechanisms`) of the entries with positive probability.
pub fn nonzero_mechanisms(mechanisms: &[FaultMechanism]) -> Vec<usize> {
    mechanisms
        .iter()
        .enumerate()
        .filter(|(_, m)| m.probability > 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::build_patch;

    pub(crate) fn config(d: usize, rounds: usize, basis: Basis) -> ExperimentConfig {
        ExperimentConfig {
            basis,
            d,
            rounds,
            noise: NoiseParams {
                t1: 2.0,
                t_phi: 12.0,
                p: 0.006,
                q: 0.02,
                total_time: 1.0,
            },
            shots: 1,
            seed: 0,
        }
    }

    fn circuit(d: usize, rounds: usize) -> Circuit {
        build_memory_circuit(&config(d, rounds, Basis::Z), &build_patch(d).unwrap()).unwrap()
    }

    #[test]
    fn detector_count() {
        assert_eq!(circuit(3, 1).num_detectors(), 16);
        for (d, n) in [(3, 4), (5, 2), (7, 3)] {
            assert_eq!(circuit(d, n).num_detectors(), (n + 1) * (d * d - 1));
        }
    }

    #[test]
    fn gate_counts() {
        let c = circuit(3, 2);
        assert_eq!(c.count(|i| matches!(i, Instruction::Cnot { .. })), 72);
        assert_eq!(c.count(|i| matches!(i, Instruction::Dep2 { .. })), 48);
        assert_eq!(c.count(|i| matches!(i, Instruction::Dep1 { .. })), 2 * 2 * 4);
        assert_eq!(
            c.count(|i| matches!(i, Instruction::Measure { location: Some(_), .. })),
            16
        );
    }

    #[test]
    fn rejects_bad_config() {
        let layout = build_patch(3).unwrap();
        let mut cfg = config(3, 1, Basis::Z);
        cfg.rounds = 0;
        assert!(build_memory_circuit(&cfg, &layout).is_err());
        let cfg = config(5, 1, Basis::Z);
        assert!(build_memory_circuit(&cfg, &layout).is_err());
    }

    #[test]
    fn detectors_reference_earlier_records() {
        let c = circuit(3, 3);
        let mut emitted = 0usize;
        let mut seen = vec![false; c.num_records];
        for ins in &c.instructions {
            if let Instruction::Measure { record, .. } = ins {
                seen[*record] = true;
                emitted += 1;
            }
        }
        assert_eq!(emitted, c.num_records);
        assert!(seen.iter().all(|&s| s));
        for det in &c.detectors {
            assert!(det.records.iter().all(|&r| r / c.num_stabilizers() <= det.round));
        }
    }

    #[test]
    fn mechanism_counts() {
        let c = circuit(3, 1);
        let mechs = enumerate_fault_mechanisms(&c);
        let n_dep1 = c.count(|i| matches!(i, Instruction::Dep1 { .. }));
        let n_dep2 = c.count(|i| matches!(i, Instruction::Dep2 { .. }));
        let n_meas = c.count(|i| matches!(i, Instruction::Measure { location: Some(_), .. }));
        assert_eq!(mechs.len(), 3 * n_dep1 + 15 * n_dep2 + 3 * 9 + n_meas);
        let offsets = c.mechanism_offsets();
        assert_eq!(*offsets.last().unwrap(), mechs.len());
        for (i, m) in mechs.iter().enumerate() {
            assert!(offsets[m.location] <= i && i < offsets[m.location + 1]);
        }
        let idle = c.noise.idle_per_round(1);
        for m in &mechs {
            if let Instruction::Idle { .. } = c.instructions[m.instruction] {
                let FaultKind::Pauli1 { pauli, .. } = m.kind else { panic!() };
                assert_eq!(m.probability, idle.get(pauli));
            }
        }
    }

    #[test]
    fn zero_noise_has_no_mechanisms() {
        let mut cfg = config(3, 2, Basis::X);
        cfg.noise = NoiseParams::noiseless(1.0);
        let c = build_memory_circuit(&cfg, &build_patch(3).unwrap()).unwrap();
        let mechs = enumerate_fault_mechanisms(&c);
        assert!(!mechs.is_empty());
        assert!(nonzero_mechanisms(&mechs).is_empty());
    }

    #[test]
    fn idle_budget_is_total_time() {
        for n in [1, 3, 7, 30] {
            let c = circuit(3, n);
            for q in 0..c.num_data {
                assert!((c.idle_time(q) - 1.0).abs() < 1e-12);
            }
            assert_eq!(c.idle_time(c.num_data), 0.0);
        }
    }

    #[test]
    fn family_indexing_roundtrip() {
        let c = circuit(5, 3);
        for det in 0..c.num_detectors() {
            let (kind, local) = c.detector_family(det);
            assert_eq!(kind, c.detectors[det].kind);
            assert!(local < c.family_size(kind));
            assert_eq!(c.family_detector(kind, local), det);
        }
    }

    #[test]
    fn y_basis_mask() {
        assert!(!Basis::Y.is_flipped_by(0));
        assert!(Basis::Y.is_flipped_by(LOGICAL_Z_FLIP));
        assert!(Basis::Y.is_flipped_by(LOGICAL_X_FLIP));
        assert!(!Basis::Y.is_flipped_by(LOGICAL_X_FLIP | LOGICAL_Z_FLIP));
        assert!(Basis::Z.is_flipped_by(LOGICAL_X_FLIP | LOGICAL_Z_FLIP));
    }

    #[test]
    fn text_dump_mentions_everything() {
        let t = circuit(3, 1).to_text();
        assert!(t.starts_with("# memory circuit d=3 rounds=1 basis=Z"));
        assert_eq!(t.matches("\nDETECTOR ").count(), 16);
        assert!(t.contains("OBSERVABLE Z_L x-frame 0 1 2"));
        assert!(t.contains("INIT_IDEAL Z"));
    }
}
