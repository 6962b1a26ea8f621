//! Stabilizer tableau simulation (Aaronson and Gottesman, 2004).
//!
//! Used to check that the noise-free memory circuit really is deterministic:
//! every ancilla readout and every detector has a fixed value and the final
//! logical operator reads +1. The frame simulator takes this for granted.

use crate::circuit::{Basis, Circuit, Instruction};
use crate::error::{invalid, Result};
use crate::pauli::Pauli;

/// Tableau of `2n` generators (destabilizers then stabilizers), packed.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Sign bit per row (true = -1).
    r: Vec<bool>,
}

/// Outcome of a Pauli measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    /// True for the -1 eigenvalue.
    pub minus: bool,
    pub deterministic: bool,
}

impl Tableau {
    /// All qubits in |0>.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut t = Tableau {
            n,
            words,
            x: vec![0; 2 * n * words],
            z: vec![0; 2 * n * words],
            r: vec![false; 2 * n],
        };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn xb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, self.words, row, q)
    }

    #[inline]
    fn zb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, self.words, row, q)
    }

    pub fn h(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xv, zv) = (self.x[i] & m, self.z[i] & m);
            if xv != 0 && zv != 0 {
                self.r[row] ^= true;
            }
            self.x[i] = (self.x[i] & !m) | zv;
            self.z[i] = (self.z[i] & !m) | xv;
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.xb(row, c), self.zb(row, c), self.xb(row, t), self.zb(row, t));
            if xc && zt && (xt == zc) {
                self.r[row] ^= true;
            }
            if xc {
                self.x[row * self.words + t / 64] ^= 1 << (t % 64);
            }
            if zt {
                self.z[row * self.words + c / 64] ^= 1 << (c % 64);
            }
        }
    }

    /// Pauli X gate: flips the sign of generators with Z on `q`.
    pub fn x_gate(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if self.zb(row, q) {
                self.r[row] ^= true;
            }
        }
    }

    /// Multiplies row `h` by row `i` in place, tracking the phase.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut phase: i32 = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for q in 0..self.n {
            phase += g(self.xb(i, q), self.zb(i, q), self.xb(h, q), self.zb(h, q));
        }
        for w in 0..self.words {
            self.x[h * self.words + w] ^= self.x[i * self.words + w];
            self.z[h * self.words + w] ^= self.z[i * self.words + w];
        }
        self.r[h] = phase.rem_euclid(4) == 2;
    }

    fn anticommutes(&self, row: usize, p: &PauliString) -> bool {
        let mut acc = 0u32;
        for w in 0..self.words {
            acc += ((self.x[row * self.words + w] & p.z[w]) ^ (self.z[row * self.words + w] & p.x[w])).count_ones();
        }
        acc % 2 == 1
    }

    /// Eigenvalue of `p` if the state is an eigenstate, else `None`.
    pub fn expectation(&self, p: &PauliString) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|row| self.anticommutes(row, p)) {
            return None;
        }
        // Product of the stabilizers paired with anticommuting destabilizers.
        let mut scratch = self.clone();
        scratch.x.extend(std::iter::repeat_n(0, self.words));
        scratch.z.extend(std::iter::repeat_n(0, self.words));
        scratch.r.push(false);
        let s = 2 * n;
        for i in 0..n {
            if self.anticommutes(i, p) {
                scratch.rowsum(s, i + n);
            }
        }
        // Rows use the same Hermitian convention as `p` (x = z = 1 is Y), so
        // the scratch row is exactly +-p and its sign bit is the eigenvalue.
        debug_assert!((0..n).all(|q| scratch.xb(s, q) == p.has_x(q) && scratch.zb(s, q) == p.has_z(q)));
        Some(scratch.r[s] ^ p.minus)
    }

    /// Measures `p`, forcing the outcome to `force` when it is random.
    pub fn measure(&mut self, p: &PauliString, force: bool) -> Outcome {
        let n = self.n;
        let Some(pivot) = (n..2 * n).find(|&row| self.anticommutes(row, p)) else {
            return Outcome {
                minus: self.expectation(p).expect("commutes with every stabilizer"),
                deterministic: true,
            };
        };
        for row in 0..2 * n {
            if row != pivot && self.anticommutes(row, p) {
                self.rowsum(row, pivot);
            }
        }
        let d = pivot - n;
        for w in 0..self.words {
            self.x[d * self.words + w] = self.x[pivot * self.words + w];
            self.z[d * self.words + w] = self.z[pivot * self.words + w];
            self.x[pivot * self.words + w] = p.x[w];
            self.z[pivot * self.words + w] = p.z[w];
        }
        self.r[d] = self.r[pivot];
        self.r[pivot] = force ^ p.minus;
        Outcome {
            minus: force,
            deterministic: false,
        }
    }

    pub fn measure_z(&mut self, q: usize, force: bool) -> Outcome {
        let p = PauliString::single(self.n, q, Pauli::Z);
        self.measure(&p, force)
    }

    /// Resets `q` to |0>.
    pub fn reset(&mut self, q: usize) {
        if self.measure_z(q, false).minus {
            self.x_gate(q);
        }
    }
}

/// Exponent of i picked up when multiplying single-qubit Paulis (x1,z1)·(x2,z2).
#[inline]
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

/// Hermitian Pauli string with an overall sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    x: Vec<u64>,
    z: Vec<u64>,
    pub minus: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        PauliString {
            x: vec![0; words],
            z: vec![0; words],
            minus: false,
        }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    pub fn from_support(n: usize, support: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in support {
            s.set(q, p);
        }
        s
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let m = 1u64 << (q % 64);
        self.x[q / 64] &= !m;
        self.z[q / 64] &= !m;
        if p.has_x() {
            self.x[q / 64] |= m;
        }
        if p.has_z() {
            self.z[q / 64] |= m;
        }
    }

    pub fn has_x(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn has_z(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

}

/// Logical operator measured at the end of a memory experiment in `basis`.
///
/// `Y_L = i X_L Z_L` is Y on the shared corner, X on the rest of the `X_L`
/// support and Z on the rest of the `Z_L` support.
pub fn logical_operator(circuit: &Circuit, basis: Basis) -> PauliString {
    let n = circuit.num_qubits;
    let o = &circuit.observable;
    match basis {
        Basis::Z => PauliString::from_support(n, &o.z_support, Pauli::Z),
        Basis::X => PauliString::from_support(n, &o.x_support, Pauli::X),
        Basis::Y => {
            let mut s = PauliString::from_support(n, &o.z_support, Pauli::Z);
            for &q in &o.x_support {
                s.set(q, if o.z_support.contains(&q) { Pauli::Y } else { Pauli::X });
            }
            s
        }
    }
}

/// Findings of a noise-free tableau run of a memory circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminismReport {
    pub measurements: usize,
    pub random_measurements: usize,
    pub nonzero_detectors: usize,
    /// Final logical operator reads +1 with certainty.
    pub observable_ok: bool,
}

impl DeterminismReport {
    pub fn passed(&self) -> bool {
        self.random_measurements == 0 && self.nonzero_detectors == 0 && self.observable_ok
    }
}

/// Runs `circuit` with every fault switched off on a full stabilizer tableau.
pub fn check_determinism(circuit: &Circuit, stabilizers: &[Vec<usize>], x_count: usize) -> Result<DeterminismReport> {
    let n = circuit.num_qubits;
    let mut t = Tableau::new(n);
    let mut records = vec![false; circuit.num_records];
    let mut report = DeterminismReport {
        measurements: 0,
        random_measurements: 0,
        nonzero_detectors: 0,
        observable_ok: false,
    };
    for ins in &circuit.instructions {
        match *ins {
            Instruction::IdealInit(basis) => {
                let mut targets = vec![logical_operator(circuit, basis)];
                for (i, s) in stabilizers.iter().enumerate() {
                    let kind = if i < x_count { Pauli::X } else { Pauli::Z };
                    targets.push(PauliString::from_support(n, s, kind));
                }
                for p in &targets {
                    let o = t.measure(p, false);
                    if o.minus {
                        return Err(invalid("init", "ideal preparation hit a -1 eigenvalue"));
                    }
                }
            }
            Instruction::H(q) => t.h(q),
            Instruction::Cnot { control, target } => t.cnot(control, target),
            Instruction::Measure { qubit, record, .. } => {
                let o = t.measure_z(qubit, false);
                report.measurements += 1;
                if !o.deterministic {
                    report.random_measurements += 1;
                }
                records[record] = o.minus;
            }
            Instruction::Reset(q) => t.reset(q),
            Instruction::Idle { .. } | Instruction::Dep1 { .. } | Instruction::Dep2 { .. } => {}
        }
    }
    report.nonzero_detectors = circuit
        .detectors
        .iter()
        .filter(|d| d.records.iter().fold(false, |acc, &r| acc ^ records[r]))
        .count();
    let logical = logical_operator(circuit, circuit.observable.basis);
    report.observable_ok = t.expectation(&logical) == Some(false);
    Ok(report)
}

/// [`check_determinism`] with the stabilizers taken from `layout`.
pub fn validate_circuit_determinism(
    circuit: &Circuit,
    layout: &crate::layout::PatchLayout,
) -> Result<DeterminismReport> {
    let stabs: Vec<Vec<usize>> = (0..layout.num_stabilizers()).map(|i| layout.support_indices(i)).collect();
    check_determinism(circuit, &stabs, layout.x_stabs.len())
}
