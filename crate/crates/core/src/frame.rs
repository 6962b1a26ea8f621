//! Pauli-frame simulation.
//!
//! Noise-free, the memory circuit is deterministic, so every shot is fully
//! described by the Pauli frame of the faults that fired: a detector reads 1
//! iff the frame flipped an odd number of its records. [`inject_faults`]
//! propagates a chosen fault set for a single shot; [`FrameSampler`] samples
//! random faults for 256 shots at a time with one bit per shot in each word.
//!
//! Randomness is keyed by `(seed, stream, block)` where a block is a fixed
//! run of [`BLOCK_SHOTS`] consecutive shots, so the bits of a shot depend
//! only on the seed, the stream and the shot index, never on how blocks are
//! spread over threads.

use crate::circuit::{Basis, Circuit, FaultKind, FaultMechanism, Instruction, LOGICAL_X_FLIP, LOGICAL_Z_FLIP};
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};

pub const BLOCK_WORDS: usize = 4;
pub const BLOCK_SHOTS: usize = 64 * BLOCK_WORDS;

/// Pauli operator on `n` qubits as packed X and Z bit masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        PauliFrame {
            n,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_x(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    pub fn has_z(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.has_x(q), self.has_z(q))
    }

    /// Multiplies `p` onto qubit `q` (phases are irrelevant for frames).
    pub fn apply(&mut self, q: usize, p: Pauli) {
        let bit = 1u64 << (q % 64);
        if p.has_x() {
            self.x[q / 64] ^= bit;
        }
        if p.has_z() {
            self.z[q / 64] ^= bit;
        }
    }

    fn set(&mut self, q: usize, x: bool, z: bool) {
        let bit = 1u64 << (q % 64);
        let w = q / 64;
        self.x[w] = (self.x[w] & !bit) | if x { bit } else { 0 };
        self.z[w] = (self.z[w] & !bit) | if z { bit } else { 0 };
    }

    pub fn clear(&mut self, q: usize) {
        self.set(q, false, false);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn h(&mut self, q: usize) {
        let (x, z) = (self.has_x(q), self.has_z(q));
        self.set(q, z, x);
    }

    /// X on the control spreads to the target, Z on the target spreads to the control.
    pub fn cnot(&mut self, c: usize, t: usize) {
        if self.has_x(c) {
            self.x[t / 64] ^= 1 << (t % 64);
        }
        if self.has_z(t) {
            self.z[c / 64] ^= 1 << (c % 64);
        }
    }

    /// Conjugates the frame by a Clifford instruction; non-Clifford
    /// instructions leave it unchanged.
    pub fn propagate(&mut self, ins: &Instruction) {
        match *ins {
            Instruction::H(q) => self.h(q),
            Instruction::Cnot { control, target } => self.cnot(control, target),
            _ => {}
        }
    }
}

/// Detectors and logical flips produced by a deterministic fault set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Injection {
    /// Sorted indices of detectors that fire.
    pub detectors: Vec<usize>,
    /// Combination of `LOGICAL_Z_FLIP` and `LOGICAL_X_FLIP`.
    pub logical_mask: u8,
}

impl Injection {
    pub fn observable_flip(&self, basis: Basis) -> bool {
        basis.is_flipped_by(self.logical_mask)
    }
}

/// Propagates exactly the given mechanisms (indices into `mechanisms`).
pub fn inject_faults(
    circuit: &Circuit,
    mechanisms: &[FaultMechanism],
    subset: &[usize],
) -> Result<Injection> {
    let mut at: Vec<Vec<FaultKind>> = vec![Vec::new(); circuit.instructions.len()];
    for &i in subset {
        let m = mechanisms.get(i).ok_or(Error::UnknownFault(i))?;
        at[m.instruction].push(m.kind);
    }
    let (records, frame) = run_frame(circuit, &at, circuit.instructions.len());
    let detectors = circuit
        .detectors
        .iter()
        .enumerate()
        .filter(|(_, d)| d.records.iter().fold(false, |acc, &r| acc ^ records[r]))
        .map(|(i, _)| i)
        .collect();
    let logical_mask = circuit.logical_mask(|q| frame.has_x(q), |q| frame.has_z(q));
    Ok(Injection {
        detectors,
        logical_mask,
    })
}

/// Frame just before instruction `stop` when the mechanisms in `subset` fire.
pub fn frame_before(
    circuit: &Circuit,
    mechanisms: &[FaultMechanism],
    subset: &[usize],
    stop: usize,
) -> Result<PauliFrame> {
    let mut at: Vec<Vec<FaultKind>> = vec![Vec::new(); circuit.instructions.len()];
    for &i in subset {
        let m = mechanisms.get(i).ok_or(Error::UnknownFault(i))?;
        at[m.instruction].push(m.kind);
    }
    Ok(run_frame(circuit, &at, stop).1)
}

fn run_frame(circuit: &Circuit, faults: &[Vec<FaultKind>], stop: usize) -> (Vec<bool>, PauliFrame) {
    let mut frame = PauliFrame::new(circuit.num_qubits);
    let mut records = vec![false; circuit.num_records];
    for (idx, ins) in circuit.instructions.iter().enumerate().take(stop) {
        match *ins {
            Instruction::H(_) | Instruction::Cnot { .. } => frame.propagate(ins),
            Instruction::Measure { qubit, record, .. } => records[record] = frame.has_x(qubit),
            Instruction::Reset(q) => frame.clear(q),
            _ => {}
        }
        for f in &faults[idx] {
            match *f {
                FaultKind::Pauli1 { qubit, pauli } => frame.apply(qubit, pauli),
                FaultKind::Pauli2 { a, b, paulis } => {
                    frame.apply(a, paulis.0);
                    frame.apply(b, paulis.1);
                }
                FaultKind::ReadoutFlip { record } => records[record] ^= true,
            }
        }
    }
    (records, frame)
}

/// Deterministic per-block generator for `(seed, stream, block)`.
pub fn block_rng(seed: u64, stream: u64, block: u64) -> ChaCha8Rng {
    let mut state = seed ^ 0x5155_4543_4944_4c45;
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        let word = match i {
            0 => splitmix(&mut state),
            1 => splitmix(&mut state) ^ stream,
            2 => splitmix(&mut state) ^ block,
            _ => splitmix(&mut state),
        };
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes several identifiers into a single stream key.
pub fn stream_key(parts: &[u64]) -> u64 {
    let mut state = 0x243f_6a88_85a3_08d3u64;
    let mut acc = 0u64;
    for &p in parts {
        state ^= p;
        acc = acc.rotate_left(17) ^ splitmix(&mut state);
    }
    acc
}

#[derive(Debug, Clone, Copy)]
enum Channel {
    /// Uniform over X, Y, Z.
    Dep1,
    /// Uniform over the 15 two-qubit Paulis.
    Dep2,
    /// Conditional on an error: X below `x`, Y below `xy`, Z otherwise.
    Biased { x: f64, xy: f64 },
    Flip,
}

#[derive(Debug, Clone, Copy)]
struct Noise {
    prob: f64,
    ln_keep: f64,
    channel: Channel,
}

impl Noise {
    fn new(prob: f64, channel: Channel) -> Option<Self> {
        (prob > 0.0).then(|| Noise {
            prob,
            ln_keep: (-prob).ln_1p(),
            channel,
        })
    }

    /// Calls `hit` for each shot in `0..shots` on which this noise fires.
    #[inline]
    fn for_each_hit(&self, rng: &mut ChaCha8Rng, shots: usize, mut hit: impl FnMut(usize, &mut ChaCha8Rng)) {
        if self.prob >= 1.0 {
            for s in 0..shots {
                hit(s, rng);
            }
            return;
        }
        let mut pos = 0usize;
        loop {
            let u: f64 = rng.gen();
            let skip = ((-u).ln_1p() / self.ln_keep).floor();
            if skip >= (shots - pos) as f64 {
                return;
            }
            pos += skip as usize;
            hit(pos, rng);
            pos += 1;
            if pos >= shots {
                return;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    H(usize),
    Cnot(usize, usize),
    Measure { qubit: usize, record: usize, noise: Option<Noise> },
    Reset(usize),
    Noise1 { qubit: usize, noise: Noise },
    Noise2 { a: usize, b: usize, noise: Noise },
}

/// Result of one block of shots, with `BLOCK_WORDS` words per row.
#[derive(Debug, Clone)]
pub struct BlockSample {
    pub shots: usize,
    /// Row-major: detector `i` occupies words `i*BLOCK_WORDS..(i+1)*BLOCK_WORDS`.
    pub detectors: Vec<u64>,
    /// Shots whose frame anticommutes with `Z_L`.
    pub z_flips: [u64; BLOCK_WORDS],
    /// Shots whose frame anticommutes with `X_L`.
    pub x_flips: [u64; BLOCK_WORDS],
}

impl BlockSample {
    #[inline]
    pub fn detector(&self, det: usize, shot: usize) -> bool {
        self.detectors[det * BLOCK_WORDS + shot / 64] >> (shot % 64) & 1 == 1
    }

    pub fn logical_mask(&self, shot: usize) -> u8 {
        let bit = |w: &[u64; BLOCK_WORDS]| (w[shot / 64] >> (shot % 64) & 1) as u8;
        (bit(&self.z_flips) * LOGICAL_Z_FLIP) | (bit(&self.x_flips) * LOGICAL_X_FLIP)
    }

    pub fn observable_flip(&self, basis: Basis, shot: usize) -> bool {
        basis.is_flipped_by(self.logical_mask(shot))
    }
}

/// Circuit compiled for batched frame sampling.
#[derive(Debug, Clone)]
pub struct FrameSampler {
    ops: Vec<Op>,
    num_qubits: usize,
    num_records: usize,
    detectors: Vec<(usize, Option<usize>)>,
    z_support: Vec<usize>,
    x_support: Vec<usize>,
}

impl FrameSampler {
    pub fn new(circuit: &Circuit) -> Self {
        let mut ops = Vec::with_capacity(circuit.instructions.len());
        for ins in &circuit.instructions {
            match *ins {
                Instruction::IdealInit(_) => {}
                Instruction::H(q) => ops.push(Op::H(q)),
                Instruction::Cnot { control, target } => ops.push(Op::Cnot(control, target)),
                Instruction::Measure {
                    qubit, flip, record, ..
                } => ops.push(Op::Measure {
                    qubit,
                    record,
                    noise: Noise::new(flip, Channel::Flip),
                }),
                Instruction::Reset(q) => ops.push(Op::Reset(q)),
                Instruction::Idle {
                    ref qubits, probs, ..
                } => {
                    let total = probs.error();
                    if let Some(noise) = Noise::new(
                        total,
                        Channel::Biased {
                            x: probs.px / total,
                            xy: (probs.px + probs.py) / total,
                        },
                    ) {
                        ops.extend(qubits.iter().map(|&qubit| Op::Noise1 { qubit, noise }));
                    }
                }
                Instruction::Dep1 { qubit, p, .. } => {
                    if let Some(noise) = Noise::new(p, Channel::Dep1) {
                        ops.push(Op::Noise1 { qubit, noise });
                    }
                }
                Instruction::Dep2 { a, b, p, .. } => {
                    if let Some(noise) = Noise::new(p, Channel::Dep2) {
                        ops.push(Op::Noise2 { a, b, noise });
                    }
                }
            }
        }
        let detectors = circuit
            .detectors
            .iter()
            .map(|d| match d.records.as_slice() {
                [r] => (*r, None),
                [a, b] => (*b, Some(*a)),
                _ => unreachable!("detectors compare at most two records"),
            })
            .collect();
        FrameSampler {
            ops,
            num_qubits: circuit.num_qubits,
            num_records: circuit.num_records,
            detectors,
            z_support: circuit.observable.z_support.clone(),
            x_support: circuit.observable.x_support.clone(),
        }
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    /// Samples block `block` of stream `stream`; only the first `shots`
    /// (at most [`BLOCK_SHOTS`]) shots are simulated and reported.
    pub fn sample_block(&self, seed: u64, stream: u64, block: u64, shots: usize) -> BlockSample {
        debug_assert!(shots <= BLOCK_SHOTS);
        const W: usize = BLOCK_WORDS;
        let mut rng = block_rng(seed, stream, block);
        let mut x = vec![0u64; self.num_qubits * W];
        let mut z = vec![0u64; self.num_qubits * W];
        let mut rec = vec![0u64; self.num_records * W];

        #[inline]
        fn flip(words: &mut [u64], row: usize, shot: usize) {
            words[row * W + shot / 64] ^= 1 << (shot % 64);
        }
        #[inline]
        fn apply(x: &mut [u64], z: &mut [u64], q: usize, shot: usize, pauli: u8) {
            // pauli: 1 = X, 2 = Y, 3 = Z
            if pauli != 3 {
                flip(x, q, shot);
            }
            if pauli != 1 {
                flip(z, q, shot);
            }
        }

        for op in &self.ops {
            match *op {
                Op::H(q) => {
                    for w in 0..W {
                        std::mem::swap(&mut x[q * W + w], &mut z[q * W + w]);
                    }
                }
                Op::Cnot(c, t) => {
                    for w in 0..W {
                        x[t * W + w] ^= x[c * W + w];
                        z[c * W + w] ^= z[t * W + w];
                    }
                }
                Op::Measure { qubit, record, noise } => {
                    rec[record * W..(record + 1) * W].copy_from_slice(&x[qubit * W..(qubit + 1) * W]);
                    if let Some(noise) = noise {
                        noise.for_each_hit(&mut rng, shots, |s, _| flip(&mut rec, record, s));
                    }
                }
                Op::Reset(q) => {
                    x[q * W..(q + 1) * W].fill(0);
                    z[q * W..(q + 1) * W].fill(0);
                }
                Op::Noise1 { qubit, noise } => {
                    noise.for_each_hit(&mut rng, shots, |s, rng| {
                        let pauli = match noise.channel {
                            Channel::Biased { x: bx, xy } => {
                                let u: f64 = rng.gen();
                                if u < bx {
                                    1
                                } else if u < xy {
                                    2
                                } else {
                                    3
                                }
                            }
                            _ => rng.gen_range(1..=3u8),
                        };
                        apply(&mut x, &mut z, qubit, s, pauli);
                    });
                }
                Op::Noise2 { a, b, noise } => {
                    noise.for_each_hit(&mut rng, shots, |s, rng| {
                        let k = rng.gen_range(1..16u8);
                        let (pa, pb) = (k >> 2, k & 3);
                        if pa != 0 {
                            apply(&mut x, &mut z, a, s, pa);
                        }
                        if pb != 0 {
                            apply(&mut x, &mut z, b, s, pb);
                        }
                    });
                }
            }
        }

        let mut detectors = vec![0u64; self.detectors.len() * W];
        for (i, &(cur, prev)) in self.detectors.iter().enumerate() {
            for w in 0..W {
                let mut v = rec[cur * W + w];
                if let Some(p) = prev {
                    v ^= rec[p * W + w];
                }
                detectors[i * W + w] = v;
            }
        }
        let parity = |support: &[usize], frame: &[u64]| {
            let mut out = [0u64; W];
            for &q in support {
                for (w, o) in out.iter_mut().enumerate() {
                    *o ^= frame[q * W + w];
                }
            }
            out
        };
        let mut sample = BlockSample {
            shots,
            detectors,
            z_flips: parity(&self.z_support, &x),
            x_flips: parity(&self.x_support, &z),
        };
        mask_tail(&mut sample, shots);
        sample
    }
}

fn mask_tail(sample: &mut BlockSample, shots: usize) {
    let mut keep = [0u64; BLOCK_WORDS];
    for (w, k) in keep.iter_mut().enumerate() {
        let lo = w * 64;
        *k = if shots >= lo + 64 {
            u64::MAX
        } else if shots > lo {
            (1u64 << (shots - lo)) - 1
        } else {
            0
        };
    }
    for row in sample.detectors.chunks_mut(BLOCK_WORDS) {
        for (v, k) in row.iter_mut().zip(keep) {
            *v &= k;
        }
    }
    for (w, k) in keep.iter().enumerate() {
        sample.z_flips[w] &= k;
        sample.x_flips[w] &= k;
    }
}

/// Shots of one circuit as a dense bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBatch {
    pub shots: usize,
    pub num_detectors: usize,
    /// Row-major, one row of `num_detectors` bits per shot, `row_words` words per row.
    detector_bits: Vec<u64>,
    row_words: usize,
    /// Observable flip of the circuit's basis, one bit per shot.
    observable_flips: Vec<u64>,
}

impl ShotBatch {
    pub fn detector(&self, shot: usize, det: usize) -> bool {
        self.detector_bits[shot * self.row_words + det / 64] >> (det % 64) & 1 == 1
    }

    pub fn observable_flip(&self, shot: usize) -> bool {
        self.observable_flips[shot / 64] >> (shot % 64) & 1 == 1
    }

    pub fn fired(&self, shot: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_detectors).filter(move |&d| self.detector(shot, d))
    }

    /// Binary dump: little-endian `u64` shot count and detector count, then
    /// the row-major detector bits packed LSB-first into
    /// `ceil(shots * detectors / 8)` bytes, then the observable bits packed
    /// into `ceil(shots / 8)` bytes.
    pub fn write_packed<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(&(self.shots as u64).to_le_bytes())?;
        out.write_all(&(self.num_detectors as u64).to_le_bytes())?;
        let mut bits = BitWriter::default();
        for s in 0..self.shots {
            for d in 0..self.num_detectors {
                bits.push(self.detector(s, d));
            }
        }
        out.write_all(&bits.finish())?;
        let mut bits = BitWriter::default();
        for s in 0..self.shots {
            bits.push(self.observable_flip(s));
        }
        out.write_all(&bits.finish())
    }

    pub fn read_packed(data: &[u8]) -> io::Result<ShotBatch> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        if data.len() < 16 {
            return Err(bad("truncated header"));
        }
        let shots = u64::from_le_bytes(data[0..8].try_into().unwrap()) as usize;
        let dets = u64::from_le_bytes(data[8..16].try_into().unwrap()) as usize;
        let det_bytes = (shots * dets).div_ceil(8);
        let obs_bytes = shots.div_ceil(8);
        if data.len() != 16 + det_bytes + obs_bytes {
            return Err(bad("length does not match header"));
        }
        let bit = |offset: usize, i: usize| data[offset + i / 8] >> (i % 8) & 1 == 1;
        let mut batch = ShotBatch::empty(shots, dets);
        for s in 0..shots {
            for d in 0..dets {
                if bit(16, s * dets + d) {
                    batch.detector_bits[s * batch.row_words + d / 64] |= 1 << (d % 64);
                }
            }
            if bit(16 + det_bytes, s) {
                batch.observable_flips[s / 64] |= 1 << (s % 64);
            }
        }
        Ok(batch)
    }

    fn empty(shots: usize, num_detectors: usize) -> Self {
        let row_words = num_detectors.div_ceil(64).max(1);
        ShotBatch {
            shots,
            num_detectors,
            detector_bits: vec![0; shots * row_words],
            row_words,
            observable_flips: vec![0; shots.div_ceil(64)],
        }
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    fn push(&mut self, b: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if b {
            *self.bytes.last_mut().unwrap() |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Samples `shots` shots of `circuit`.
pub fn sample_shots(circuit: &Circuit, shots: usize, seed: u64) -> ShotBatch {
    let sampler = FrameSampler::new(circuit);
    let blocks = shots.div_ceil(BLOCK_SHOTS);
    let run = |b: usize| {
        let n = (shots - b * BLOCK_SHOTS).min(BLOCK_SHOTS);
        sampler.sample_block(seed, 0, b as u64, n)
    };
    #[cfg(feature = "parallel")]
    let samples: Vec<BlockSample> = {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<BlockSample> = (0..blocks).map(run).collect();

    let basis = circuit.observable.basis;
    let mut batch = ShotBatch::empty(shots, circuit.num_detectors());
    for (b, sample) in samples.iter().enumerate() {
        for s in 0..sample.shots {
            let shot = b * BLOCK_SHOTS + s;
            for d in 0..batch.num_detectors {
                if sample.detector(d, s) {
                    batch.detector_bits[shot * batch.row_words + d / 64] |= 1 << (d % 64);
                }
            }
            if sample.observable_flip(basis, s) {
                batch.observable_flips[shot / 64] |= 1 << (shot % 64);
            }
        }
    }
    batch
}
