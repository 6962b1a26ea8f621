//! Logical channel estimation and round-count sweeps.
//!
//! Each memory experiment (X, Y or Z basis) is sampled and decoded on its own
//! random stream. The three failure fractions are inverted into the logical
//! Pauli probabilities, and sweeping `N` over a fixed total idling time
//! locates the optimal interval of round counts.

use crate::circuit::{build_memory_circuit, Basis, Circuit, ExperimentConfig};
use crate::decoder::{CircuitDecoder, WEIGHT_SCALE};
use crate::error::{invalid, Result};
use crate::frame::{stream_key, FrameSampler, BLOCK_SHOTS, BLOCK_WORDS};
use crate::layout::{build_patch, PatchLayout, StabKind};
use crate::noise::NoiseParams;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogicalEstimate {
    /// Shots per basis.
    pub shots: u64,
    pub fail_x: f64,
    pub fail_y: f64,
    pub fail_z: f64,
    pub pxl: f64,
    pub pyl: f64,
    pub pzl: f64,
    pub pl: f64,
    pub dpl: f64,
    /// Some inverted probability came out negative (left as is).
    pub negative: bool,
}

/// Inverts the three memory failure fractions into the logical Pauli channel.
pub fn invert_channel(fail_x: f64, fail_y: f64, fail_z: f64, shots: u64) -> Result<LogicalEstimate> {
    if shots == 0 {
        return Err(invalid("shots", "must be positive"));
    }
    for (name, f) in [("fail_x", fail_x), ("fail_y", fail_y), ("fail_z", fail_z)] {
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid(name, format!("must lie in [0, 1], got {f}")));
        }
    }
    let pxl = (fail_y + fail_z - fail_x) / 2.0;
    let pyl = (fail_x + fail_z - fail_y) / 2.0;
    let pzl = (fail_x + fail_y - fail_z) / 2.0;
    let sigma = |f: f64| (f * (1.0 - f) / (4.0 * shots as f64)).sqrt();
    Ok(LogicalEstimate {
        shots,
        fail_x,
        fail_y,
        fail_z,
        pxl,
        pyl,
        pzl,
        pl: (fail_x + fail_y + fail_z) / 2.0,
        dpl: sigma(fail_x) + sigma(fail_y) + sigma(fail_z),
        negative: pxl < 0.0 || pyl < 0.0 || pzl < 0.0,
    })
}

/// Failures of `shots` shots of one memory experiment, decoded with `decoder`.
///
/// Blocks of [`BLOCK_SHOTS`] shots are spread over the current rayon pool
/// when the `parallel` feature is on; the count does not depend on it.
pub fn count_failures(
    sampler: &FrameSampler,
    decoder: &CircuitDecoder,
    basis: Basis,
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<u64> {
    let blocks = shots.div_ceil(BLOCK_SHOTS as u64);
    let x_dets: Vec<usize> = decoder.x.graph().detectors.iter().map(|&d| d as usize).collect();
    let z_dets: Vec<usize> = decoder.z.graph().detectors.iter().map(|&d| d as usize).collect();
    let run = |b: u64| -> Result<u64> {
        let n = (shots - b * BLOCK_SHOTS as u64).min(BLOCK_SHOTS as u64) as usize;
        let sample = sampler.sample_block(seed, stream, b, n);
        let mut xd: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut zd: Vec<Vec<u32>> = vec![Vec::new(); n];
        let gather = |dets: &[usize], out: &mut Vec<Vec<u32>>| {
            for (local, &d) in dets.iter().enumerate() {
                for w in 0..BLOCK_WORDS {
                    let mut bits = sample.detectors[d * BLOCK_WORDS + w];
                    while bits != 0 {
                        let s = w * 64 + bits.trailing_zeros() as usize;
                        out[s].push(local as u32);
                        bits &= bits - 1;
                    }
                }
            }
        };
        if basis != Basis::Z {
            gather(&x_dets, &mut xd);
        }
        if basis != Basis::X {
            gather(&z_dets, &mut zd);
        }
        let mut failures = 0;
        for s in 0..n {
            let predicted = decoder.decode_split(&xd[s], &zd[s], basis)?;
            failures += (predicted != sample.observable_flip(basis, s)) as u64;
        }
        Ok(failures)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(run).try_reduce(|| 0, |a, b| Ok(a + b))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..blocks).map(run).sum()
    }
}

/// The three memory experiments of one `(d, N, noise)` point with shared
/// matching graphs (the detectors and fault mechanisms do not depend on the basis).
pub struct Experiment {
    circuits: Vec<Circuit>,
    samplers: Vec<FrameSampler>,
    decoder: CircuitDecoder,
}

impl Experiment {
    pub fn new(d: usize, rounds: usize, noise: NoiseParams) -> Result<Self> {
        Self::with_layout(&build_patch(d)?, rounds, noise)
    }

    pub fn with_layout(layout: &PatchLayout, rounds: usize, noise: NoiseParams) -> Result<Self> {
        let circuits = Basis::ALL
            .iter()
            .map(|&basis| {
                let cfg = ExperimentConfig {
                    basis,
                    d: layout.d,
                    rounds,
                    noise,
                    shots: 1,
                    seed: 0,
                };
                build_memory_circuit(&cfg, layout)
            })
            .collect::<Result<Vec<_>>>()?;
        let decoder = CircuitDecoder::new(&circuits[Basis::Z.index()])?;
        let samplers = circuits.iter().map(FrameSampler::new).collect();
        Ok(Experiment {
            circuits,
            samplers,
            decoder,
        })
    }

    pub fn circuit(&self, basis: Basis) -> &Circuit {
        &self.circuits[basis.index()]
    }

    pub fn decoder(&self) -> &CircuitDecoder {
        &self.decoder
    }

    pub fn failures(&self, basis: Basis, shots: u64, seed: u64, stream: u64) -> Result<u64> {
        count_failures(&self.samplers[basis.index()], &self.decoder, basis, shots, seed, stream)
    }
}

/// Random stream of one memory experiment inside a sweep.
pub fn experiment_stream(cell: u64, rounds: usize, basis: Basis) -> u64 {
    stream_key(&[cell, rounds as u64, basis.index() as u64])
}

/// Fraction of shots whose corrected logical measurement reads -1.
pub fn run_basis(config: &ExperimentConfig) -> Result<f64> {
    config.validate()?;
    let exp = Experiment::new(config.d, config.rounds, config.noise)?;
    let stream = experiment_stream(0, config.rounds, config.basis);
    let fails = exp.failures(config.basis, config.shots, config.seed, stream)?;
    Ok(fails as f64 / config.shots as f64)
}

/// How the idling time per round is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdleMode {
    /// `T / N` per round, so the total idling time is fixed.
    TotalTime,
    /// A fixed duration per round; the total grows with `N`.
    PerRound(f64),
}

impl IdleMode {
    pub fn noise_for(self, base: NoiseParams, rounds: usize) -> NoiseParams {
        match self {
            IdleMode::TotalTime => base,
            IdleMode::PerRound(dt) => NoiseParams {
                total_time: dt * rounds as f64,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub d: usize,
    pub noise: NoiseParams,
    pub rounds: Vec<usize>,
    pub shots: u64,
    pub seed: u64,
    pub idle: IdleMode,
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rounds.is_empty() {
            return Err(invalid("rounds", "the list of round counts is empty"));
        }
        if self.rounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("rounds", "round counts must be strictly ascending"));
        }
        for &n in &self.rounds {
            ExperimentConfig {
                basis: Basis::Z,
                d: self.d,
                rounds: n,
                noise: self.idle.noise_for(self.noise, n),
                shots: self.shots,
                seed: self.seed,
            }
            .validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rounds: usize,
    pub estimate: LogicalEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Index of the smallest `pL` (first one on ties).
    pub argmin: usize,
    /// Inclusive index range of the optimal interval.
    pub interval: (usize, usize),
}

impl SweepResult {
    pub fn argmin_rounds(&self) -> usize {
        self.points[self.argmin].rounds
    }

    pub fn interval_rounds(&self) -> (usize, usize) {
        (self.points[self.interval.0].rounds, self.points[self.interval.1].rounds)
    }

    pub fn min_pl(&self) -> f64 {
        self.points[self.argmin].estimate.pl
    }

    pub fn in_interval(&self, i: usize) -> bool {
        (self.interval.0..=self.interval.1).contains(&i)
    }
}

/// `(argmin, lo, hi)`: the maximal contiguous index range around the
/// minimum where `pl <= pl[argmin] + dpl[argmin]`.
pub fn optimal_interval(pl: &[f64], dpl: &[f64]) -> (usize, usize, usize) {
    assert!(!pl.is_empty() && pl.len() == dpl.len());
    let mut argmin = 0;
    for (i, &v) in pl.iter().enumerate() {
        if v < pl[argmin] {
            argmin = i;
        }
    }
    let band = pl[argmin] + dpl[argmin];
    let mut lo = argmin;
    while lo > 0 && pl[lo - 1] <= band {
        lo -= 1;
    }
    let mut hi = argmin;
    while hi + 1 < pl.len() && pl[hi + 1] <= band {
        hi += 1;
    }
    (argmin, lo, hi)
}

/// Sweep driven by an arbitrary per-`N` source of `[fail_x, fail_y, fail_z]`.
pub fn sweep_with(
    rounds: &[usize],
    shots: u64,
    mut run: impl FnMut(usize) -> Result<[f64; 3]>,
) -> Result<SweepResult> {
    if rounds.is_empty() {
        return Err(invalid("rounds", "the list of round counts is empty"));
    }
    let mut points = Vec::with_capacity(rounds.len());
    for &n in rounds {
        let [fx, fy, fz] = run(n)?;
        points.push(SweepPoint {
            rounds: n,
            estimate: invert_channel(fx, fy, fz, shots)?,
        });
    }
    let pl: Vec<f64> = points.iter().map(|p| p.estimate.pl).collect();
    let dpl: Vec<f64> = points.iter().map(|p| p.estimate.dpl).collect();
    let (argmin, lo, hi) = optimal_interval(&pl, &dpl);
    Ok(SweepResult {
        points,
        argmin,
        interval: (lo, hi),
    })
}

/// Runs the three bases at every `N` of `settings`; `cell` keys the random streams.
pub fn sweep_cell(settings: &SweepSettings, cell: u64) -> Result<SweepResult> {
    settings.validate()?;
    let layout = build_patch(settings.d)?;
    sweep_with(&settings.rounds, settings.shots, |n| {
        let exp = Experiment::with_layout(&layout, n, settings.idle.noise_for(settings.noise, n))?;
        let mut f = [0.0; 3];
        for basis in Basis::ALL {
            let fails = exp.failures(basis, settings.shots, settings.seed, experiment_stream(cell, n, basis))?;
            f[basis.index()] = fails as f64 / settings.shots as f64;
        }
        Ok(f)
    })
}

/// Runs `f` on a pool of `workers` threads (ignored without the `parallel` feature).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f())
    }
}

pub fn sweep_rounds(settings: &SweepSettings, workers: usize) -> Result<SweepResult> {
    with_workers(workers, || sweep_cell(settings, 0))?
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridParam {
    T1,
    Tphi,
    P,
    Q,
}

impl GridParam {
    pub fn name(self) -> &'static str {
        match self {
            GridParam::T1 => "T1",
            GridParam::Tphi => "Tphi",
            GridParam::P => "p",
            GridParam::Q => "q",
        }
    }

    pub fn apply(self, noise: &mut NoiseParams, value: f64) {
        match self {
            GridParam::T1 => noise.t1 = value,
            GridParam::Tphi => noise.t_phi = value,
            GridParam::P => noise.p = value,
            GridParam::Q => noise.q = value,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(GridParam::T1),
            "tphi" | "t_phi" => Ok(GridParam::Tphi),
            "p" => Ok(GridParam::P),
            "q" => Ok(GridParam::Q),
            _ => Err(invalid("grid parameter", format!("expected T1, Tphi, p or q, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub first: f64,
    pub second: f64,
    pub result: SweepResult,
}

/// Sweeps every cell of a two-parameter grid (row-major, `first` outer).
pub fn heatmap_sweep(
    base: &SweepSettings,
    first: (GridParam, &[f64]),
    second: (GridParam, &[f64]),
) -> Result<Vec<HeatmapCell>> {
    if first.1.is_empty() || second.1.is_empty() {
        return Err(invalid("grid", "both grid axes need at least one value"));
    }
    if first.0 == second.0 {
        return Err(invalid("grid", "the two grid axes must differ"));
    }
    let mut cells = Vec::new();
    for (i, &a) in first.1.iter().enumerate() {
        for (j, &b) in second.1.iter().enumerate() {
            let mut s = base.clone();
            first.0.apply(&mut s.noise, a);
            second.0.apply(&mut s.noise, b);
            let cell = (i * second.1.len() + j) as u64;
            cells.push(HeatmapCell {
                first: a,
                second: b,
                result: sweep_cell(&s, cell)?,
            });
        }
    }
    Ok(cells)
}

pub const SWEEP_HEADER: [&str; 11] = [
    "N",
    "shots",
    "fail_x",
    "fail_y",
    "fail_z",
    "pxL",
    "pyL",
    "pzL",
    "pL",
    "dpL",
    "in_optimal_interval",
];

fn sweep_fields(r: &SweepResult, i: usize) -> Vec<String> {
    let p = &r.points[i];
    let e = &p.estimate;
    vec![
        p.rounds.to_string(),
        e.shots.to_string(),
        e.fail_x.to_string(),
        e.fail_y.to_string(),
        e.fail_z.to_string(),
        e.pxl.to_string(),
        e.pyl.to_string(),
        e.pzl.to_string(),
        e.pl.to_string(),
        e.dpl.to_string(),
        (r.in_interval(i) as u8).to_string(),
    ]
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    invalid("output", e.to_string())
}

pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for i in 0..result.points.len() {
        w.write_record(sweep_fields(result, i)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| invalid("output", e.to_string()))
}

/// Reads a CSV written by [`write_sweep_csv`]. Estimates are recomputed from
/// the failure columns and the interval is re-derived.
pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<SweepResult> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| invalid("sweep csv", e.to_string()))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid("sweep csv", format!("missing column {name}")))
    };
    let (cn, cs, cx, cy, cz) = (col("N")?, col("shots")?, col("fail_x")?, col("fail_y")?, col("fail_z")?);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| invalid("sweep csv", e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| invalid("sweep csv", format!("bad number {:?}", &rec[i])))
        };
        rows.push((num(cn)? as usize, num(cs)? as u64, [num(cx)?, num(cy)?, num(cz)?]));
    }
    let Some(&(_, shots, _)) = rows.first() else {
        return Err(invalid("sweep csv", "no rows"));
    };
    if rows.iter().any(|r| r.1 != shots) {
        return Err(invalid("sweep csv", "shots differ between rows"));
    }
    let rounds: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let mut it = rows.iter();
    sweep_with(&rounds, shots, |_| Ok(it.next().expect("one row per N").2))
}

/// One row per (cell, N): the two grid values followed by the sweep columns.
pub fn write_heatmap_csv<W: Write>(out: W, names: (GridParam, GridParam), cells: &[HeatmapCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![names.0.name(), names.1.name()];
    header.extend(SWEEP_HEADER);
    w.write_record(&header).map_err(csv_err)?;
    for c in cells {
        for i in 0..c.result.points.len() {
            let mut row = vec![c.first.to_string(), c.second.to_string()];
            row.extend(sweep_fields(&c.result, i));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| invalid("output", e.to_string()))
}

/// One row per cell: argmin, interval bounds and minimum `pL`.
pub fn write_heatmap_summary_csv<W: Write>(
    out: W,
    names: (GridParam, GridParam),
    cells: &[HeatmapCell],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        names.0.name(),
        names.1.name(),
        "argmin_N",
        "interval_lo",
        "interval_hi",
        "min_pL",
        "dpL_at_min",
    ])
    .map_err(csv_err)?;
    for c in cells {
        let r = &c.result;
        let (lo, hi) = r.interval_rounds();
        w.write_record([
            c.first.to_string(),
            c.second.to_string(),
            r.argmin_rounds().to_string(),
            lo.to_string(),
            hi.to_string(),
            r.min_pl().to_string(),
            r.points[r.argmin].estimate.dpl.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| invalid("output", e.to_string()))
}

/// Modelling choices in effect, for the metadata sidecar.
pub fn design_flags() -> serde_json::Value {
    serde_json::json!({
        "dep1_after_hadamard": true,
        "idling": "T/N on every data qubit during ancilla readout and reset",
        "perfect_final_round": true,
        "graph_decomposition": "per detector family; X and Z components matched independently",
        "edge_merge": "xor: p1(1-p2) + p2(1-p1)",
        "edge_mask_conflict": "keep the mask carrying more probability",
        "edge_weight": "ln((1-p)/p), negative weights clamped to 0",
        "weight_scale": WEIGHT_SCALE,
        "matching": "exact blossom on the boundary-doubled defect graph",
        "interval_rule": "contiguous N with pL <= pL(argmin) + dpL(argmin)",
        "negative_probabilities": "flagged, not clamped",
        "rng": "ChaCha8 per block of shots keyed by (seed, cell, N, basis, block)",
        "block_shots": BLOCK_SHOTS,
        "shots_per_basis": "equal for X, Y and Z",
    })
}

/// Metadata sidecar for a sweep or heatmap run.
pub fn metadata(command: &str, config: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "tool": "surfmem",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "design": design_flags(),
    })
}

/// Detector family a basis is decoded with (`None` for Y, which needs both).
pub fn decoding_family(basis: Basis) -> Option<StabKind> {
    match basis {
        Basis::Z => Some(StabKind::Z),
        Basis::X => Some(StabKind::X),
        Basis::Y => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction;
    use crate::noise::ChannelProbs;
    use proptest::prelude::*;

    fn fig_noise() -> NoiseParams {
        NoiseParams {
            t1: 2.0,
            t_phi: 12.0,
            p: 0.006,
            q: 0.02,
            total_time: 1.0,
        }
    }

    #[test]
    fn inversion_examples() {
        let e = invert_channel(0.0, 0.0, 0.0, 10).unwrap();
        assert_eq!((e.pxl, e.pyl, e.pzl, e.pl, e.dpl), (0.0, 0.0, 0.0, 0.0, 0.0));
        let e = invert_channel(0.02, 0.03, 0.03, 100).unwrap();
        assert!((e.pxl - 0.02).abs() < 1e-15);
        assert!((e.pyl - 0.01).abs() < 1e-15);
        assert!((e.pzl - 0.01).abs() < 1e-15);
        assert!((e.pl - 0.04).abs() < 1e-15);
        let e = invert_channel(0.04, 0.04, 0.04, 100_000).unwrap();
        assert!((e.dpl - 9.295e-4).abs() < 1e-6);
        assert!(invert_channel(0.1, 0.1, 0.1, 0).is_err());
        assert!(invert_channel(1.5, 0.1, 0.1, 10).is_err());
        let e = invert_channel(0.1, 0.0, 0.0, 10).unwrap();
        assert!(e.negative && e.pxl < 0.0);
    }

    proptest! {
        #[test]
        fn channel_sum_identities(a in 0.0f64..0.3, b in 0.0f64..0.3, c in 0.0f64..0.3, shots in 1u64..1_000_000) {
            let e = invert_channel(a, b, c, shots).unwrap();
            prop_assert!((e.pl - (e.pxl + e.pyl + e.pzl)).abs() < 1e-12);
            prop_assert!((e.pl - (a + b + c) / 2.0).abs() < 1e-12);
            prop_assert!(e.dpl >= 0.0);
        }

        #[test]
        fn interval_contains_argmin(pl in prop::collection::vec(0.0f64..1.0, 1..20), scale in 0.0f64..0.2) {
            let dpl: Vec<f64> = pl.iter().map(|v| v * scale).collect();
            let (m, lo, hi) = optimal_interval(&pl, &dpl);
            prop_assert!(lo <= m && m <= hi);
            for v in &pl[lo..=hi] {
                prop_assert!(*v <= pl[m] + dpl[m]);
            }
            prop_assert!(pl.iter().all(|&v| v >= pl[m]));
            if lo > 0 { prop_assert!(pl[lo - 1] > pl[m] + dpl[m]); }
            if hi + 1 < pl.len() { prop_assert!(pl[hi + 1] > pl[m] + dpl[m]); }
        }
    }

    #[test]
    fn interval_rule_on_stubbed_sweep() {
        // Failure fractions chosen so that pL = 3f/2 with f per N below.
        let fs = [0.2, 0.1, 0.02, 0.1, 0.3];
        let rounds = [1, 2, 3, 4, 5];
        let r = sweep_with(&rounds, 1000, |n| Ok([fs[n - 1]; 3])).unwrap();
        assert_eq!(r.argmin_rounds(), 3);
        assert_eq!(r.interval, (2, 2));
        let fs = [0.2, 0.0205, 0.02, 0.0202, 0.3];
        let r = sweep_with(&rounds, 1000, |n| Ok([fs[n - 1]; 3])).unwrap();
        assert_eq!(r.interval_rounds(), (2, 4));
        assert!(sweep_with(&[], 10, |_| Ok([0.0; 3])).is_err());
    }

    #[test]
    fn zero_noise_never_fails() {
        for basis in Basis::ALL {
            let cfg = ExperimentConfig {
                basis,
                d: 3,
                rounds: 3,
                noise: NoiseParams::noiseless(1.0),
                shots: 10_000,
                seed: 1,
            };
            assert_eq!(run_basis(&cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_undetectable_mechanism_sets_failure_rate() {
        let p0 = 0.05;
        let layout = build_patch(3).unwrap();
        let cfg = ExperimentConfig {
            basis: Basis::Z,
            d: 3,
            rounds: 2,
            noise: NoiseParams::noiseless(1.0),
            shots: 40_000,
            seed: 9,
        };
        let mut c = build_memory_circuit(&cfg, &layout).unwrap();
        // X on a Z_L qubit after the last syndrome round: silent logical flip.
        c.instructions.push(Instruction::Idle {
            qubits: vec![c.observable.z_support[0]],
            duration: 0.0,
            probs: ChannelProbs {
                p0: 1.0 - p0,
                px: p0,
                py: 0.0,
                pz: 0.0,
            },
            first_location: c.num_locations,
        });
        c.num_locations += 1;
        let dec = CircuitDecoder::new(&c).unwrap();
        assert!((dec.z.graph().undetectable - p0).abs() < 1e-15);
        let fails = count_failures(&FrameSampler::new(&c), &dec, Basis::Z, cfg.shots, cfg.seed, 0).unwrap();
        let f = fails as f64 / cfg.shots as f64;
        let sigma = (p0 * (1.0 - p0) / cfg.shots as f64).sqrt();
        assert!((f - p0).abs() < 3.0 * sigma, "{f}");
    }

    #[test]
    fn results_are_deterministic_and_worker_independent() {
        let settings = SweepSettings {
            d: 3,
            noise: fig_noise(),
            rounds: vec![2, 4],
            shots: 700,
            seed: 3,
            idle: IdleMode::TotalTime,
        };
        let a = sweep_rounds(&settings, 1).unwrap();
        let b = sweep_rounds(&settings, 3).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N,shots,fail_x,fail_y,fail_z,pxL,pyL,pzL,pL,dpL,in_optimal_interval\n"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(read_sweep_csv(text.as_bytes()).unwrap(), a);
        assert!(read_sweep_csv("N,shots\n".as_bytes()).is_err());
    }

    #[test]
    fn single_cell_heatmap_matches_sweep() {
        let settings = SweepSettings {
            d: 3,
            noise: fig_noise(),
            rounds: vec![1, 3],
            shots: 300,
            seed: 5,
            idle: IdleMode::TotalTime,
        };
        let cells = heatmap_sweep(&settings, (GridParam::T1, &[2.0]), (GridParam::P, &[0.006])).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].result, sweep_rounds(&settings, 1).unwrap());
        let mut buf = Vec::new();
        write_heatmap_csv(&mut buf, (GridParam::T1, GridParam::P), &cells).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("T1,p,N,shots"));
        assert!(heatmap_sweep(&settings, (GridParam::P, &[0.1]), (GridParam::P, &[0.1])).is_err());
    }

    #[test]
    fn run_basis_matches_sweep_cell_zero() {
        let settings = SweepSettings {
            d: 3,
            noise: fig_noise(),
            rounds: vec![3],
            shots: 500,
            seed: 8,
            idle: IdleMode::TotalTime,
        };
        let r = sweep_rounds(&settings, 1).unwrap();
        let cfg = ExperimentConfig {
            basis: Basis::Y,
            d: 3,
            rounds: 3,
            noise: fig_noise(),
            shots: 500,
            seed: 8,
        };
        assert_eq!(run_basis(&cfg).unwrap(), r.points[0].estimate.fail_y);
    }

    #[test]
    fn metadata_names_design_flags() {
        let m = metadata("sweep", serde_json::json!({"d": 5}));
        let flags = m["design"].as_object().unwrap();
        for key in ["dep1_after_hadamard", "edge_merge", "interval_rule", "graph_decomposition"] {
            assert!(flags.contains_key(key), "{key}");
        }
        assert_eq!(m["config"]["d"], 5);
    }
}
