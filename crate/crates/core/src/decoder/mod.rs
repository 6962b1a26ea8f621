//! Minimum-weight perfect matching decoder.
//!
//! Every fault mechanism is split by detector family: the Z-type detectors
//! it flips (together with its `Z_L` flip) become an edge of the Z graph and
//! the X-type detectors (with its `X_L` flip) an edge of the X graph. Parallel
//! edges are merged by XOR-combining their probabilities, and an edge of
//! probability `p` gets weight `ln((1-p)/p)`.
//!
//! Decoding a shot matches the defects of one graph along shortest paths.
//! Pairs that are no closer to each other than both are to the boundary are
//! dropped (matching both to the boundary is never worse), the remaining
//! pairs split the defects into independent clusters, and each cluster with
//! three or more defects is solved exactly with the blossom algorithm on the
//! usual boundary-doubled graph.

pub mod blossom;
pub mod dem;

use crate::circuit::{enumerate_fault_mechanisms, Basis, Circuit, FaultMechanism, LOGICAL_X_FLIP, LOGICAL_Z_FLIP};
use crate::error::{Error, Result};
use crate::layout::StabKind;
use dem::Effect;
use serde::Serialize;
use smallvec::SmallVec;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

/// Fixed-point scale applied to edge weights before matching.
pub const WEIGHT_SCALE: f64 = 1000.0;
const MAX_INT_WEIGHT: u32 = 1 << 24;
const INF: u32 = u32::MAX;
const PARITY: u32 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    /// Family-local node index.
    pub u: u32,
    /// Second node, or `None` for the boundary.
    pub v: Option<u32>,
    pub probability: f64,
    pub weight: f64,
    /// Whether this edge flips the logical operator read by its graph.
    pub observable: bool,
}

impl Edge {
    pub fn int_weight(&self) -> u32 {
        (self.weight.max(0.0) * WEIGHT_SCALE).round().min(MAX_INT_WEIGHT as f64) as u32
    }
}

/// Matching graph over the detectors of one family plus a boundary node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingGraph {
    pub family: StabKind,
    /// Global detector id of each node.
    pub detectors: Vec<u32>,
    /// Sorted by `(u, v)`; the boundary edge of `u` comes last.
    pub edges: Vec<Edge>,
    /// Merges that combined edges with different observable bits.
    pub mask_conflicts: usize,
    /// Total probability of mechanisms that flip this graph's observable
    /// without touching any of its detectors.
    pub undetectable: f64,
}

/// XOR combination: probability that exactly one of two independent events fires.
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

pub fn edge_weight(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

impl MatchingGraph {
    pub fn num_nodes(&self) -> usize {
        self.detectors.len()
    }

    /// Observable bit carried by this graph in a logical flip mask.
    pub fn observable_bit(&self) -> u8 {
        match self.family {
            StabKind::Z => LOGICAL_Z_FLIP,
            StabKind::X => LOGICAL_X_FLIP,
        }
    }

    /// Edge list with global detector ids, one edge per line:
    /// `u v probability weight mask`, with `B` for the boundary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {}-graph nodes={} edges={} mask_conflicts={}",
            self.family.name(),
            self.num_nodes(),
            self.edges.len(),
            self.mask_conflicts
        );
        let _ = writeln!(s, "# u v probability weight mask");
        for e in &self.edges {
            let v = match e.v {
                Some(v) => self.detectors[v as usize].to_string(),
                None => "B".to_string(),
            };
            let _ = writeln!(
                s,
                "{} {} {:.10e} {:.10} {}",
                self.detectors[e.u as usize], v, e.probability, e.weight, e.observable as u8
            );
        }
        s
    }
}

#[derive(Default)]
struct Accumulator {
    /// Per endpoint pair: merged probability with observable 0 and with 1.
    edges: BTreeMap<(u32, u32), [f64; 2]>,
    undetectable: f64,
}

impl Accumulator {
    fn add(&mut self, nodes: &[u32], obs: bool, p: f64) {
        let key = match *nodes {
            [] => {
                if obs {
                    self.undetectable = merge_probability(self.undetectable, p);
                }
                return;
            }
            [u] => (u, INF),
            [a, b] => (a.min(b), a.max(b)),
            _ => unreachable!(),
        };
        let slot = &mut self.edges.entry(key).or_insert([0.0; 2])[obs as usize];
        *slot = merge_probability(*slot, p);
    }

    fn finish(self, family: StabKind, detectors: Vec<u32>) -> MatchingGraph {
        let mut mask_conflicts = 0;
        let edges = self
            .edges
            .into_iter()
            .map(|((u, v), [p0, p1])| {
                if p0 > 0.0 && p1 > 0.0 {
                    mask_conflicts += 1;
                }
                let probability = merge_probability(p0, p1);
                Edge {
                    u,
                    v: (v != INF).then_some(v),
                    probability,
                    weight: edge_weight(probability),
                    observable: p1 > p0,
                }
            })
            .collect();
        MatchingGraph {
            family,
            detectors,
            edges,
            mask_conflicts,
            undetectable: self.undetectable,
        }
    }
}

/// Builds the X-family and Z-family matching graphs of `circuit`.
pub fn build_graphs(circuit: &Circuit) -> Result<(MatchingGraph, MatchingGraph)> {
    let mechanisms = enumerate_fault_mechanisms(circuit);
    let effects = dem::mechanism_effects(circuit, &mechanisms);
    build_graphs_from(circuit, &mechanisms, &effects)
}

pub fn build_graphs_from(
    circuit: &Circuit,
    mechanisms: &[FaultMechanism],
    effects: &[Effect],
) -> Result<(MatchingGraph, MatchingGraph)> {
    let mut xs = Accumulator::default();
    let mut zs = Accumulator::default();
    for (i, (m, e)) in mechanisms.iter().zip(effects).enumerate() {
        if m.probability <= 0.0 {
            continue;
        }
        let mut xd: SmallVec<[u32; 4]> = SmallVec::new();
        let mut zd: SmallVec<[u32; 4]> = SmallVec::new();
        for &det in &e.detectors {
            match circuit.detector_family(det as usize) {
                (StabKind::X, local) => xd.push(local as u32),
                (StabKind::Z, local) => zd.push(local as u32),
            }
        }
        for (kind, nodes) in [(StabKind::X, &xd), (StabKind::Z, &zd)] {
            if nodes.len() > 2 {
                return Err(Error::NonGraphlike {
                    mechanism: i,
                    family: kind.name(),
                    count: nodes.len(),
                });
            }
        }
        xs.add(&xd, e.logical_mask & LOGICAL_X_FLIP != 0, m.probability);
        zs.add(&zd, e.logical_mask & LOGICAL_Z_FLIP != 0, m.probability);
    }
    let ids = |kind| {
        (0..circuit.family_size(kind))
            .map(|l| circuit.family_detector(kind, l) as u32)
            .collect::<Vec<_>>()
    };
    Ok((xs.finish(StabKind::X, ids(StabKind::X)), zs.finish(StabKind::Z, ids(StabKind::Z))))
}

/// Matching result for one defect set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub flip: bool,
    /// Sum of the integer path weights used.
    pub weight: u64,
    /// Matched pairs of family-local nodes; `None` is the boundary.
    pub pairs: Vec<(u32, Option<u32>)>,
}

/// Decoder for one matching graph, with lazily cached shortest paths.
///
/// Safe to share between threads.
#[derive(Debug)]
pub struct Decoder {
    graph: MatchingGraph,
    /// CSR adjacency over real nodes: (neighbour, weight, observable).
    offsets: Vec<u32>,
    adj: Vec<(u32, u32, bool)>,
    /// Per node: distance to the boundary with the path parity in bit 31.
    boundary: Vec<u32>,
    rows: Vec<OnceLock<Box<[u32]>>>,
}

struct HeapItem(Reverse<(u32, u32)>, bool);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

#[inline]
fn pack(dist: u32, parity: bool) -> u32 {
    if dist == INF {
        INF
    } else {
        dist | (parity as u32) << 31
    }
}

#[inline]
fn unpack(v: u32) -> Option<(u32, bool)> {
    (v != INF).then_some((v & !PARITY, v & PARITY != 0))
}

impl Decoder {
    pub fn new(graph: MatchingGraph) -> Self {
        let n = graph.num_nodes();
        let mut lists: Vec<Vec<(u32, u32, bool)>> = vec![Vec::new(); n];
        let mut boundary_edges = Vec::new();
        for e in &graph.edges {
            let w = e.int_weight();
            match e.v {
                Some(v) => {
                    lists[e.u as usize].push((v, w, e.observable));
                    lists[v as usize].push((e.u, w, e.observable));
                }
                None => boundary_edges.push((e.u, w, e.observable)),
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        offsets.push(0);
        for l in lists {
            adj.extend(l);
            offsets.push(adj.len() as u32);
        }
        let mut dec = Decoder {
            graph,
            offsets,
            adj,
            boundary: Vec::new(),
            rows: (0..n).map(|_| OnceLock::new()).collect(),
        };
        let seeds: Vec<(u32, u32, bool)> = boundary_edges;
        dec.boundary = dec.dijkstra(&seeds);
        dec
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    fn dijkstra(&self, seeds: &[(u32, u32, bool)]) -> Vec<u32> {
        let n = self.graph.num_nodes();
        let mut dist = vec![INF; n];
        let mut par = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(u, w, p) in seeds {
            if w < dist[u as usize] {
                dist[u as usize] = w;
                par[u as usize] = p;
                heap.push(HeapItem(Reverse((w, u)), p));
            }
        }
        while let Some(HeapItem(Reverse((d, u)), p)) = heap.pop() {
            let ui = u as usize;
            if d > dist[ui] || (d == dist[ui] && p != par[ui]) {
                continue;
            }
            for &(v, w, o) in &self.adj[self.offsets[ui] as usize..self.offsets[ui + 1] as usize] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    par[v as usize] = p ^ o;
                    heap.push(HeapItem(Reverse((nd, v)), p ^ o));
                }
            }
        }
        dist.iter().zip(&par).map(|(&d, &p)| pack(d, p)).collect()
    }

    fn row(&self, u: u32) -> &[u32] {
        self.rows[u as usize].get_or_init(|| self.dijkstra(&[(u, 0, false)]).into_boxed_slice())
    }

    /// Shortest-path weight and observable parity between two nodes.
    pub fn distance(&self, u: u32, v: u32) -> Option<(u32, bool)> {
        unpack(self.row(u)[v as usize])
    }

    pub fn boundary_distance(&self, u: u32) -> Option<(u32, bool)> {
        unpack(self.boundary[u as usize])
    }

    /// Predicted observable flip for a set of family-local defects.
    pub fn decode(&self, defects: &[u32]) -> Result<bool> {
        match defects.len() {
            0 => Ok(false),
            1 => self
                .boundary_distance(defects[0])
                .map(|(_, p)| p)
                .ok_or(Error::Disconnected(defects[0] as usize)),
            _ => Ok(self.decode_detailed(defects)?.flip),
        }
    }

    pub fn decode_detailed(&self, defects: &[u32]) -> Result<Matching> {
        let k = defects.len();
        let bound: Vec<Option<(u32, bool)>> =
            defects.iter().map(|&u| self.boundary_distance(u)).collect();
        let bcost = |i: usize| bound[i].map_or(u64::MAX / 4, |b| b.0 as u64);

        // Pairs worth considering, and clusters of defects they connect.
        let mut pairs: Vec<(usize, usize, u32, bool)> = Vec::new();
        let mut uf: Vec<usize> = (0..k).collect();
        fn find(uf: &mut [usize], mut a: usize) -> usize {
            while uf[a] != a {
                uf[a] = uf[uf[a]];
                a = uf[a];
            }
            a
        }
        for i in 0..k {
            let row = self.row(defects[i]);
            for j in i + 1..k {
                if let Some((d, p)) = unpack(row[defects[j] as usize]) {
                    if (d as u64) < bcost(i) + bcost(j) {
                        pairs.push((i, j, d, p));
                        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                        if a != b {
                            uf[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for i in 0..k {
            let r = find(&mut uf, i);
            members[r].push(i);
        }

        let mut out = Matching {
            flip: false,
            weight: 0,
            pairs: Vec::new(),
        };
        let to_boundary = |out: &mut Matching, i: usize| -> Result<()> {
            let (d, p) = bound[i].ok_or(Error::Disconnected(defects[i] as usize))?;
            out.flip ^= p;
            out.weight += d as u64;
            out.pairs.push((defects[i], None));
            Ok(())
        };
        for comp in members.iter().filter(|c| !c.is_empty()) {
            match comp.len() {
                1 => to_boundary(&mut out, comp[0])?,
                2 => {
                    let &(i, j, d, p) = pairs
                        .iter()
                        .find(|&&(i, j, ..)| i == comp[0] && j == comp[1])
                        .expect("two-defect cluster is joined by a pair");
                    out.flip ^= p;
                    out.weight += d as u64;
                    out.pairs.push((defects[i], Some(defects[j])));
                }
                m => {
                    let mut local = vec![usize::MAX; k];
                    for (a, &i) in comp.iter().enumerate() {
                        local[i] = a;
                    }
                    let mut edges = Vec::new();
                    for (a, &i) in comp.iter().enumerate() {
                        if let Some((d, _)) = bound[i] {
                            edges.push((a, m + a, d as i64));
                        }
                    }
                    let mut cluster_pairs = Vec::new();
                    for &(i, j, d, p) in &pairs {
                        if local[i] != usize::MAX {
                            let (a, b) = (local[i], local[j]);
                            edges.push((a, b, d as i64));
                            edges.push((m + a, m + b, 0));
                            cluster_pairs.push((a, b, d, p));
                        }
                    }
                    let mate = blossom::min_weight_perfect_matching(2 * m, &edges)
                        .ok_or(Error::Disconnected(defects[comp[0]] as usize))?;
                    for a in 0..m {
                        let b = mate[a];
                        if b == m + a {
                            to_boundary(&mut out, comp[a])?;
                        } else if b < m && a < b {
                            let &(_, _, d, p) = cluster_pairs
                                .iter()
                                .find(|&&(x, y, ..)| x == a && y == b)
                                .expect("matched pair is an edge");
                            out.flip ^= p;
                            out.weight += d as u64;
                            out.pairs.push((defects[comp[a]], Some(defects[comp[b]])));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Decoders for both families of one circuit.
#[derive(Debug)]
pub struct CircuitDecoder {
    pub x: Decoder,
    pub z: Decoder,
    /// Family and local index of every global detector.
    families: Vec<(StabKind, u32)>,
}

impl CircuitDecoder {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let (x, z) = build_graphs(circuit)?;
        Ok(Self::from_graphs(circuit, x, z))
    }

    pub fn from_graphs(circuit: &Circuit, x: MatchingGraph, z: MatchingGraph) -> Self {
        let families = (0..circuit.num_detectors())
            .map(|d| {
                let (k, l) = circuit.detector_family(d);
                (k, l as u32)
            })
            .collect();
        CircuitDecoder {
            x: Decoder::new(x),
            z: Decoder::new(z),
            families,
        }
    }

    /// Splits fired global detectors into X-family and Z-family defects.
    pub fn split(&self, fired: impl IntoIterator<Item = usize>) -> (Vec<u32>, Vec<u32>) {
        let (mut xd, mut zd) = (Vec::new(), Vec::new());
        for d in fired {
            match self.families[d] {
                (StabKind::X, l) => xd.push(l),
                (StabKind::Z, l) => zd.push(l),
            }
        }
        (xd, zd)
    }

    /// Predicted flip of the `basis` logical operator.
    pub fn decode_shot(&self, fired: impl IntoIterator<Item = usize>, basis: Basis) -> Result<bool> {
        let (xd, zd) = self.split(fired);
        self.decode_split(&xd, &zd, basis)
    }

    pub fn decode_split(&self, xd: &[u32], zd: &[u32], basis: Basis) -> Result<bool> {
        Ok(match basis {
            Basis::Z => self.z.decode(zd)?,
            Basis::X => self.x.decode(xd)?,
            Basis::Y => self.z.decode(zd)? ^ self.x.decode(xd)?,
        })
    }
}

/// Free-standing convenience wrapper; builds a fresh [`Decoder`] per call.
pub fn decode(graph: &MatchingGraph, defects: &[u32]) -> Result<bool> {
    Decoder::new(graph.clone()).decode(defects)
}

pub fn decode_shot(decoder: &CircuitDecoder, fired: &[usize], basis: Basis) -> Result<bool> {
    decoder.decode_shot(fired.iter().copied(), basis)
}

pub const DEFAULT_SEARCH_BUDGET: u128 = 50_000_000;

/// Smallest number of fault mechanisms whose combined effect is silent but
/// flips the circuit's logical observable, or `None` if none exists up to
/// `max_weight`.
pub fn fault_distance(circuit: &Circuit, max_weight: usize) -> Result<Option<usize>> {
    fault_distance_with_budget(circuit, max_weight, DEFAULT_SEARCH_BUDGET)
}

pub fn fault_distance_with_budget(circuit: &Circuit, max_weight: usize, budget: u128) -> Result<Option<usize>> {
    if max_weight == 0 {
        return Err(crate::error::invalid("max_weight", "must be at least 1"));
    }
    let basis = circuit.observable.basis;
    let mechanisms = enumerate_fault_mechanisms(circuit);
    let effects = dem::mechanism_effects(circuit, &mechanisms);
    let mut unique: HashSet<(SmallVec<[u32; 4]>, bool)> = HashSet::new();
    for (m, e) in mechanisms.iter().zip(&effects) {
        if m.probability > 0.0 {
            unique.insert((e.detectors.clone(), basis.is_flipped_by(e.logical_mask)));
        }
    }
    unique.remove(&(SmallVec::new(), false));
    if unique.contains(&(SmallVec::new(), true)) {
        return Ok(Some(1));
    }
    let mut items: Vec<(SmallVec<[u32; 4]>, bool)> = unique.into_iter().collect();
    items.sort();

    // Syndrome -> which observable values occur (bit 0: no flip, bit 1: flip).
    let mut by_syndrome: HashMap<&[u32], u8> = HashMap::new();
    for (dets, obs) in &items {
        *by_syndrome.entry(dets.as_slice()).or_default() |= 1 << (*obs as u8);
    }
    if max_weight >= 2 && by_syndrome.values().any(|&f| f == 3) {
        return Ok(Some(2));
    }

    let n = items.len();
    let as_effect = |i: usize| Effect {
        detectors: items[i].0.clone(),
        logical_mask: items[i].1 as u8,
    };
    for w in 3..=max_weight {
        if n < w - 1 {
            break;
        }
        let needed = binomial(n as u128, (w - 1) as u128);
        if needed > budget {
            return Err(Error::SearchBudget {
                weight: w,
                needed,
                budget,
            });
        }
        // Every (w-1)-subset, looked up against a single remaining effect.
        // Hits that reuse a subset member would be lighter solutions, which
        // the earlier weights already ruled out.
        let mut idx: Vec<usize> = (0..w - 1).collect();
        let mut found = false;
        'outer: loop {
            let mut acc = Effect::default();
            for &i in &idx {
                acc.xor_with(&as_effect(i));
            }
            if let Some(&flags) = by_syndrome.get(acc.detectors.as_slice()) {
                let want = 1 ^ acc.logical_mask;
                if flags >> want & 1 == 1 {
                    found = true;
                    break 'outer;
                }
            }
            // Next combination in lexicographic order.
            let mut i = w - 1;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                if idx[i] < n - (w - 1 - i) {
                    idx[i] += 1;
                    for j in i + 1..w - 1 {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
        if found {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}
