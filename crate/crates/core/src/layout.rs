//! Geometry of the distance-`d` rotated surface code patch.
//!
//! Coordinates are in half-steps: data qubit `(r, c)` of the `d x d` grid sits
//! at `Coord { row: 2r, col: 2c }` and the ancilla of the face whose top-left
//! corner is data `(i, j)` sits at `Coord { row: 2i + 1, col: 2j + 1 }`, with
//! `i, j` ranging over `-1..d`. Faces are coloured as a checkerboard: `(i + j)`
//! even is an X face. Weight-2 X faces live on the top and bottom edges and
//! weight-2 Z faces on the left and right edges, so `Z_L` runs along the top
//! row and `X_L` down the left column.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coord {
    pub row: i32,
    pub col: i32,
}

impl Coord {
    pub const fn new(row: i32, col: i32) -> Self {
        Coord { row, col }
    }

    pub fn is_data(self) -> bool {
        self.row % 2 == 0 && self.col % 2 == 0
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabKind {
    X,
    Z,
}

impl StabKind {
    pub fn name(self) -> &'static str {
        match self {
            StabKind::X => "X",
            StabKind::Z => "Z",
        }
    }
}

/// Corner of a face, in reading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corner {
    NW,
    NE,
    SW,
    SE,
}

impl Corner {
    const ALL: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SW, Corner::SE];

    fn offset(self) -> (i32, i32) {
        match self {
            Corner::NW => (0, 0),
            Corner::NE => (0, 1),
            Corner::SW => (1, 0),
            Corner::SE => (1, 1),
        }
    }
}

/// Order in which each stabilizer's CNOTs visit the corners of its face.
///
/// `HookSafe` is the zig-zag pattern: X faces go NW, NE, SW, SE and Z faces go
/// NW, SW, NE, SE. A fault on an ancilla halfway through then spreads to a
/// pair of data qubits lying perpendicular to the matching logical operator.
/// `HookAligned` swaps the two patterns, which is still a valid measurement
/// circuit but lines the hook errors up with the logicals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CnotOrder {
    #[default]
    HookSafe,
    HookAligned,
}

impl CnotOrder {
    /// Time slot (1..=4) at which a face of `kind` touches `corner`.
    pub fn slot(self, kind: StabKind, corner: Corner) -> u8 {
        let z_shape = |c: Corner| match c {
            Corner::NW => 1,
            Corner::NE => 2,
            Corner::SW => 3,
            Corner::SE => 4,
        };
        let n_shape = |c: Corner| match c {
            Corner::NW => 1,
            Corner::SW => 2,
            Corner::NE => 3,
            Corner::SE => 4,
        };
        match (self, kind) {
            (CnotOrder::HookSafe, StabKind::X) | (CnotOrder::HookAligned, StabKind::Z) => {
                z_shape(corner)
            }
            (CnotOrder::HookSafe, StabKind::Z) | (CnotOrder::HookAligned, StabKind::X) => {
                n_shape(corner)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizerSpec {
    pub kind: StabKind,
    pub ancilla: Coord,
    /// Support qubits sorted by schedule slot.
    pub support: Vec<Coord>,
    /// `schedule_slots[i]` is the slot (1..=4) of `support[i]`.
    pub schedule_slots: Vec<u8>,
}

impl StabilizerSpec {
    pub fn weight(&self) -> usize {
        self.support.len()
    }
}

/// One CNOT of the syndrome-extraction schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScheduledCnot {
    /// Global stabilizer index: X stabilizers first, then Z stabilizers.
    pub stabilizer: usize,
    pub kind: StabKind,
    /// Index into [`PatchLayout::data`].
    pub data: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchLayout {
    pub d: usize,
    pub order: CnotOrder,
    /// Data qubits in row-major order.
    pub data: Vec<Coord>,
    pub x_stabs: Vec<StabilizerSpec>,
    pub z_stabs: Vec<StabilizerSpec>,
    /// Top row.
    pub z_logical: Vec<Coord>,
    /// Left column.
    pub x_logical: Vec<Coord>,
}

/// Builds the patch with the hook-safe CNOT order.
pub fn build_patch(d: usize) -> Result<PatchLayout> {
    build_patch_with_order(d, CnotOrder::HookSafe)
}

pub fn build_patch_with_order(d: usize, order: CnotOrder) -> Result<PatchLayout> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    let di = d as i32;
    let data: Vec<Coord> = (0..di)
        .flat_map(|r| (0..di).map(move |c| Coord::new(2 * r, 2 * c)))
        .collect();

    let mut x_stabs = Vec::new();
    let mut z_stabs = Vec::new();
    for i in -1..di {
        for j in -1..di {
            let kind = if (i + j).rem_euclid(2) == 0 {
                StabKind::X
            } else {
                StabKind::Z
            };
            let top_or_bottom = i == -1 || i == di - 1;
            let left_or_right = j == -1 || j == di - 1;
            if top_or_bottom && left_or_right {
                continue;
            }
            // Boundary faces only exist in the colour of that boundary.
            if top_or_bottom && kind != StabKind::X {
                continue;
            }
            if left_or_right && kind != StabKind::Z {
                continue;
            }
            let mut corners: Vec<(u8, Coord)> = Corner::ALL
                .iter()
                .filter_map(|&corner| {
                    let (dr, dc) = corner.offset();
                    let (r, c) = (i + dr, j + dc);
                    ((0..di).contains(&r) && (0..di).contains(&c))
                        .then(|| (order.slot(kind, corner), Coord::new(2 * r, 2 * c)))
                })
                .collect();
            corners.sort_by_key(|&(slot, _)| slot);
            let spec = StabilizerSpec {
                kind,
                ancilla: Coord::new(2 * i + 1, 2 * j + 1),
                support: corners.iter().map(|&(_, c)| c).collect(),
                schedule_slots: corners.iter().map(|&(s, _)| s).collect(),
            };
            match kind {
                StabKind::X => x_stabs.push(spec),
                StabKind::Z => z_stabs.push(spec),
            }
        }
    }

    let z_logical = (0..di).map(|c| Coord::new(0, 2 * c)).collect();
    let x_logical = (0..di).map(|r| Coord::new(2 * r, 0)).collect();
    Ok(PatchLayout {
        d,
        order,
        data,
        x_stabs,
        z_stabs,
        z_logical,
        x_logical,
    })
}

impl PatchLayout {
    pub fn num_data(&self) -> usize {
        self.d * self.d
    }

    pub fn num_stabilizers(&self) -> usize {
        self.x_stabs.len() + self.z_stabs.len()
    }

    /// Row-major index of a data coordinate.
    pub fn data_index(&self, c: Coord) -> usize {
        debug_assert!(c.is_data());
        (c.row as usize / 2) * self.d + c.col as usize / 2
    }

    /// Stabilizers in global order: X stabilizers, then Z stabilizers.
    pub fn stabilizers(&self) -> impl Iterator<Item = &StabilizerSpec> {
        self.x_stabs.iter().chain(self.z_stabs.iter())
    }

    pub fn stabilizer(&self, index: usize) -> &StabilizerSpec {
        if index < self.x_stabs.len() {
            &self.x_stabs[index]
        } else {
            &self.z_stabs[index - self.x_stabs.len()]
        }
    }

    pub fn support_indices(&self, index: usize) -> Vec<usize> {
        self.stabilizer(index)
            .support
            .iter()
            .map(|&c| self.data_index(c))
            .collect()
    }

    pub fn z_logical_indices(&self) -> Vec<usize> {
        self.z_logical.iter().map(|&c| self.data_index(c)).collect()
    }

    pub fn x_logical_indices(&self) -> Vec<usize> {
        self.x_logical.iter().map(|&c| self.data_index(c)).collect()
    }

    /// The four CNOT layers of one syndrome-extraction round.
    pub fn cnot_schedule(&self) -> [Vec<ScheduledCnot>; 4] {
        let mut steps: [Vec<ScheduledCnot>; 4] = Default::default();
        for (s, stab) in self.stabilizers().enumerate() {
            for (&coord, &slot) in stab.support.iter().zip(&stab.schedule_slots) {
                steps[slot as usize - 1].push(ScheduledCnot {
                    stabilizer: s,
                    kind: stab.kind,
                    data: self.data_index(coord),
                });
            }
        }
        steps
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "order": self.order,
            "data": self.data,
            "x_stabs": self.x_stabs,
            "z_stabs": self.z_stabs,
            "z_logical": self.z_logical,
            "x_logical": self.x_logical,
            "schedule": self.cnot_schedule(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn overlap(a: &[Coord], b: &[Coord]) -> usize {
        a.iter().filter(|c| b.contains(c)).count()
    }

    #[test]
    fn stabilizer_counts() {
        for (d, nx) in [(3, 4), (5, 12), (7, 24), (9, 40)] {
            let p = build_patch(d).unwrap();
            assert_eq!(p.data.len(), d * d);
            assert_eq!(p.x_stabs.len(), nx);
            assert_eq!(p.z_stabs.len(), nx);
            assert_eq!(p.num_stabilizers(), d * d - 1);
        }
    }

    #[test]
    fn rejects_bad_distance() {
        for d in [0, 1, 2, 4, 6] {
            assert_eq!(build_patch(d), Err(Error::InvalidDistance(d)));
        }
    }

    #[test]
    fn logicals() {
        for d in [3, 5, 7, 9] {
            let p = build_patch(d).unwrap();
            assert_eq!(p.z_logical.len(), d);
            assert_eq!(p.x_logical.len(), d);
            assert_eq!(overlap(&p.z_logical, &p.x_logical), 1);
            assert!(p.z_logical.contains(&Coord::new(0, 0)));
            for s in &p.x_stabs {
                assert_eq!(overlap(&s.support, &p.z_logical) % 2, 0);
            }
            for s in &p.z_stabs {
                assert_eq!(overlap(&s.support, &p.x_logical) % 2, 0);
            }
        }
    }

    #[test]
    fn coordinates_disjoint_and_bounded() {
        let p = build_patch(5).unwrap();
        let data: HashSet<_> = p.data.iter().copied().collect();
        for s in p.stabilizers() {
            assert!(!data.contains(&s.ancilla));
            assert!((-1..=9).contains(&s.ancilla.row) && (-1..=9).contains(&s.ancilla.col));
            assert!(s.weight() == 2 || s.weight() == 4);
        }
    }

    #[test]
    fn stabilizers_commute() {
        for d in [3, 5, 7, 9] {
            let p = build_patch(d).unwrap();
            for a in &p.x_stabs {
                for b in &p.z_stabs {
                    assert_eq!(overlap(&a.support, &b.support) % 2, 0);
                }
            }
        }
    }

    #[test]
    fn boundary_weight_two_placement() {
        let p = build_patch(5).unwrap();
        for s in &p.x_stabs {
            if s.weight() == 2 {
                assert!(s.ancilla.row == -1 || s.ancilla.row == 9);
            }
        }
        for s in &p.z_stabs {
            if s.weight() == 2 {
                assert!(s.ancilla.col == -1 || s.ancilla.col == 9);
            }
        }
    }

    #[test]
    fn data_qubit_membership() {
        for d in [3, 5, 7, 9] {
            let p = build_patch(d).unwrap();
            let last = 2 * (d as i32 - 1);
            for &q in &p.data {
                let nx = p.x_stabs.iter().filter(|s| s.support.contains(&q)).count();
                let nz = p.z_stabs.iter().filter(|s| s.support.contains(&q)).count();
                let on_row_edge = q.row == 0 || q.row == last;
                let on_col_edge = q.col == 0 || q.col == last;
                match (on_row_edge, on_col_edge) {
                    (true, true) => assert_eq!(nx + nz, 2),
                    (false, false) => assert_eq!((nx, nz), (2, 2)),
                    _ => assert_eq!(nx + nz, 3),
                }
            }
        }
    }

    #[test]
    fn logical_representatives_stay_logical() {
        let p = build_patch(5).unwrap();
        for s in &p.z_stabs {
            let mut rep: Vec<Coord> = p.z_logical.clone();
            for c in &s.support {
                if let Some(i) = rep.iter().position(|x| x == c) {
                    rep.remove(i);
                } else {
                    rep.push(*c);
                }
            }
            for x in &p.x_stabs {
                assert_eq!(overlap(&rep, &x.support) % 2, 0);
            }
            assert_eq!(overlap(&rep, &p.x_logical) % 2, 1);
        }
    }

    #[test]
    fn schedule_shape() {
        let p = build_patch(3).unwrap();
        let steps = p.cnot_schedule();
        assert_eq!(steps.len(), 4);
        assert_eq!(steps.iter().map(Vec::len).sum::<usize>(), 24);
        for order in [CnotOrder::HookSafe, CnotOrder::HookAligned] {
            for d in [3, 5, 7] {
                let p = build_patch_with_order(d, order).unwrap();
                for step in p.cnot_schedule() {
                    let mut seen = HashSet::new();
                    for g in &step {
                        assert!(seen.insert(("d", g.data)), "data reused in a step");
                        assert!(seen.insert(("a", g.stabilizer)), "ancilla reused in a step");
                    }
                }
                for (s, stab) in p.stabilizers().enumerate() {
                    let n = p
                        .cnot_schedule()
                        .iter()
                        .flatten()
                        .filter(|g| g.stabilizer == s)
                        .count();
                    assert_eq!(n, stab.weight());
                }
            }
        }
    }

    #[test]
    fn hook_direction() {
        // The last two qubits touched by a face are where an ancilla fault
        // after the second CNOT lands.
        let p = build_patch(5).unwrap();
        for s in p.x_stabs.iter().filter(|s| s.weight() == 4) {
            assert_eq!(s.support[2].row, s.support[3].row, "X hooks are horizontal");
        }
        for s in p.z_stabs.iter().filter(|s| s.weight() == 4) {
            assert_eq!(s.support[2].col, s.support[3].col, "Z hooks are vertical");
        }
    }
}
