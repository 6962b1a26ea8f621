use serde::Serialize;
use std::fmt;

/// Single-qubit Pauli operator, stored as its (x, z) symplectic bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// The 15 nontrivial two-qubit Paulis in lexicographic order (IX, IY, ..., ZZ).
    pub fn nontrivial_pairs() -> [(Pauli, Pauli); 15] {
        const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut out = [(Pauli::I, Pauli::I); 15];
        let mut k = 0;
        for a in ALL {
            for b in ALL {
                if a == Pauli::I && b == Pauli::I {
                    continue;
                }
                out[k] = (a, b);
                k += 1;
            }
        }
        out
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}
