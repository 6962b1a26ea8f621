//! Direct integration of the single-qubit amplitude and phase damping master
//! equation, followed by a Pauli twirl of the resulting channel.

use num_complex::Complex64 as C;

type M = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);

fn mul(a: &M, b: &M) -> M {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn dagger(a: &M) -> M {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn axpy(a: &M, s: f64, b: &M) -> M {
    let mut r = *a;
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] += b[i][j] * s;
        }
    }
    r
}

fn trace(a: &M) -> C {
    a[0][0] + a[1][1]
}

/// `D[L](rho) = L rho L^dag - {L^dag L, rho} / 2`, summed over jump operators.
fn lindblad(jumps: &[M], rho: &M) -> M {
    let mut out = [[ZERO; 2]; 2];
    for l in jumps {
        let ld = dagger(l);
        let ldl = mul(&ld, l);
        out = axpy(&out, 1.0, &mul(&mul(l, rho), &ld));
        out = axpy(&out, -0.5, &mul(&ldl, rho));
        out = axpy(&out, -0.5, &mul(rho, &ldl));
    }
    out
}

fn evolve(jumps: &[M], rho: M, t: f64, steps: usize) -> M {
    let h = t / steps as f64;
    let mut r = rho;
    for _ in 0..steps {
        let k1 = lindblad(jumps, &r);
        let k2 = lindblad(jumps, &axpy(&r, h / 2.0, &k1));
        let k3 = lindblad(jumps, &axpy(&r, h / 2.0, &k2));
        let k4 = lindblad(jumps, &axpy(&r, h, &k3));
        r = axpy(&r, h / 6.0, &k1);
        r = axpy(&r, h / 3.0, &k2);
        r = axpy(&r, h / 3.0, &k3);
        r = axpy(&r, h / 6.0, &k4);
    }
    r
}

fn paulis() -> [M; 4] {
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    [
        [[o, ZERO], [ZERO, o]],
        [[ZERO, o], [o, ZERO]],
        [[ZERO, -i], [i, ZERO]],
        [[o, ZERO], [ZERO, -o]],
    ]
}

/// Twirled `(p0, px, py, pz)` after idling for `t`.
///
/// Jump operators are `sqrt(1/T1) |0><1|` and `sqrt(2/Tphi) |1><1|`, so the
/// coherence decays at `1/(2 T1) + 1/Tphi`.
pub fn twirled_channel(t: f64, t1: f64, t_phi: f64, steps: usize) -> [f64; 4] {
    let lower: M = [[ZERO, C::new((1.0 / t1).sqrt(), 0.0)], [ZERO, ZERO]];
    let mut jumps = vec![lower];
    if t_phi.is_finite() {
        jumps.push([[ZERO, ZERO], [ZERO, C::new((2.0 / t_phi).sqrt(), 0.0)]]);
    }
    let s = paulis();
    // Diagonal of the Pauli transfer matrix.
    let mut r = [0.0; 4];
    for k in 1..4 {
        let out = evolve(&jumps, s[k], t, steps);
        r[k] = 0.5 * trace(&mul(&s[k], &out)).re;
    }
    let (rx, ry, rz) = (r[1], r[2], r[3]);
    [
        (1.0 + rx + ry + rz) / 4.0,
        (1.0 + rx - ry - rz) / 4.0,
        (1.0 - rx + ry - rz) / 4.0,
        (1.0 - rx - ry + rz) / 4.0,
    ]
}
