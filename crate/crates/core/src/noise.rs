//! Pauli error probabilities for idling, gate and readout noise.
//!
//! Idling is the Pauli-twirled amplitude and phase damping channel. Times
//! share whatever unit the caller picks; `t_phi` may be `f64::INFINITY`.

use crate::error::{invalid, Result};
use crate::pauli::Pauli;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t1: f64,
    pub t_phi: f64,
    /// Depolarizing probability after every gate.
    pub p: f64,
    /// Readout flip probability.
    pub q: f64,
    /// Total idling time of the memory experiment.
    pub total_time: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        positive("T1", self.t1)?;
        positive("Tphi", self.t_phi)?;
        positive("T", self.total_time)?;
        if self.total_time.is_infinite() {
            return Err(invalid("T", "must be finite"));
        }
        probability("p", self.p)?;
        if !(0.0..=0.5).contains(&self.q) {
            return Err(invalid("q", format!("must lie in [0, 1/2], got {}", self.q)));
        }
        Ok(())
    }

    pub fn t2(&self) -> f64 {
        t2_from(self.t1, self.t_phi).expect("validated")
    }

    /// Twirled idling channel over one round of a run with `rounds` rounds.
    pub fn idle_per_round(&self, rounds: usize) -> ChannelProbs {
        idling_probs(self.total_time / rounds as f64, self.t1, self.t2()).expect("validated")
    }

    /// Noise-free parameters (infinite coherence times, perfect gates and readout).
    pub fn noiseless(total_time: f64) -> Self {
        NoiseParams {
            t1: f64::INFINITY,
            t_phi: f64::INFINITY,
            p: 0.0,
            q: 0.0,
            total_time,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn probability(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Probabilities of I, X, Y, Z for a diagonal single-qubit Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProbs {
    pub p0: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl ChannelProbs {
    pub const IDENTITY: ChannelProbs = ChannelProbs {
        p0: 1.0,
        px: 0.0,
        py: 0.0,
        pz: 0.0,
    };

    pub fn error(&self) -> f64 {
        self.px + self.py + self.pz
    }

    pub fn get(&self, p: Pauli) -> f64 {
        match p {
            Pauli::I => self.p0,
            Pauli::X => self.px,
            Pauli::Y => self.py,
            Pauli::Z => self.pz,
        }
    }
}

/// `1/T2 = 1/(2 T1) + 1/Tphi`.
pub fn t2_from(t1: f64, t_phi: f64) -> Result<f64> {
    positive("T1", t1)?;
    positive("Tphi", t_phi)?;
    Ok(1.0 / (0.5 / t1 + 1.0 / t_phi))
}

/// Twirled amplitude/phase damping after idling for `t`.
pub fn idling_probs(t: f64, t1: f64, t2: f64) -> Result<ChannelProbs> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    positive("T1", t1)?;
    positive("T2", t2)?;
    // Tphi = inf gives T2 = 2 T1 up to rounding.
    if t2 > 2.0 * t1 * (1.0 + 1e-12) {
        return Err(invalid(
            "T2",
            format!("T2 = {t2} exceeds 2 T1 = {}; pz would be negative", 2.0 * t1),
        ));
    }
    let decay1 = -(-t / t1).exp_m1();
    let decay2 = -(-t / t2).exp_m1();
    let px = decay1 / 4.0;
    let pz = (decay2 / 2.0 - px).max(0.0);
    Ok(ChannelProbs {
        p0: 1.0 - 2.0 * px - pz,
        px,
        py: px,
        pz,
    })
}

pub fn depolarize1_probs(p: f64) -> Result<[(Pauli, f64); 3]> {
    probability("p", p)?;
    Ok(Pauli::NONTRIVIAL.map(|q| (q, p / 3.0)))
}

pub fn depolarize2_probs(p: f64) -> Result<[((Pauli, Pauli), f64); 15]> {
    probability("p", p)?;
    Ok(Pauli::nontrivial_pairs().map(|pq| (pq, p / 15.0)))
}

/// Classical readout flip of a ±1 outcome.
pub fn readout_flip<R: Rng + ?Sized>(m: i8, q: f64, rng: &mut R) -> i8 {
    if q > 0.0 && rng.gen::<f64>() < q {
        -m
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t2_examples() {
        assert!((t2_from(2.0, 12.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(t2_from(5.0, f64::INFINITY).unwrap(), 10.0);
        assert!((t2_from(20e-6, 120e-6).unwrap() - 30e-6).abs() < 1e-18);
        assert!(t2_from(0.0, 1.0).is_err());
        assert!(t2_from(1.0, -1.0).is_err());
    }

    #[test]
    fn idling_examples() {
        let c = idling_probs(0.0, 2.0, 3.0).unwrap();
        assert_eq!(c, ChannelProbs::IDENTITY);

        let c = idling_probs(1e6, 2.0, 3.0).unwrap();
        for v in [c.p0, c.px, c.py, c.pz] {
            assert!((v - 0.25).abs() < 1e-12);
        }

        let c = idling_probs(1.0 / 30.0, 2.0, 3.0).unwrap();
        // Quoted to 7 decimals; the exact value is 0.00413214.
        assert!((c.px - 0.0041322).abs() < 1e-7);
        assert_eq!(c.px, c.py);
        assert!((c.pz - 0.0013927).abs() < 5e-8);
    }

    #[test]
    fn rejects_unphysical_t2() {
        assert!(idling_probs(1.0, 1.0, 2.5).is_err());
        assert!(idling_probs(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn depolarizing() {
        assert!(depolarize1_probs(0.0).unwrap().iter().all(|&(_, v)| v == 0.0));
        for (_, v) in depolarize1_probs(0.006).unwrap() {
            assert!((v - 0.002).abs() < 1e-15);
        }
        for (_, v) in depolarize2_probs(0.006).unwrap() {
            assert!((v - 0.0004).abs() < 1e-15);
        }
        assert!(depolarize1_probs(1.5).is_err());
        assert!(depolarize2_probs(-0.1).is_err());
        let total: f64 = depolarize2_probs(0.3).unwrap().iter().map(|e| e.1).sum();
        assert!((total - 0.3).abs() < 1e-15);
        // X or Y on the first qubit: 8 of the 15 Paulis.
        let marginal: f64 = depolarize2_probs(0.006)
            .unwrap()
            .iter()
            .filter(|((a, _), _)| a.has_x())
            .map(|e| e.1)
            .sum();
        assert!((marginal - 8.0 * 0.006 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn readout() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| readout_flip(1, 0.0, &mut rng) == 1));
        let n = 1_000_000;
        let flips = (0..n).filter(|_| readout_flip(1, 0.02, &mut rng) == -1).count();
        let frac = flips as f64 / n as f64;
        assert!((frac - 0.02).abs() < 5e-4, "{frac}");
        let flips = (0..n).filter(|_| readout_flip(-1, 0.5, &mut rng) == 1).count();
        assert!((flips as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn params_validation() {
        let ok = NoiseParams {
            t1: 2.0,
            t_phi: 12.0,
            p: 0.006,
            q: 0.02,
            total_time: 1.0,
        };
        assert!(ok.validate().is_ok());
        assert!(NoiseParams { q: 0.6, ..ok }.validate().is_err());
        assert!(NoiseParams { p: -0.1, ..ok }.validate().is_err());
        assert!(NoiseParams { t1: 0.0, ..ok }.validate().is_err());
        assert!(NoiseParams { t_phi: f64::INFINITY, ..ok }.validate().is_ok());
        assert!(NoiseParams::noiseless(1.0).validate().is_ok());
    }

    proptest! {
        #[test]
        fn normalized_symmetric_physical(
            t in 0.0f64..50.0,
            t1 in 0.01f64..100.0,
            ratio in 0.01f64..=1.0,
        ) {
            let t2 = 2.0 * t1 * ratio;
            let c = idling_probs(t, t1, t2).unwrap();
            prop_assert!((c.p0 + c.px + c.py + c.pz - 1.0).abs() < 1e-12);
            prop_assert_eq!(c.px, c.py);
            prop_assert!(c.pz >= 0.0);
            for v in [c.p0, c.px, c.py, c.pz] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn monotone_in_time(
            t in 0.0f64..20.0,
            dt in 0.0f64..5.0,
            t1 in 0.1f64..10.0,
            ratio in 0.01f64..=1.0,
        ) {
            let t2 = 2.0 * t1 * ratio;
            let a = idling_probs(t, t1, t2).unwrap();
            let b = idling_probs(t + dt, t1, t2).unwrap();
            prop_assert!(b.px >= a.px);
            prop_assert!(b.error() >= a.error() - 1e-15);
        }
    }
}
