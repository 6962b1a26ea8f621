mod common;

use common::lindblad::twirled_channel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfmem::noise::{idling_probs, t2_from};

#[test]
fn twirled_master_equation_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..10 {
        let t1 = rng.gen_range(0.5..5.0);
        let t_phi = if i == 0 { f64::INFINITY } else { rng.gen_range(0.5..50.0) };
        let t = rng.gen_range(0.01..3.0);
        let want = idling_probs(t, t1, t2_from(t1, t_phi).unwrap()).unwrap();
        let got = twirled_channel(t, t1, t_phi, 2000);
        let want = [want.p0, want.px, want.py, want.pz];
        for k in 0..4 {
            assert!((got[k] - want[k]).abs() < 1e-6, "t={t} T1={t1} Tphi={t_phi}: {got:?} vs {want:?}");
        }
    }
}
