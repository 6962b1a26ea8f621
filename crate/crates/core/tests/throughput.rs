use std::time::Instant;
use surfmem::circuit::Basis;
use surfmem::estimator::Experiment;
use surfmem::frame::FrameSampler;
use surfmem::noise::NoiseParams;

#[test]
fn d9_sampler_rate() {
    let noise = NoiseParams {
        t1: 2.0,
        t_phi: 12.0,
        p: 0.006,
        q: 0.02,
        total_time: 1.0,
    };
    let exp = Experiment::new(9, 30, noise).unwrap();
    let sampler = FrameSampler::new(exp.circuit(Basis::Z));
    let blocks = 80;
    let start = Instant::now();
    let mut fired = 0u64;
    for b in 0..blocks {
        let s = sampler.sample_block(3, 0, b, 256);
        fired += s.detectors.iter().map(|w| w.count_ones() as u64).sum::<u64>();
    }
    let rate = (blocks * 256) as f64 / start.elapsed().as_secs_f64();
    eprintln!("d=9 N=30: {rate:.0} shots/s ({fired} detector events)");
    assert!(rate >= 1e4, "{rate:.0} shots/s");
}
