//! Cross-module estimator properties at realistic scale: the window
//! estimator's unbiasedness band over many random instances, and the q = 0
//! behaviour of the scalar stream.

use attnsketch_core::attention::{sliding_window_attention_exact, SlidingWindowSpec};
use attnsketch_core::instances::build_benign;
use attnsketch_core::randkit::{chacha, derive_seed};
use attnsketch_core::sampling::ScalarStreamState;
use attnsketch_core::window::WindowEnsemble;
use rayon::prelude::*;

#[test]
fn window_estimator_unbiased_across_twenty_instances() {
    // 20 random instances, W alternating between 8 and 32, d cycling over
    // {2, 4, 8}: the mean of 1e5 independent draws stays within 3 standard
    // errors of the oracle on every coordinate.
    let master = 0x1234;
    let replicas = 100_000;
    let worst: Vec<f64> = (0..20usize)
        .into_par_iter()
        .map(|i| {
            let w = if i % 2 == 0 { 8 } else { 32 };
            let d = [2, 4, 8][i % 3];
            let n = 256;
            let spec = SlidingWindowSpec::new(w).unwrap();
            let stream = build_benign(n, d, derive_seed(master, i as u64)).unwrap().stream;
            let mut ensemble =
                WindowEnsemble::new(spec, d, replicas, derive_seed(master, 100 + i as u64))
                    .unwrap();
            for t in &stream {
                ensemble.process(t).unwrap();
            }
            let q = &stream[n - 1].q;
            let draws = ensemble.draw_all(q).unwrap();
            let exact = sliding_window_attention_exact(&stream, spec, n).unwrap();
            let mut worst_z: f64 = 0.0;
            for j in 0..d {
                let mean: f64 = draws.iter().map(|v| v[j]).sum::<f64>() / replicas as f64;
                let var: f64 = draws.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>()
                    / (replicas - 1) as f64;
                let se = (var / replicas as f64).sqrt();
                worst_z = worst_z.max((mean - exact[j]).abs() / se);
            }
            worst_z
        })
        .collect();
    for (i, z) in worst.iter().enumerate() {
        assert!(*z <= 3.0, "instance {i}: worst deviation {z:.2} SE");
    }
}

#[test]
fn scalar_stream_zero_query_gives_value_average() {
    // q = 0 zeroes every score, so sampling is uniform and the estimator's
    // mean over fresh states is the plain value average.
    let n = 40;
    let mut gen = chacha(77);
    let keys: Vec<f64> =
        (0..n).map(|_| attnsketch_core::randkit::standard_normal(&mut gen)).collect();
    let vals: Vec<f64> = (0..n).map(|i| (i as f64) * 0.25).collect();
    let avg = vals.iter().sum::<f64>() / n as f64;
    let runs = 20_000;
    let sum: f64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = chacha(derive_seed(123, r as u64));
            let mut st = ScalarStreamState::new();
            for i in 0..n {
                st.update_scalars(keys[i], vals[i], &mut rng);
            }
            st.query(0.0, &mut rng).unwrap()
        })
        .sum();
    let mean = sum / runs as f64;
    // sd of a uniform draw over the values is ~2.88
    let se = 2.89 / (runs as f64).sqrt();
    assert!((mean - avg).abs() <= 4.0 * se, "mean {mean}, avg {avg}");
}
