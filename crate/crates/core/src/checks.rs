//! Statistical check suites shared by the CLI `check` subcommand and the
//! acceptance test target.
//!
//! Every check is deterministic given its master seed: trial seeds derive
//! from the index, so parallel execution order cannot change an outcome.

use rayon::prelude::*;

use crate::attention::{
    attention_as_expectation, exact_attention, sliding_window_attention_exact, KvCache,
    SlidingWindowSpec,
};
use crate::cluster::{covering_formula, greedy_cluster};
use crate::error::Result;
use crate::instances::{
    build_benign, build_index_instance, build_time_family, build_time_sigma,
    build_window_instance, decode_instance, BitMatrix, OracleNoise,
};
use crate::jl::{ceil_snapped, dim_for, verify_pairwise, JlProjector};
use crate::randkit::{chacha, derive_seed, sample_unit_ball, standard_normal, uniform_open01};
use crate::sampling::{lazy_gumbel_sample, ScalarStreamState};
use crate::vector::Vector;
use crate::window::{boost_config, boosted_estimate, WindowEnsemble};
use rand::Rng;

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome { name, passed, detail }
    }
}

/// Default parameters for the full-scale suites; the acceptance tests pin
/// the same values explicitly.
pub mod defaults {
    pub const MASTER_SEED: u64 = 0xa77_e57;

    pub const EQ3_STREAMS: usize = 50;
    pub const EQ3_MAX_N: usize = 256;
    pub const EQ3_MAX_D: usize = 16;
    pub const EQ3_TOL: f64 = 1e-9;

    pub const UNBIASED_N: usize = 512;
    pub const UNBIASED_W: usize = 32;
    pub const UNBIASED_D: usize = 8;
    pub const UNBIASED_REPLICAS: usize = 100_000;
    pub const UNBIASED_SEEDS: usize = 10;

    pub const SPACE_N: usize = 100_000;
    pub const SPACE_WIDTHS: [usize; 2] = [8, 256];

    pub const BOOST_N: usize = 512;
    pub const BOOST_W: usize = 32;
    pub const BOOST_D: usize = 4;
    pub const BOOST_EPS: f64 = 0.1;
    pub const BOOST_DELTA: f64 = 0.05;
    pub const BOOST_VMAX: f64 = 2.0;
    pub const BOOST_MLB: f64 = 1.0;
    pub const BOOST_TRIALS: usize = 100;
    pub const BOOST_NEED: usize = 95;

    pub const LAZY_SETS: usize = 20;
    pub const LAZY_N: usize = 256;
    pub const LAZY_K: usize = 16;
    pub const LAZY_SAMPLES: usize = 100_000;
    pub const LAZY_TV_MAX: f64 = 0.02;
    pub const LAZY_PROBE_FACTOR: f64 = 4.0;

    pub const SCALAR_N: usize = 256;
    pub const SCALAR_RUNS: usize = 10_000;
    pub const SCALAR_SPACE_FACTOR: f64 = 8.0;

    pub const JL_N: usize = 64;
    pub const JL_EPS: f64 = 0.3;
    pub const JL_SEEDS: usize = 640;

    pub const DECODE_N: usize = 16;
    pub const DECODE_EPS: f64 = 0.1;
    pub const DECODE_SEEDS: usize = 100;
    pub const DECODE_ETA: f64 = 0.5;

    pub const WDECODE_N: usize = 64;
    pub const WDECODE_W: usize = 8;
    pub const WDECODE_EPS: f64 = 0.1;
    pub const WDECODE_SEEDS: usize = 100;

    pub const TIME_N: usize = 16;
    pub const TIME_D: usize = 4;

    pub const CLUSTER_DIMS: [u32; 5] = [1, 2, 3, 4, 5];
    pub const CLUSTER_POINTS: usize = 1000;
    pub const CLUSTER_TRIALS: usize = 100;
    pub const CLUSTER_NEED: usize = 95;
}

/// Exact attention must equal the expectation of values under the softmax
/// distribution, per coordinate, on random streams.
pub fn expectation_consistency(
    streams: usize,
    max_n: usize,
    max_d: usize,
    tol: f64,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let mut max_dev: f64 = 0.0;
    for s in 0..streams {
        let mut rng = chacha(derive_seed(master_seed, s as u64));
        let n = rng.random_range(2..=max_n);
        let d = rng.random_range(1..=max_d);
        let mut cache = KvCache::new(d)?;
        for _ in 0..n {
            let k = Vector::new((0..d).map(|_| standard_normal(&mut rng)).collect())?;
            let v = Vector::new((0..d).map(|_| standard_normal(&mut rng)).collect())?;
            cache.append(k, v)?;
        }
        let q = Vector::new((0..d).map(|_| standard_normal(&mut rng)).collect())?;
        let direct = exact_attention(&cache, &q)?;
        let dist = attention_as_expectation(&cache, &q)?;
        let via_dist = dist.expectation(cache.values())?;
        for j in 0..d {
            max_dev = max_dev.max((direct[j] - via_dist[j]).abs());
        }
    }
    Ok(CheckOutcome::new(
        "eq3",
        max_dev <= tol,
        format!("{streams} streams, max coordinate deviation {max_dev:.3e} (tol {tol:.1e})"),
    ))
}

/// Mean of independent estimator draws must sit within 3 standard errors of
/// exact sliding-window attention on every coordinate, per seed.
pub fn window_unbiasedness(
    n: usize,
    w: usize,
    d: usize,
    replicas: usize,
    seeds: usize,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let spec = SlidingWindowSpec::new(w)?;
    let results: Vec<Result<f64>> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let stream = build_benign(n, d, derive_seed(master_seed, s as u64))?.stream;
            let mut ensemble =
                WindowEnsemble::new(spec, d, replicas, derive_seed(master_seed, 1000 + s as u64))?;
            for t in &stream {
                ensemble.process(t)?;
            }
            let q = &stream[n - 1].q;
            let draws = ensemble.draw_all(q)?;
            let exact = sliding_window_attention_exact(&stream, spec, n)?;
            let mut worst_z: f64 = 0.0;
            for j in 0..d {
                let mean: f64 = draws.iter().map(|v| v[j]).sum::<f64>() / replicas as f64;
                let var: f64 = draws.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>()
                    / (replicas - 1) as f64;
                let se = (var / replicas as f64).sqrt();
                worst_z = worst_z.max((mean - exact[j]).abs() / se);
            }
            Ok(worst_z)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(CheckOutcome::new(
        "window-unbiased",
        worst <= 3.0,
        format!(
            "{seeds} seeds x {replicas} draws (n={n}, W={w}, d={d}): worst |mean-exact| = {worst:.2} SE (limit 3)"
        ),
    ))
}

/// The window state must never retain more than 2W + 1 vectors.
pub fn window_space(n: usize, widths: &[usize], master_seed: u64) -> Result<CheckOutcome> {
    let d = 4;
    let mut detail = String::new();
    for (i, &w) in widths.iter().enumerate() {
        let spec = SlidingWindowSpec::new(w)?;
        let mut rng = chacha(derive_seed(master_seed, i as u64));
        let mut state = crate::window::WindowState::new(spec, d)?;
        let stream = build_benign(n, d, derive_seed(master_seed, 100 + i as u64))?.stream;
        let mut max_stored = 0;
        for t in &stream {
            // process() itself asserts the bound after every update
            state.process(t, &mut rng)?;
            max_stored = max_stored.max(state.stored_vector_count());
        }
        if max_stored > 2 * w + 1 {
            return Ok(CheckOutcome::new(
                "window-space",
                false,
                format!("W={w}: stored {max_stored} > {}", 2 * w + 1),
            ));
        }
        detail.push_str(&format!("W={w}: max stored {max_stored} <= {}; ", max_stored.max(2 * w + 1)));
    }
    detail.push_str(&format!("{n} updates each"));
    Ok(CheckOutcome::new("window-space", true, detail))
}

/// Median-of-means boosting must reach relative error eps on all coordinates
/// in at least `need` of `trials` independent runs.
#[allow(clippy::too_many_arguments)]
pub fn boosting(
    n: usize,
    w: usize,
    d: usize,
    eps: f64,
    delta: f64,
    v_max: f64,
    mean_lower_bound: f64,
    trials: usize,
    need: usize,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let cfg = boost_config(eps, delta, v_max, mean_lower_bound)?;
    let spec = SlidingWindowSpec::new(w)?;
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let stream = build_benign(n, d, derive_seed(master_seed, t as u64))?.stream;
            let mut ensemble = WindowEnsemble::new(
                spec,
                d,
                cfg.replicas(),
                derive_seed(master_seed, 10_000 + t as u64),
            )?;
            for triple in &stream {
                ensemble.process(triple)?;
            }
            let q = &stream[n - 1].q;
            let estimate = boosted_estimate(&mut ensemble, q, &cfg)?;
            let exact = sliding_window_attention_exact(&stream, spec, n)?;
            let ok = (0..d).all(|j| {
                exact[j].abs() < mean_lower_bound
                    || (estimate[j] - exact[j]).abs() <= eps * exact[j].abs()
            });
            Ok(ok)
        })
        .collect();
    let mut passes = 0;
    for o in outcomes {
        if o? {
            passes += 1;
        }
    }
    Ok(CheckOutcome::new(
        "boost",
        passes >= need,
        format!(
            "T={}, Q={}: {passes}/{trials} trials within {eps} relative error (need {need})",
            cfg.t_inner, cfg.q_outer
        ),
    ))
}

/// Lazy Gumbel draws must match the exact softmax within `tv_max` total
/// variation and probe at most `probe_factor * sqrt(n)` tail scores on
/// average.
#[allow(clippy::too_many_arguments)]
pub fn lazy_gumbel(
    sets: usize,
    n: usize,
    k: usize,
    samples: usize,
    tv_max: f64,
    probe_factor: f64,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let results: Vec<Result<(f64, f64)>> = (0..sets)
        .into_par_iter()
        .map(|s| -> Result<(f64, f64)> {
            let mut rng = chacha(derive_seed(master_seed, s as u64));
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let top: Vec<(usize, f64)> = order[..k].iter().map(|&i| (i, scores[i])).collect();
            let exact = crate::attention::softmax(&scores)?;
            let mut counts = vec![0u64; n];
            let mut probes = 0usize;
            for _ in 0..samples {
                let draw = lazy_gumbel_sample(&top, |i| scores[i], n, &mut rng)?;
                counts[draw.index] += 1;
                probes += draw.tail_probes;
            }
            let tv: f64 = counts
                .iter()
                .zip(exact.weights())
                .map(|(&c, &p)| (c as f64 / samples as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            Ok((tv, probes as f64 / samples as f64))
        })
        .collect();
    let mut worst_tv: f64 = 0.0;
    let mut worst_probes: f64 = 0.0;
    for r in results {
        let (tv, probes) = r?;
        worst_tv = worst_tv.max(tv);
        worst_probes = worst_probes.max(probes);
    }
    let probe_limit = probe_factor * (n as f64).sqrt();
    Ok(CheckOutcome::new(
        "lazy-gumbel",
        worst_tv <= tv_max && worst_probes <= probe_limit,
        format!(
            "{sets} sets (n={n}, k={k}): worst TV {worst_tv:.4} (limit {tv_max}), worst mean probes {worst_probes:.1} (limit {probe_limit:.0})"
        ),
    ))
}

/// The d = 1 streaming estimator must be unbiased (3 SE band over fresh-state
/// runs) and hold at most `space_factor * sqrt(n)` scalars.
pub fn scalar_stream(
    n: usize,
    runs: usize,
    space_factor: f64,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let mut gen = chacha(derive_seed(master_seed, 0));
    let keys: Vec<f64> = (0..n).map(|_| standard_normal(&mut gen)).collect();
    let vals: Vec<f64> = (0..n).map(|_| uniform_open01(&mut gen)).collect();
    let mut cache = KvCache::new(1)?;
    for i in 0..n {
        cache.append(Vector::new(vec![keys[i]])?, Vector::new(vec![vals[i]])?)?;
    }
    let mut detail = String::new();
    let mut passed = true;
    let mut max_scalars = 0usize;
    for (qi, q) in [0.9, -0.7].into_iter().enumerate() {
        let exact = exact_attention(&cache, &Vector::new(vec![q])?)?[0];
        let sums: Vec<Result<(f64, f64, usize)>> = (0..runs)
            .into_par_iter()
            .map(|r| -> Result<(f64, f64, usize)> {
                let mut rng =
                    chacha(derive_seed(master_seed, 1 + (qi * runs + r) as u64));
                let mut st = ScalarStreamState::new();
                for i in 0..n {
                    st.update_scalars(keys[i], vals[i], &mut rng);
                }
                let est = st.query(q, &mut rng)?;
                Ok((est, est * est, st.stored_scalars()))
            })
            .collect();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for s in sums {
            let (e, e2, stored) = s?;
            sum += e;
            sum_sq += e2;
            max_scalars = max_scalars.max(stored);
        }
        let mean = sum / runs as f64;
        let var = (sum_sq / runs as f64 - mean * mean).max(0.0);
        let se = (var / runs as f64).sqrt();
        let z = (mean - exact).abs() / se;
        if z > 3.0 {
            passed = false;
        }
        detail.push_str(&format!("q={q}: |mean-exact| = {z:.2} SE; "));
    }
    let limit = space_factor * (n as f64).sqrt();
    if max_scalars as f64 > limit {
        passed = false;
    }
    detail.push_str(&format!("max stored scalars {max_scalars} (limit {limit:.0})"));
    Ok(CheckOutcome::new("scalar-stream", passed, detail))
}

/// Full pairwise preservation at the dimension bound must hold in at least a
/// 1 - 2/n fraction of seeds.
pub fn jl_preservation(n: usize, eps: f64, seeds: usize, master_seed: u64) -> Result<CheckOutcome> {
    let d = dim_for(n, eps)?;
    let points: Vec<Vector> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            Vector::new(v)
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<Result<bool>> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<bool> {
            let proj = JlProjector::new(derive_seed(master_seed, s as u64), n, d)?;
            let projected: Vec<Vector> =
                (0..n).map(|i| proj.project_basis(i)).collect::<Result<_>>()?;
            Ok(verify_pairwise(&points, &projected, eps)?.passed)
        })
        .collect();
    let mut passes = 0;
    for o in outcomes {
        if o? {
            passes += 1;
        }
    }
    let need = ((1.0 - 2.0 / n as f64) * seeds as f64).ceil() as usize;
    Ok(CheckOutcome::new(
        "jl",
        passes >= need,
        format!("d={d}: {passes}/{seeds} seeds preserved all pairs (need {need})"),
    ))
}

/// Index-reduction decoding: on every projection-verified seed all planted
/// bits decode, and decode failures only ever occur on projection failures.
pub fn index_decode(
    n: usize,
    eps: f64,
    eta: f64,
    noise: OracleNoise,
    seeds: usize,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let d = dim_for(n, eps)?;
    let outcomes: Vec<Result<(bool, bool)>> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<(bool, bool)> {
            let mut rng = chacha(derive_seed(master_seed, 500_000 + s as u64));
            let x = BitMatrix::random(n, d, &mut rng)?;
            let inst = build_index_instance(&x, eps, derive_seed(master_seed, s as u64))?;
            let report = decode_instance(&inst, eta, noise)?;
            Ok((report.jl_passed, report.all_correct()))
        })
        .collect();
    let mut jl_passes = 0;
    let mut violations = 0;
    for o in outcomes {
        let (jl_ok, decoded) = o?;
        if jl_ok {
            jl_passes += 1;
            if !decoded {
                violations += 1;
            }
        }
        // decode failure on a JL-failure seed is allowed
    }
    let name = if eta > 0.0 { "decode-margin" } else { "decode-index" };
    Ok(CheckOutcome::new(
        name,
        violations == 0,
        format!(
            "d={d}: {jl_pass}/{seeds} seeds passed the projection event; {violations} decode failures under projection success",
            jl_pass = jl_passes
        ),
    ))
}

/// Window-reduction decoding under sliding-window attention.
pub fn window_decode(
    n: usize,
    w: usize,
    eps: f64,
    seeds: usize,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let d = dim_for(n, eps)?;
    let outcomes: Vec<Result<(bool, bool)>> = (0..seeds)
        .into_par_iter()
        .map(|s| -> Result<(bool, bool)> {
            let mut rng = chacha(derive_seed(master_seed, 700_000 + s as u64));
            let x = BitMatrix::random(w, d, &mut rng)?;
            let inst =
                build_window_instance(&x, n, w, eps, 0.0, derive_seed(master_seed, s as u64))?;
            let report = decode_instance(&inst, 0.0, OracleNoise::None)?;
            Ok((report.jl_passed, report.all_correct()))
        })
        .collect();
    let mut jl_passes = 0;
    let mut violations = 0;
    for o in outcomes {
        let (jl_ok, decoded) = o?;
        if jl_ok {
            jl_passes += 1;
            if !decoded {
                violations += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        "decode-window",
        violations == 0,
        format!(
            "d={d}: {jl_passes}/{seeds} seeds passed the projection event; {violations} decode failures under projection success"
        ),
    ))
}

/// Time-family construction identities.
pub fn time_family(n: usize, d: usize) -> Result<CheckOutcome> {
    let root = (n as f64).sqrt();
    let sigma = build_time_sigma(n, d)?;
    let cache = KvCache::from_triples(&sigma.stream)?;
    let out = exact_attention(&cache, &sigma.stream[n - 1].q)?;
    let sigma_expect = 2.0 - 1.0 / root;
    let mut passed = true;
    let mut detail = String::new();
    for j in 0..d {
        if (out[j] - sigma_expect).abs() > 1e-9 {
            passed = false;
        }
    }
    detail.push_str(&format!("sigma attention {:.6} (expect {sigma_expect:.6}); ", out[0]));

    let spike_expect = 1.0 - 1.0 / n as f64;
    for i in [1usize, n / 2, n] {
        let fam = build_time_family(n, d, i)?;
        let cache = KvCache::from_triples(&fam.stream)?;
        let dist = attention_as_expectation(&cache, &fam.stream[n - 1].q)?;
        if (dist.weights()[i - 1] - spike_expect).abs() > 1e-9 {
            passed = false;
        }
        let diffs: Vec<usize> = (0..n)
            .filter(|&l| fam.stream[l] != sigma.stream[l])
            .map(|l| l + 1)
            .collect();
        if diffs != vec![i] {
            passed = false;
            detail.push_str(&format!("H({i}) differs at {diffs:?}; "));
        }
    }
    detail.push_str(&format!("spike weight {spike_expect:.6} at every planted index"));
    Ok(CheckOutcome::new("time-family", passed, detail))
}

/// Greedy covering at radius 3/e must stay at or below ceil(e^d) on at least
/// `need` of `trials` random unit-ball point sets per dimension, and never
/// exceed the covering formula with a 4^d slack.
pub fn clusterability(
    dims: &[u32],
    points: usize,
    trials: usize,
    need: usize,
    master_seed: u64,
) -> Result<CheckOutcome> {
    let radius = 3.0 / std::f64::consts::E;
    let mut passed = true;
    let mut detail = String::new();
    for &d in dims {
        let target = ceil_snapped(std::f64::consts::E.powi(d as i32));
        let slack = covering_formula(d, radius)? * 4.0f64.powi(d as i32);
        let counts: Vec<Result<usize>> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<usize> {
                let mut rng = chacha(derive_seed(master_seed, (d as u64) << 32 | t as u64));
                let pts: Vec<Vector> =
                    (0..points).map(|_| sample_unit_ball(d as usize, &mut rng)).collect::<Result<_>>()?;
                Ok(greedy_cluster(&pts, radius)?.cluster_count())
            })
            .collect();
        let mut within_target = 0;
        let mut max_count = 0;
        for c in counts {
            let c = c?;
            max_count = max_count.max(c);
            if c as u64 <= target {
                within_target += 1;
            }
            if c as f64 > slack {
                passed = false;
            }
        }
        if within_target < need {
            passed = false;
        }
        detail.push_str(&format!("d={d}: {within_target}/{trials} <= {target} (max {max_count}); "));
    }
    Ok(CheckOutcome::new("cluster", passed, detail))
}

/// Runs every full-scale suite with the default parameters.
pub fn run_suite(name: &str, master_seed: u64) -> Result<Vec<CheckOutcome>> {
    use defaults::*;
    let all = name == "all";
    let mut outcomes = Vec::new();
    let mut matched = false;

    if all || name == "eq3" {
        matched = true;
        outcomes.push(expectation_consistency(EQ3_STREAMS, EQ3_MAX_N, EQ3_MAX_D, EQ3_TOL, master_seed)?);
    }
    if all || name == "window-unbiased" {
        matched = true;
        outcomes.push(window_unbiasedness(
            UNBIASED_N, UNBIASED_W, UNBIASED_D, UNBIASED_REPLICAS, UNBIASED_SEEDS, master_seed,
        )?);
    }
    if all || name == "window-space" {
        matched = true;
        outcomes.push(window_space(SPACE_N, &SPACE_WIDTHS, master_seed)?);
    }
    if all || name == "boost" {
        matched = true;
        outcomes.push(boosting(
            BOOST_N, BOOST_W, BOOST_D, BOOST_EPS, BOOST_DELTA, BOOST_VMAX, BOOST_MLB,
            BOOST_TRIALS, BOOST_NEED, master_seed,
        )?);
    }
    if all || name == "lazy-gumbel" {
        matched = true;
        outcomes.push(lazy_gumbel(
            LAZY_SETS, LAZY_N, LAZY_K, LAZY_SAMPLES, LAZY_TV_MAX, LAZY_PROBE_FACTOR, master_seed,
        )?);
    }
    if all || name == "scalar-stream" {
        matched = true;
        outcomes.push(scalar_stream(SCALAR_N, SCALAR_RUNS, SCALAR_SPACE_FACTOR, master_seed)?);
    }
    if all || name == "jl" {
        matched = true;
        outcomes.push(jl_preservation(JL_N, JL_EPS, JL_SEEDS, master_seed)?);
    }
    if all || name == "decode-index" {
        matched = true;
        outcomes.push(index_decode(
            DECODE_N, DECODE_EPS, 0.0, OracleNoise::None, DECODE_SEEDS, master_seed,
        )?);
    }
    if all || name == "decode-margin" {
        matched = true;
        outcomes.push(index_decode(
            DECODE_N, DECODE_EPS, DECODE_ETA, OracleNoise::Adversarial, DECODE_SEEDS, master_seed,
        )?);
    }
    if all || name == "decode-window" {
        matched = true;
        outcomes.push(window_decode(WDECODE_N, WDECODE_W, WDECODE_EPS, WDECODE_SEEDS, master_seed)?);
    }
    if all || name == "time-family" {
        matched = true;
        outcomes.push(time_family(TIME_N, TIME_D)?);
    }
    if all || name == "cluster" {
        matched = true;
        outcomes.push(clusterability(
            &CLUSTER_DIMS, CLUSTER_POINTS, CLUSTER_TRIALS, CLUSTER_NEED, master_seed,
        )?);
    }
    if !matched {
        return Err(crate::error::Error::InvalidParameter(format!("unknown check suite '{name}'")));
    }
    Ok(outcomes)
}
