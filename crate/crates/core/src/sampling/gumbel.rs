//! Gumbel-max softmax sampling, plus the lazy variant that noises only the
//! top-k scores and a Binomial-sized sample of the tail.
//!
//! The lazy sampler draws the exact softmax distribution provided the given
//! top set contains the k largest scores: any tail position whose noise stays
//! at or below the cutoff B cannot beat the noised top maximum, so only the
//! Binomial count of noise values above B ever needs materializing.

use rand::Rng;

use crate::error::{Error, Result};
use crate::randkit::uniform_open01;

/// Inverse-CDF Gumbel(0,1) draw: -ln(-ln u) for u in (0,1).
pub fn gumbel_draw(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!("gumbel input must lie in (0,1), got {u}")));
    }
    Ok(-(-u.ln()).ln())
}

pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gumbel_draw(uniform_open01(rng)).expect("uniform_open01 stays inside (0,1)")
}

/// Gumbel(0,1) draw conditioned to exceed `b`.
///
/// With F(x) = exp(-exp(-x)) this is F^{-1}(F(b) + u (1 - F(b))) computed
/// through expm1/ln_1p so it stays accurate for large |b|; the result is
/// always strictly greater than `b`.
pub fn conditional_gumbel_above(b: f64, u: f64) -> Result<f64> {
    if !b.is_finite() {
        return Err(Error::NonFinite("gumbel cutoff"));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!("gumbel input must lie in (0,1), got {u}")));
    }
    let t = (-b).exp(); // -ln F(b); may overflow to +inf for very negative b
    let w = (1.0 - u) * (-(-t).exp_m1()); // (1-u)(1 - F(b)) done stably
    let neg_ln_p = -(-w).ln_1p(); // -ln(F(b) + u(1 - F(b)))
    Ok(-neg_ln_p.ln())
}

pub fn sample_conditional_gumbel_above<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    conditional_gumbel_above(b, uniform_open01(rng)).expect("cutoff finite, u in (0,1)")
}

/// Samples an index with probability proportional to exp(score).
pub fn gumbel_max_sample<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("gumbel-max scores"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("gumbel-max scores"));
    }
    let mut best = 0;
    let mut best_noised = f64::NEG_INFINITY;
    for (i, &s) in scores.iter().enumerate() {
        let noised = s + sample_gumbel(rng);
        if noised > best_noised {
            best_noised = noised;
            best = i;
        }
    }
    Ok(best)
}

/// Exact Binomial(n, p) draw by CDF inversion.
///
/// The walk accumulates probability mass in log space, so it stays exact even
/// when (1-p)^n underflows; intended for n up to about 10^6.
pub fn binomial_inversion<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("binomial p must lie in [0,1], got {p}")));
    }
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let u = uniform_open01(rng);
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_pmf = n as f64 * ln_q; // pmf(0)
    let mut cdf = 0.0;
    for k in 0..n {
        cdf += ln_pmf.exp();
        if cdf >= u {
            return Ok(k);
        }
        // pmf(k+1) = pmf(k) * (n-k)/(k+1) * p/q
        ln_pmf += ((n - k) as f64).ln() - ((k + 1) as f64).ln() + ln_p - ln_q;
    }
    Ok(n)
}

/// Outcome of one lazy Gumbel draw.
#[derive(Clone, Copy, Debug)]
pub struct LazyGumbelSample {
    /// Sampled position in [0, n).
    pub index: usize,
    /// Number of tail scores that were probed.
    pub tail_probes: usize,
}

/// Lazy Gumbel sampling over n scores given the exact top-k set.
///
/// `top_set` holds (index, score) pairs for the k largest scores; the rest
/// are fetched through `rest_scores` only for the Binomial-many tail
/// positions whose noise exceeds the cutoff. Tail positions are drawn
/// uniformly without replacement.
pub fn lazy_gumbel_sample<R, F>(
    top_set: &[(usize, f64)],
    mut rest_scores: F,
    n: usize,
    rng: &mut R,
) -> Result<LazyGumbelSample>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> f64,
{
    let k = top_set.len();
    if k == 0 {
        return Err(Error::EmptyInput("lazy gumbel top set"));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("top set size {k} exceeds n = {n}")));
    }
    let mut seen = vec![false; n];
    for &(idx, score) in top_set {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
        if seen[idx] {
            return Err(Error::InvalidParameter(format!("duplicate index {idx} in top set")));
        }
        seen[idx] = true;
        if !score.is_finite() {
            return Err(Error::NonFinite("top set scores"));
        }
    }

    // Noise the top set; the cutoff is max noised minus min raw score.
    let mut best_idx = top_set[0].0;
    let mut best_noised = f64::NEG_INFINITY;
    let mut min_score = f64::INFINITY;
    for &(idx, score) in top_set {
        let noised = score + sample_gumbel(rng);
        if noised > best_noised {
            best_noised = noised;
            best_idx = idx;
        }
        min_score = min_score.min(score);
    }
    let cutoff = best_noised - min_score;

    let tail_len = n - k;
    if tail_len == 0 {
        return Ok(LazyGumbelSample { index: best_idx, tail_probes: 0 });
    }

    // P(G > cutoff) for a fresh Gumbel, computed stably.
    let succ = -(-(-cutoff).exp()).exp_m1();
    let m = binomial_inversion(tail_len as u64, succ, rng)? as usize;

    for idx in sample_tail_indices(&seen, n, tail_len, m, rng) {
        let noised = rest_scores(idx) + sample_conditional_gumbel_above(cutoff, rng);
        if noised > best_noised {
            best_noised = noised;
            best_idx = idx;
        }
    }
    Ok(LazyGumbelSample { index: best_idx, tail_probes: m })
}

/// m distinct uniform indices from the complement of the top set.
fn sample_tail_indices<R: Rng + ?Sized>(
    in_top: &[bool],
    n: usize,
    tail_len: usize,
    m: usize,
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(m <= tail_len);
    if m == 0 {
        return Vec::new();
    }
    if m * 2 >= tail_len {
        // Dense draw: enumerate the tail and take a partial Fisher-Yates prefix.
        let mut tail: Vec<usize> = (0..n).filter(|&i| !in_top[i]).collect();
        for i in 0..m {
            let j = rng.random_range(i..tail.len());
            tail.swap(i, j);
        }
        tail.truncate(m);
        tail
    } else {
        // Sparse draw: rejection-sample distinct tail indices.
        let mut chosen = std::collections::HashSet::with_capacity(m);
        let mut out = Vec::with_capacity(m);
        while out.len() < m {
            let idx = rng.random_range(0..n);
            if !in_top[idx] && chosen.insert(idx) {
                out.push(idx);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::softmax;
    use crate::randkit;

    #[test]
    fn gumbel_draw_fixed_points() {
        let e = std::f64::consts::E;
        assert!((gumbel_draw(1.0 / e).unwrap()).abs() < 1e-12);
        assert!((gumbel_draw((-e).exp()).unwrap() + 1.0).abs() < 1e-12);
        assert!(gumbel_draw(0.0).is_err());
        assert!(gumbel_draw(1.0).is_err());
    }

    #[test]
    fn gumbel_mean_is_euler_mascheroni() {
        let mut rng = randkit::chacha(10);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_gumbel(&mut rng);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5772).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn conditional_above_stays_above() {
        let mut rng = randkit::chacha(11);
        for &b in &[-5.0, -0.5, 0.0, 1.0, 8.0, 40.0] {
            for _ in 0..2000 {
                let g = sample_conditional_gumbel_above(b, &mut rng);
                assert!(g > b, "g {g} <= b {b}");
            }
        }
    }

    #[test]
    fn conditional_above_boundary_limit() {
        for &b in &[-2.0, 0.0, 3.0] {
            let g = conditional_gumbel_above(b, 1e-12).unwrap();
            assert!(g > b && g - b < 1e-9, "b {b} g {g}");
        }
    }

    #[test]
    fn conditional_with_very_low_cutoff_matches_unconditional() {
        // Kolmogorov-Smirnov against the Gumbel CDF at B = -1e9.
        let mut rng = randkit::chacha(12);
        let n = 100_000;
        let mut draws: Vec<f64> =
            (0..n).map(|_| sample_conditional_gumbel_above(-1e9, &mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let mut ks: f64 = 0.0;
        for (i, &x) in draws.iter().enumerate() {
            let cdf = (-(-x).exp()).exp();
            ks = ks.max((cdf - i as f64 / n as f64).abs());
            ks = ks.max((cdf - (i + 1) as f64 / n as f64).abs());
        }
        // Asymptotic Kolmogorov p-value; require p > 0.01.
        let lambda = ks * (n as f64).sqrt();
        let p: f64 = 2.0
            * (1..100)
                .map(|j| {
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    sign * (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp()
                })
                .sum::<f64>();
        assert!(p > 0.01, "KS stat {ks}, p {p}");
    }

    #[test]
    fn binomial_edge_cases() {
        let mut rng = randkit::chacha(13);
        assert_eq!(binomial_inversion(10, 0.0, &mut rng).unwrap(), 0);
        assert_eq!(binomial_inversion(10, 1.0, &mut rng).unwrap(), 10);
        assert_eq!(binomial_inversion(0, 0.5, &mut rng).unwrap(), 0);
        assert!(binomial_inversion(10, 1.5, &mut rng).is_err());
    }

    #[test]
    fn binomial_moments() {
        let mut rng = randkit::chacha(14);
        let (n, p) = (50u64, 0.3);
        let trials = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let x = binomial_inversion(n, p, &mut rng).unwrap() as f64;
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        assert!((mean - 15.0).abs() < 0.05, "mean {mean}");
        assert!((var - 10.5).abs() < 0.25, "var {var}");
    }

    #[test]
    fn binomial_underflow_regime() {
        // n ln(1-p) is far below exp underflow; the log-space walk must
        // still return values near the mean.
        let mut rng = randkit::chacha(15);
        let (n, p) = (1_000_000u64, 2e-3);
        let mut sum = 0.0;
        let trials = 2000;
        for _ in 0..trials {
            sum += binomial_inversion(n, p, &mut rng).unwrap() as f64;
        }
        let mean = sum / trials as f64;
        assert!((mean - 2000.0).abs() < 10.0, "mean {mean}");
    }

    #[test]
    fn gumbel_max_degenerate_scores() {
        let mut rng = randkit::chacha(16);
        let scores = [-1e9, 0.0];
        let mut hits = 0;
        for _ in 0..100_000 {
            if gumbel_max_sample(&scores, &mut rng).unwrap() == 1 {
                hits += 1;
            }
        }
        assert!(hits >= 99_990, "hits {hits}");
    }

    #[test]
    fn gumbel_max_uniform_scores() {
        let mut rng = randkit::chacha(17);
        let scores = [2.5; 4];
        let mut counts = [0u32; 4];
        for _ in 0..100_000 {
            counts[gumbel_max_sample(&scores, &mut rng).unwrap()] += 1;
        }
        for &c in &counts {
            let f = c as f64 / 100_000.0;
            assert!((f - 0.25).abs() < 0.01, "freq {f}");
        }
    }

    #[test]
    fn gumbel_max_matches_softmax_oracle() {
        let mut rng = randkit::chacha(18);
        let scores = [6.0f64.ln(), 3.0f64.ln(), 1.0f64.ln()];
        let mut counts = [0u32; 3];
        for _ in 0..100_000 {
            counts[gumbel_max_sample(&scores, &mut rng).unwrap()] += 1;
        }
        for (c, expect) in counts.iter().zip([0.6, 0.3, 0.1]) {
            let f = *c as f64 / 100_000.0;
            assert!((f - expect).abs() < 0.01, "freq {f} expect {expect}");
        }
    }

    fn top_k_set(scores: &[f64], k: usize) -> Vec<(usize, f64)> {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order[..k].iter().map(|&i| (i, scores[i])).collect()
    }

    #[test]
    fn lazy_with_full_top_set_is_plain_gumbel_max() {
        let mut rng = randkit::chacha(19);
        let scores = [1.0f64.ln(), 2.0f64.ln(), 5.0f64.ln()];
        let top = top_k_set(&scores, 3);
        let mut counts = [0u32; 3];
        for _ in 0..100_000 {
            let s = lazy_gumbel_sample(&top, |_| unreachable!("no tail"), 3, &mut rng).unwrap();
            assert_eq!(s.tail_probes, 0);
            counts[s.index] += 1;
        }
        for (c, expect) in counts.iter().zip([0.125, 0.25, 0.625]) {
            let f = *c as f64 / 100_000.0;
            assert!((f - expect).abs() < 0.01, "freq {f} expect {expect}");
        }
    }

    #[test]
    fn lazy_dominant_top_rarely_probes() {
        // The cutoff is max noised top score minus min top score, so a top
        // set with huge internal spread drives the Binomial success
        // probability to zero: no tail probes at all.
        let mut rng = randkit::chacha(20);
        let n = 100;
        let mut probes = 0;
        for _ in 0..5000 {
            let top = vec![(0, 500.0), (1, 0.0)];
            let s = lazy_gumbel_sample(&top, |_| -1.0, n, &mut rng).unwrap();
            probes += s.tail_probes;
            assert!(s.index < 2, "tail should never win, got {}", s.index);
        }
        assert_eq!(probes, 0);
    }

    #[test]
    fn lazy_matches_exact_softmax_distribution() {
        let mut master = randkit::chacha(21);
        use rand::Rng as _;
        for trial in 0..5 {
            let n = 64;
            let k = 8;
            let scores: Vec<f64> = (0..n).map(|_| master.random_range(-2.0..2.0)).collect();
            let top = top_k_set(&scores, k);
            let dist = softmax(&scores).unwrap();
            let samples = 100_000;
            let mut counts = vec![0u32; n];
            let mut rng = randkit::chacha(1000 + trial);
            for _ in 0..samples {
                let s = lazy_gumbel_sample(&top, |i| scores[i], n, &mut rng).unwrap();
                counts[s.index] += 1;
            }
            let tv: f64 = counts
                .iter()
                .zip(dist.weights())
                .map(|(&c, &w)| (c as f64 / samples as f64 - w).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv <= 0.02, "trial {trial}: TV {tv}");
        }
    }

    #[test]
    fn lazy_and_eager_agree_in_distribution() {
        let mut master = randkit::chacha(22);
        use rand::Rng as _;
        for trial in 0..20 {
            let n = 48;
            let k = 7;
            let scores: Vec<f64> = (0..n).map(|_| master.random_range(-3.0..3.0)).collect();
            let top = top_k_set(&scores, k);
            let exact = softmax(&scores).unwrap();
            let samples = 100_000;
            let mut lazy_counts = vec![0u32; n];
            let mut eager_counts = vec![0u32; n];
            let mut rng = randkit::chacha(2000 + trial);
            for _ in 0..samples {
                lazy_counts[lazy_gumbel_sample(&top, |i| scores[i], n, &mut rng).unwrap().index] += 1;
                eager_counts[gumbel_max_sample(&scores, &mut rng).unwrap()] += 1;
            }
            for counts in [&lazy_counts, &eager_counts] {
                let tv: f64 = counts
                    .iter()
                    .zip(exact.weights())
                    .map(|(&c, &w)| (c as f64 / samples as f64 - w).abs())
                    .sum::<f64>()
                    / 2.0;
                assert!(tv <= 0.02, "trial {trial}: TV {tv}");
            }
        }
    }

    #[test]
    fn lazy_probe_complexity_sqrt_n() {
        // Random-uniform scores; mean probes should stay within 4 sqrt(n).
        use rand::Rng as _;
        for &n in &[64usize, 256, 1024] {
            let k = (n as f64).sqrt().ceil() as usize;
            let mut master = randkit::chacha(23);
            let scores: Vec<f64> = (0..n).map(|_| master.random_range(0.0..1.0)).collect();
            let top = top_k_set(&scores, k);
            let mut rng = randkit::chacha(3000 + n as u64);
            let runs = 1000;
            let mut probes = 0usize;
            for _ in 0..runs {
                probes += lazy_gumbel_sample(&top, |i| scores[i], n, &mut rng).unwrap().tail_probes;
            }
            let mean = probes as f64 / runs as f64;
            assert!(mean <= 4.0 * (n as f64).sqrt(), "n {n}: mean probes {mean}");
        }
    }

    #[test]
    fn lazy_rejects_bad_top_sets() {
        let mut rng = randkit::chacha(24);
        assert!(lazy_gumbel_sample(&[], |_| 0.0, 4, &mut rng).is_err());
        assert!(lazy_gumbel_sample(&[(0, 0.0), (1, 0.0)], |_| 0.0, 1, &mut rng).is_err());
        assert!(lazy_gumbel_sample(&[(5, 0.0)], |_| 0.0, 4, &mut rng).is_err());
        assert!(lazy_gumbel_sample(&[(0, 0.0), (0, 1.0)], |_| 0.0, 4, &mut rng).is_err());
    }
}
