//! Exact reference attention: softmax, full attention, and sliding-window
//! attention with unmasked values.
//!
//! These are the O(nd) oracles the estimators are validated against. The
//! sliding-window variant zeroes scores outside the window but keeps every
//! value vector in the softmax support, so the whole prefix still contributes
//! to the output.

use crate::error::{Error, Result};
use crate::vector::{dot, TokenTriple, Vector};

/// A probability distribution produced by a softmax; weights sum to one.
#[derive(Clone, Debug)]
pub struct SoftmaxDist {
    weights: Vec<f64>,
}

impl SoftmaxDist {
    /// Validates that weights are nonnegative and sum to one within 1e-9.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("softmax weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NonFinite("softmax weights"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "softmax weights sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(SoftmaxDist { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// Expected value row under this distribution.
    pub fn expectation(&self, values: &[Vector]) -> Result<Vector> {
        if values.len() != self.weights.len() {
            return Err(Error::DimMismatch { expected: self.weights.len(), got: values.len() });
        }
        let d = values[0].dim();
        let mut out = vec![0.0; d];
        for (w, v) in self.weights.iter().zip(values) {
            if v.dim() != d {
                return Err(Error::DimMismatch { expected: d, got: v.dim() });
            }
            for (o, c) in out.iter_mut().zip(v.as_slice()) {
                *o += w * c;
            }
        }
        Vector::new(out)
    }
}

/// Numerically stable softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Result<SoftmaxDist> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("softmax scores"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("softmax scores"));
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    SoftmaxDist::new(weights)
}

/// Exact key/value matrices with append-only semantics.
#[derive(Clone, Debug)]
pub struct KvCache {
    keys: Vec<Vector>,
    values: Vec<Vector>,
    dim: usize,
}

impl KvCache {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("cache dimension must be positive".into()));
        }
        Ok(KvCache { keys: Vec::new(), values: Vec::new(), dim })
    }

    pub fn append(&mut self, key: Vector, value: Vector) -> Result<()> {
        if key.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: key.dim() });
        }
        if value.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: value.dim() });
        }
        self.keys.push(key);
        self.values.push(value);
        Ok(())
    }

    pub fn append_triple(&mut self, t: &TokenTriple) -> Result<()> {
        self.append(t.k.clone(), t.v.clone())
    }

    pub fn from_triples(triples: &[TokenTriple]) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyInput("token triples"));
        }
        let mut cache = KvCache::new(triples[0].dim())?;
        for t in triples {
            cache.append_triple(t)?;
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn keys(&self) -> &[Vector] {
        &self.keys
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }
}

/// Softmax distribution over the cache induced by query-key scores.
pub fn attention_as_expectation(cache: &KvCache, q: &Vector) -> Result<SoftmaxDist> {
    if cache.is_empty() {
        return Err(Error::EmptyInput("kv cache"));
    }
    if q.dim() != cache.dim() {
        return Err(Error::DimMismatch { expected: cache.dim(), got: q.dim() });
    }
    let scores: Vec<f64> = cache.keys().iter().map(|k| dot(k.as_slice(), q.as_slice())).collect();
    softmax(&scores)
}

/// Full attention: softmax(K·q) applied to the value rows.
pub fn exact_attention(cache: &KvCache, q: &Vector) -> Result<Vector> {
    let dist = attention_as_expectation(cache, q)?;
    dist.expectation(cache.values())
}

/// Sliding-window width W.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlidingWindowSpec {
    window_width: usize,
}

impl SlidingWindowSpec {
    pub fn new(window_width: usize) -> Result<Self> {
        if window_width == 0 {
            return Err(Error::InvalidParameter("window width must be at least 1".into()));
        }
        Ok(SlidingWindowSpec { window_width })
    }

    pub fn width(&self) -> usize {
        self.window_width
    }
}

/// Masked scores for a length-`step` prefix: positions at or before
/// `step - W` get score zero, the rest get the query-key product.
pub fn sliding_window_scores(keys: &[Vector], q: &Vector, spec: SlidingWindowSpec) -> Result<Vec<f64>> {
    let step = keys.len();
    let w = spec.width();
    let cutoff = step.saturating_sub(w); // positions 1..=cutoff masked (1-based)
    let mut scores = Vec::with_capacity(step);
    for (idx, k) in keys.iter().enumerate() {
        if k.dim() != q.dim() {
            return Err(Error::DimMismatch { expected: q.dim(), got: k.dim() });
        }
        if idx < cutoff {
            scores.push(0.0);
        } else {
            scores.push(dot(k.as_slice(), q.as_slice()));
        }
    }
    Ok(scores)
}

/// Sliding-window attention for an explicit query against a full prefix.
pub fn sliding_window_attention_for_query(
    keys: &[Vector],
    values: &[Vector],
    spec: SlidingWindowSpec,
    q: &Vector,
) -> Result<Vector> {
    if keys.is_empty() {
        return Err(Error::EmptyInput("sliding window keys"));
    }
    if keys.len() != values.len() {
        return Err(Error::DimMismatch { expected: keys.len(), got: values.len() });
    }
    let scores = sliding_window_scores(keys, q, spec)?;
    softmax(&scores)?.expectation(values)
}

/// Sliding-window attention at `step` (1-based), using the step's own query.
pub fn sliding_window_attention_exact(
    triples: &[TokenTriple],
    spec: SlidingWindowSpec,
    step: usize,
) -> Result<Vector> {
    if step == 0 {
        return Err(Error::InvalidParameter("step must be at least 1".into()));
    }
    if step > triples.len() {
        return Err(Error::IndexOutOfRange { index: step, len: triples.len() });
    }
    let keys: Vec<Vector> = triples[..step].iter().map(|t| t.k.clone()).collect();
    let values: Vec<Vector> = triples[..step].iter().map(|t| t.v.clone()).collect();
    sliding_window_attention_for_query(&keys, &values, spec, &triples[step - 1].q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit;
    use proptest::prelude::*;
    use rand::Rng;

    fn vecf(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn softmax_uniform_on_equal_scores() {
        let d = softmax(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        for &w in d.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_exp_ratio() {
        let d = softmax(&[2.0f64.ln(), 0.0]).unwrap();
        assert!((d.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_large_scores_stable() {
        // exp(1000) overflows without max subtraction; the ratio is e/(e+1).
        let d = softmax(&[1000.0, 999.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((d.weights()[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((d.weights()[1] - 1.0 / (e + 1.0)).abs() < 1e-12);
        let s = softmax(&[700.0, 0.0, -5.0]).unwrap();
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_rejects_bad_input() {
        assert!(softmax(&[]).is_err());
        assert!(softmax(&[1.0, f64::NAN]).is_err());
        assert!(softmax(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn attention_uniform_average() {
        let mut cache = KvCache::new(1).unwrap();
        cache.append(vecf(&[0.0]), vecf(&[1.0])).unwrap();
        cache.append(vecf(&[0.0]), vecf(&[3.0])).unwrap();
        let out = exact_attention(&cache, &vecf(&[0.0])).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn attention_single_entry_returns_value() {
        let mut cache = KvCache::new(2).unwrap();
        cache.append(vecf(&[3.0, -1.0]), vecf(&[7.5, 0.25])).unwrap();
        let out = exact_attention(&cache, &vecf(&[0.3, 2.0])).unwrap();
        assert!((out[0] - 7.5).abs() < 1e-12);
        assert!((out[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn attention_matches_dense_oracle() {
        // Independent oracle: raw exp + matrix product, no shared code path.
        let mut rng = randkit::chacha(42);
        let n = 3;
        let d = 2;
        let mut cache = KvCache::new(d).unwrap();
        let mut keys = Vec::new();
        let mut vals = Vec::new();
        for _ in 0..n {
            let k: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            keys.push(k.clone());
            vals.push(v.clone());
            cache.append(vecf(&k), vecf(&v)).unwrap();
        }
        let q = vec![0.4, -0.9];
        let exps: Vec<f64> = keys
            .iter()
            .map(|k| (k[0] * q[0] + k[1] * q[1]).exp())
            .collect();
        let z: f64 = exps.iter().sum();
        let mut expect = vec![0.0; d];
        for (e, v) in exps.iter().zip(&vals) {
            for j in 0..d {
                expect[j] += e / z * v[j];
            }
        }
        let out = exact_attention(&cache, &vecf(&q)).unwrap();
        for j in 0..d {
            assert!((out[j] - expect[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_errors() {
        let cache = KvCache::new(2).unwrap();
        assert!(exact_attention(&cache, &vecf(&[0.0, 0.0])).is_err());
        let mut cache = KvCache::new(2).unwrap();
        cache.append(vecf(&[1.0, 0.0]), vecf(&[1.0, 0.0])).unwrap();
        assert!(exact_attention(&cache, &vecf(&[1.0])).is_err());
    }

    #[test]
    fn expectation_form_consistent_with_attention() {
        let mut rng = randkit::chacha(7);
        let d = 3;
        let mut cache = KvCache::new(d).unwrap();
        for _ in 0..10 {
            let k: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            cache.append(vecf(&k), vecf(&v)).unwrap();
        }
        let q = vecf(&[0.5, -0.2, 1.1]);
        let dist = attention_as_expectation(&cache, &q).unwrap();
        let via_dist = dist.expectation(cache.values()).unwrap();
        let direct = exact_attention(&cache, &q).unwrap();
        for j in 0..d {
            assert!((via_dist[j] - direct[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn expectation_weights_exp_ratio() {
        let mut cache = KvCache::new(1).unwrap();
        cache.append(vecf(&[3.0f64.ln()]), vecf(&[1.0])).unwrap();
        cache.append(vecf(&[0.0]), vecf(&[2.0])).unwrap();
        let dist = attention_as_expectation(&cache, &vecf(&[1.0])).unwrap();
        assert!((dist.weights()[0] - 0.75).abs() < 1e-12);
        assert!((dist.weights()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn window_zero_query_averages_all_values() {
        let spec = SlidingWindowSpec::new(2).unwrap();
        let triples: Vec<TokenTriple> = (0..5)
            .map(|i| {
                TokenTriple::new(vecf(&[0.0]), vecf(&[i as f64]), vecf(&[i as f64 + 1.0])).unwrap()
            })
            .collect();
        let out = sliding_window_attention_exact(&triples, spec, 5).unwrap();
        assert!((out[0] - 3.0).abs() < 1e-12); // mean of 1..=5
    }

    #[test]
    fn window_covering_everything_equals_full_attention() {
        let mut rng = randkit::chacha(11);
        let triples: Vec<TokenTriple> = (0..6)
            .map(|_| {
                let f = |rng: &mut rand_chacha::ChaCha8Rng| {
                    vecf(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                };
                TokenTriple::new(f(&mut rng), f(&mut rng), f(&mut rng)).unwrap()
            })
            .collect();
        let spec = SlidingWindowSpec::new(16).unwrap();
        let windowed = sliding_window_attention_exact(&triples, spec, 6).unwrap();
        let cache = KvCache::from_triples(&triples).unwrap();
        let full = exact_attention(&cache, &triples[5].q).unwrap();
        for j in 0..2 {
            assert!((windowed[j] - full[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn window_masked_hand_instance() {
        // step=3, W=1, keys (5,5,2), q=1, values (1,2,4):
        // masked scores [0,0,2], so the closed form is (1+2+4e^2)/(2+e^2).
        let spec = SlidingWindowSpec::new(1).unwrap();
        let triples = vec![
            TokenTriple::new(vecf(&[0.0]), vecf(&[5.0]), vecf(&[1.0])).unwrap(),
            TokenTriple::new(vecf(&[0.0]), vecf(&[5.0]), vecf(&[2.0])).unwrap(),
            TokenTriple::new(vecf(&[1.0]), vecf(&[2.0]), vecf(&[4.0])).unwrap(),
        ];
        let out = sliding_window_attention_exact(&triples, spec, 3).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        let oracle = (1.0 + 2.0 + 4.0 * e2) / (2.0 + e2);
        assert!((out[0] - oracle).abs() < 1e-12);
    }

    #[test]
    fn window_step_zero_rejected() {
        let spec = SlidingWindowSpec::new(2).unwrap();
        let triples =
            vec![TokenTriple::new(vecf(&[0.0]), vecf(&[0.0]), vecf(&[0.0])).unwrap()];
        assert!(sliding_window_attention_exact(&triples, spec, 0).is_err());
    }

    proptest! {
        #[test]
        fn softmax_shift_invariant(scores in proptest::collection::vec(-50.0f64..50.0, 1..20), c in -30.0f64..30.0) {
            let a = softmax(&scores).unwrap();
            let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
            let b = softmax(&shifted).unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_sums_to_one(scores in proptest::collection::vec(-700.0f64..700.0, 1..30)) {
            let d = softmax(&scores).unwrap();
            prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn attention_output_is_convex_combination(
            rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..8),
            q in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            let mut cache = KvCache::new(3).unwrap();
            for r in &rows {
                cache.append(Vector::new(r.clone()).unwrap(), Vector::new(r.clone()).unwrap()).unwrap();
            }
            let out = exact_attention(&cache, &Vector::new(q).unwrap()).unwrap();
            for j in 0..3 {
                let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(out[j] >= lo - 1e-9 && out[j] <= hi + 1e-9);
            }
        }
    }
}
