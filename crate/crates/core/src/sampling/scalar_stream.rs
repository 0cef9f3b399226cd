//! Sublinear-space streaming attention for one-dimensional embeddings.
//!
//! The state keeps the top and bottom key scalars (whichever becomes the
//! lazy-Gumbel top set depends on the query's sign), plus a level-sampled
//! pool over everything else. A query runs lazy Gumbel sampling: the stored
//! buffer supplies the exact top scores, and the Binomial-many tail probes
//! are served by splitting hypergeometrically between the opposite buffer
//! (fully stored) and the pool (a uniform subset of the remainder).
//!
//! Both buffers are maintained *closed*: every unstored key lies between the
//! bottom buffer's maximum and the top buffer's minimum. That is what makes
//! the buffer a valid lazy-Gumbel top set at any point in the stream. When
//! the capacity ceil(sqrt(n)) grows, a vacancy opens and is filled only by
//! later arrivals that genuinely beat the buffer boundary, so closedness is
//! never traded away for fullness.
//!
//! The pool subsamples by level: each routed item draws an i.i.d. tag and is
//! kept while its tag is below the current threshold; the threshold halves
//! whenever the pool overflows its budget. The kept set is therefore an
//! exchangeable uniform subset of the routed population even as the budget
//! grows, which a capacity-growing reservoir is not.

use rand::Rng;

use crate::error::{Error, Result};
use crate::randkit::uniform_open01;
use crate::sampling::gumbel::{
    binomial_inversion, sample_conditional_gumbel_above, sample_gumbel,
};
use crate::vector::TokenTriple;

/// One retained stream position: its key and value scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarEntry {
    pub index: usize,
    pub key: f64,
    pub value: f64,
}

#[derive(Clone, Debug)]
struct LevelPool {
    theta: f64,
    entries: Vec<(f64, ScalarEntry)>,
}

impl LevelPool {
    fn new() -> Self {
        LevelPool { theta: 1.0, entries: Vec::new() }
    }

    fn offer<R: Rng + ?Sized>(&mut self, entry: ScalarEntry, budget: usize, rng: &mut R) {
        let tag = uniform_open01(rng);
        if tag < self.theta {
            self.entries.push((tag, entry));
        }
        self.trim(budget);
    }

    /// Halves the acceptance level until the pool fits the budget. The kept
    /// set stays exactly {offered items with tag < theta}, so it remains an
    /// exchangeable uniform subset of the offered population.
    fn trim(&mut self, budget: usize) {
        while self.entries.len() > budget {
            self.theta *= 0.5;
            let theta = self.theta;
            self.entries.retain(|(t, _)| *t < theta);
        }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Streaming state for d = 1 attention estimation in O(sqrt(n)) scalars.
#[derive(Clone, Debug)]
pub struct ScalarStreamState {
    top: Vec<ScalarEntry>,
    bottom: Vec<ScalarEntry>,
    pool: LevelPool,
    rest_count: usize,
    n_seen: usize,
}

fn ceil_sqrt(n: usize) -> usize {
    let r = (n as f64).sqrt() as usize;
    if r * r >= n {
        r
    } else if (r + 1) * (r + 1) >= n {
        r + 1
    } else {
        r + 2
    }
}

/// Ranks `a` above `b` in the top buffer (larger key, ties to smaller index).
fn outranks_top(a: &ScalarEntry, b: &ScalarEntry) -> bool {
    a.key > b.key || (a.key == b.key && a.index < b.index)
}

/// Ranks `a` above `b` in the bottom buffer (smaller key, ties to smaller index).
fn outranks_bottom(a: &ScalarEntry, b: &ScalarEntry) -> bool {
    a.key < b.key || (a.key == b.key && a.index < b.index)
}

fn worst_position(buf: &[ScalarEntry], outranks: fn(&ScalarEntry, &ScalarEntry) -> bool) -> usize {
    let mut worst = 0;
    for i in 1..buf.len() {
        if outranks(&buf[worst], &buf[i]) {
            worst = i;
        }
    }
    worst
}

impl Default for ScalarStreamState {
    fn default() -> Self {
        Self::new()
    }
}

impl ScalarStreamState {
    pub fn new() -> Self {
        ScalarStreamState {
            top: Vec::new(),
            bottom: Vec::new(),
            pool: LevelPool::new(),
            rest_count: 0,
            n_seen: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n_seen
    }

    pub fn is_empty(&self) -> bool {
        self.n_seen == 0
    }

    /// Buffer capacity at the current stream length.
    pub fn capacity(&self) -> usize {
        ceil_sqrt(self.n_seen.max(1))
    }

    fn pool_budget(&self) -> usize {
        let cap = self.capacity();
        let total = (4.0 * (self.n_seen as f64).sqrt()).floor() as usize;
        total.saturating_sub(2 * cap).max(1)
    }

    /// Count of retained key/value scalars (two per stored entry).
    pub fn stored_scalars(&self) -> usize {
        2 * (self.top.len() + self.bottom.len() + self.pool.len())
    }

    pub fn top_entries(&self) -> &[ScalarEntry] {
        &self.top
    }

    pub fn bottom_entries(&self) -> &[ScalarEntry] {
        &self.bottom
    }

    /// Ingests a d = 1 token triple.
    pub fn update<R: Rng + ?Sized>(&mut self, triple: &TokenTriple, rng: &mut R) -> Result<()> {
        if triple.dim() != 1 {
            return Err(Error::DimMismatch { expected: 1, got: triple.dim() });
        }
        self.update_scalars(triple.k[0], triple.v[0], rng);
        Ok(())
    }

    /// Ingests a raw (key, value) scalar pair.
    pub fn update_scalars<R: Rng + ?Sized>(&mut self, key: f64, value: f64, rng: &mut R) {
        self.n_seen += 1;
        let cap = self.capacity();
        let entry = ScalarEntry { index: self.n_seen, key, value };

        if self.top.len() < cap && self.rest_count == 0 && self.bottom.is_empty() {
            self.top.push(entry);
        } else if !self.top.is_empty() && {
            let worst = worst_position(&self.top, outranks_top);
            outranks_top(&entry, &self.top[worst])
        } {
            self.top.push(entry);
            if self.top.len() > cap {
                let worst = worst_position(&self.top, outranks_top);
                let evicted = self.top.swap_remove(worst);
                if self.bottom.len() < cap && self.rest_count == 0 {
                    self.bottom.push(evicted);
                } else {
                    self.route_to_rest(evicted, rng);
                }
            }
        } else if self.bottom.len() < cap && self.rest_count == 0 {
            self.bottom.push(entry);
        } else if !self.bottom.is_empty() && {
            let worst = worst_position(&self.bottom, outranks_bottom);
            outranks_bottom(&entry, &self.bottom[worst])
        } {
            self.bottom.push(entry);
            if self.bottom.len() > cap {
                let worst = worst_position(&self.bottom, outranks_bottom);
                let evicted = self.bottom.swap_remove(worst);
                self.route_to_rest(evicted, rng);
            }
        } else {
            self.route_to_rest(entry, rng);
        }
        // capacity growth can shrink the pool budget on updates that never
        // touch the pool
        let budget = self.pool_budget();
        self.pool.trim(budget);

        let stored = self.stored_scalars();
        let limit = 8.0 * (self.n_seen as f64).sqrt();
        assert!(
            stored as f64 <= limit + 1e-9,
            "scalar stream stored {stored} scalars, limit {limit}"
        );
    }

    fn route_to_rest<R: Rng + ?Sized>(&mut self, entry: ScalarEntry, rng: &mut R) {
        self.rest_count += 1;
        let budget = self.pool_budget();
        self.pool.offer(entry, budget, rng);
    }

    /// One unbiased draw of the attention estimator for query `q`: samples a
    /// stream position from the softmax of q * key and returns its value.
    pub fn query<R: Rng + ?Sized>(&self, q: f64, rng: &mut R) -> Result<f64> {
        if self.n_seen == 0 {
            return Err(Error::EmptyInput("scalar stream state"));
        }
        if !q.is_finite() {
            return Err(Error::NonFinite("scalar query"));
        }

        if self.rest_count == 0 {
            // Everything is stored; run plain Gumbel-max over all of it.
            let mut best_val = 0.0;
            let mut best_noised = f64::NEG_INFINITY;
            for e in self.top.iter().chain(&self.bottom) {
                let noised = q * e.key + sample_gumbel(rng);
                if noised > best_noised {
                    best_noised = noised;
                    best_val = e.value;
                }
            }
            return Ok(best_val);
        }

        // q >= 0 makes larger keys larger scores, so the top buffer is the
        // top set; mirrored for q < 0. q = 0 takes the top branch.
        let (top_set, other) = if q >= 0.0 {
            (&self.top, &self.bottom)
        } else {
            (&self.bottom, &self.top)
        };

        let mut best_val = 0.0;
        let mut best_noised = f64::NEG_INFINITY;
        let mut min_score = f64::INFINITY;
        for e in top_set {
            let score = q * e.key;
            let noised = score + sample_gumbel(rng);
            if noised > best_noised {
                best_noised = noised;
                best_val = e.value;
            }
            min_score = min_score.min(score);
        }
        let cutoff = best_noised - min_score;

        let tail_len = self.n_seen - top_set.len();
        let succ = -(-(-cutoff).exp()).exp_m1();
        let m = binomial_inversion(tail_len as u64, succ, rng)? as usize;
        if m == 0 {
            return Ok(best_val);
        }

        // The tail is other-buffer plus rest; membership of a uniform
        // m-subset splits hypergeometrically.
        let mut m_other = hypergeometric_successes(other.len(), self.rest_count, m, rng);
        let mut m_rest = m - m_other;
        if m_rest > self.pool.len() {
            // The pool covers only part of the rest. Scale both counts down
            // so the buffer/rest composition of the candidates is preserved;
            // with flat scores this keeps the draw exactly uniform over the
            // tail, and in spread regimes the event is already rare.
            let scale = self.pool.len() as f64 / m_rest as f64;
            m_other = ((m_other as f64) * scale).round() as usize;
            m_rest = self.pool.len();
        }

        for e in choose_distinct(other, m_other, rng) {
            let noised = q * e.key + sample_conditional_gumbel_above(cutoff, rng);
            if noised > best_noised {
                best_noised = noised;
                best_val = e.value;
            }
        }
        let pool_entries: Vec<ScalarEntry> = self.pool.entries.iter().map(|(_, e)| *e).collect();
        for e in choose_distinct(&pool_entries, m_rest, rng) {
            let noised = q * e.key + sample_conditional_gumbel_above(cutoff, rng);
            if noised > best_noised {
                best_noised = noised;
                best_val = e.value;
            }
        }
        Ok(best_val)
    }
}

/// Number of "success" members in a uniform without-replacement draw of
/// `draws` items from a population of `successes + failures`.
fn hypergeometric_successes<R: Rng + ?Sized>(
    successes: usize,
    failures: usize,
    draws: usize,
    rng: &mut R,
) -> usize {
    debug_assert!(draws <= successes + failures);
    let mut s = successes;
    let mut f = failures;
    let mut got = 0;
    for _ in 0..draws {
        let total = s + f;
        if total == 0 {
            break;
        }
        if rng.random_range(0..total) < s {
            got += 1;
            s -= 1;
        } else {
            f -= 1;
        }
    }
    got
}

/// Uniform without-replacement choice of `m` entries.
fn choose_distinct<R: Rng + ?Sized>(entries: &[ScalarEntry], m: usize, rng: &mut R) -> Vec<ScalarEntry> {
    debug_assert!(m <= entries.len());
    if m == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..entries.len()).collect();
    for i in 0..m {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    idx[..m].iter().map(|&i| entries[i]).collect()
}
