//! Generators for the adversarial streams used in the space and time
//! lower-bound experiments, plus the threshold arithmetic and decoders that
//! read planted bits back out of exact attention outputs.
//!
//! Index-reduction instances plant a bit matrix in the value rows, give every
//! position a near-orthonormal projected-basis key, and decode bit (i, j) by
//! querying with C * f(e_i): the softmax then spikes at position i and the
//! j-th output coordinate lands below delta or above Delta according to the
//! bit. Window-reduction instances do the same inside the last W positions
//! under sliding-window attention. The time-family instances differ from
//! their reference stream sigma in exactly one position while their attention
//! outputs differ by a constant factor.

use rand::Rng;

use crate::attention::{
    exact_attention, sliding_window_attention_for_query, KvCache, SlidingWindowSpec,
};
use crate::error::{Error, Result};
use crate::jl::{verify_pairwise, JlProjector, PreservationReport};
use crate::randkit::{chacha, derive_seed, standard_normal};
use crate::vector::{TokenTriple, Vector};

/// Which construction a hard instance realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    IndexReduction,
    WindowReduction,
    TimeFamily,
    TimeSigma,
    Benign,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::IndexReduction => "index",
            InstanceKind::WindowReduction => "window",
            InstanceKind::TimeFamily => "time-family",
            InstanceKind::TimeSigma => "time-sigma",
            InstanceKind::Benign => "benign",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "index" => Ok(InstanceKind::IndexReduction),
            "window" => Ok(InstanceKind::WindowReduction),
            "time-family" | "family" => Ok(InstanceKind::TimeFamily),
            "time-sigma" | "sigma" => Ok(InstanceKind::TimeSigma),
            "benign" => Ok(InstanceKind::Benign),
            other => Err(Error::Parse(format!("unknown instance kind '{other}'"))),
        }
    }
}

/// Planted bit matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("bit matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch { expected: rows * cols, got: data.len() });
        }
        if data.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("bit matrix entries must be 0 or 1".into()));
        }
        Ok(BitMatrix { rows, cols, data })
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        let data = (0..rows * cols).map(|_| u8::from(rng.random::<bool>())).collect();
        BitMatrix::new(rows, cols, data)
    }

    pub fn filled(rows: usize, cols: usize, bit: u8) -> Result<Self> {
        BitMatrix::new(rows, cols, vec![bit; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn row_vector(&self, r: usize) -> Result<Vector> {
        Vector::new((0..self.cols).map(|c| f64::from(self.get(r, c))).collect())
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }
}

/// A generated adversarial (or benign) stream with its decoding parameters.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub kind: InstanceKind,
    pub n: usize,
    pub d: usize,
    pub w: Option<usize>,
    pub eps: f64,
    pub eta: f64,
    /// Query scaling constant used by the decoder (0 when unused).
    pub c: f64,
    pub stream: Vec<TokenTriple>,
    pub bits: Option<BitMatrix>,
    /// 1-based distinguished position for time-family instances.
    pub planted_index: Option<usize>,
    pub projector_seed: u64,
}

impl HardInstance {
    pub fn id(&self) -> String {
        match self.kind {
            InstanceKind::WindowReduction => format!(
                "{}-n{}-d{}-w{}-s{}",
                self.kind.name(),
                self.n,
                self.d,
                self.w.unwrap_or(0),
                self.projector_seed
            ),
            InstanceKind::TimeFamily => format!(
                "{}-n{}-d{}-i{}",
                self.kind.name(),
                self.n,
                self.d,
                self.planted_index.unwrap_or(0)
            ),
            InstanceKind::TimeSigma => format!("{}-n{}-d{}", self.kind.name(), self.n, self.d),
            _ => format!("{}-n{}-d{}-s{}", self.kind.name(), self.n, self.d, self.projector_seed),
        }
    }
}

/// Readout thresholds: a zero bit stays at or below `lo`, a one bit at or
/// above `hi`; lo + hi = 1 by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub lo: f64,
    pub hi: f64,
}

/// lo = n e^{C eps} / (n e^{C eps} + e^{C(1-eps)}) and hi = 1 - lo, computed
/// in sigmoid form so large C cannot overflow. For eta > 0 the approximate
/// readout margin (1+eta) lo < (1-eta) hi is enforced.
pub fn thresholds(n: usize, c: f64, eps: f64, eta: f64) -> Result<Thresholds> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if !(0.0..0.5).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 0.5), got {eps}")));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1), got {eta}")));
    }
    // lo = 1 / (1 + exp(C(1-2eps) - ln n)), hi = 1 / (1 + exp(ln n - C(1-2eps)))
    let gap = c * (1.0 - 2.0 * eps) - (n as f64).ln();
    let lo = 1.0 / (1.0 + gap.exp());
    let hi = 1.0 / (1.0 + (-gap).exp());
    if eta > 0.0 && (1.0 + eta) * lo >= (1.0 - eta) * hi {
        return Err(Error::ThresholdSeparation(format!(
            "(1+eta)*lo = {} is not below (1-eta)*hi = {} for n={n}, C={c}, eps={eps}, eta={eta}",
            (1.0 + eta) * lo,
            (1.0 - eta) * hi
        )));
    }
    Ok(Thresholds { lo, hi })
}

/// Exact-readout scaling constant C = 2 ln n / (1 - 2 eps).
pub fn exact_readout_scale(n: usize, eps: f64) -> f64 {
    2.0 * (n as f64).ln() / (1.0 - 2.0 * eps)
}

/// Approximate-readout constant: double the margin bound, i.e.
/// (2 ln n - ln((1-eta)/(1+eta))) / (1 - 2 eps). Equals the exact-readout
/// constant when eta = 0.
pub fn approx_readout_scale(n: usize, eps: f64, eta: f64) -> f64 {
    (2.0 * (n as f64).ln() - ((1.0 - eta) / (1.0 + eta)).ln()) / (1.0 - 2.0 * eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 0.5), got {eps}")));
    }
    Ok(())
}

/// Index-reduction stream: q_i = 0, k_i = f(e_i), v_i = row i of the bit
/// matrix. The projector's source space is R^n.
pub fn build_index_instance(x: &BitMatrix, eps: f64, seed: u64) -> Result<HardInstance> {
    check_eps(eps)?;
    let n = x.rows();
    let d = x.cols();
    if n < 2 {
        return Err(Error::InvalidParameter("index instance needs n >= 2".into()));
    }
    let projector = JlProjector::new(seed, n, d)?;
    let mut stream = Vec::with_capacity(n);
    for i in 0..n {
        stream.push(TokenTriple::new(
            Vector::zeros(d)?,
            projector.project_basis(i)?,
            x.row_vector(i)?,
        )?);
    }
    Ok(HardInstance {
        kind: InstanceKind::IndexReduction,
        n,
        d,
        w: None,
        eps,
        eta: 0.0,
        c: exact_readout_scale(n, eps),
        stream,
        bits: Some(x.clone()),
        planted_index: None,
        projector_seed: seed,
    })
}

/// The decoder's query triple for row `i` (1-based): (C * k_i, 0, 0).
pub fn bob_query(inst: &HardInstance, i: usize) -> Result<TokenTriple> {
    if inst.kind != InstanceKind::IndexReduction {
        return Err(Error::KindMismatch { expected: "index", got: inst.kind.name().into() });
    }
    if i == 0 || i > inst.n {
        return Err(Error::IndexOutOfRange { index: i, len: inst.n });
    }
    TokenTriple::new(
        inst.stream[i - 1].k.scaled(inst.c)?,
        Vector::zeros(inst.d)?,
        Vector::zeros(inst.d)?,
    )
}

/// Window-reduction stream: zero keys and values outside the last W
/// positions; inside, k_l = f(e_l) and v_l carries a bit-matrix row.
pub fn build_window_instance(
    x: &BitMatrix,
    n: usize,
    w: usize,
    eps: f64,
    eta: f64,
    seed: u64,
) -> Result<HardInstance> {
    check_eps(eps)?;
    if w == 0 || w > n {
        return Err(Error::InvalidParameter(format!("need 1 <= W <= n, got W={w}, n={n}")));
    }
    if x.rows() != w {
        return Err(Error::DimMismatch { expected: w, got: x.rows() });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("window instance needs n >= 2".into()));
    }
    let d = x.cols();
    let projector = JlProjector::new(seed, n, d)?;
    let mut stream = Vec::with_capacity(n);
    for l in 0..n {
        if l < n - w {
            stream.push(TokenTriple::new(Vector::zeros(d)?, Vector::zeros(d)?, Vector::zeros(d)?)?);
        } else {
            stream.push(TokenTriple::new(
                Vector::zeros(d)?,
                projector.project_basis(l)?,
                x.row_vector(l - (n - w))?,
            )?);
        }
    }
    Ok(HardInstance {
        kind: InstanceKind::WindowReduction,
        n,
        d,
        w: Some(w),
        eps,
        eta,
        c: approx_readout_scale(n, eps, eta),
        stream,
        bits: Some(x.clone()),
        planted_index: None,
        projector_seed: seed,
    })
}

/// The decoder's query for window row `i` in [1, W]: C * k_{n-W+i}.
pub fn bob_window_query(inst: &HardInstance, i: usize) -> Result<Vector> {
    if inst.kind != InstanceKind::WindowReduction {
        return Err(Error::KindMismatch { expected: "window", got: inst.kind.name().into() });
    }
    let w = inst.w.expect("window instances carry W");
    if i == 0 || i > w {
        return Err(Error::IndexOutOfRange { index: i, len: w });
    }
    inst.stream[inst.n - w + i - 1].k.scaled(inst.c)
}

fn time_query(n: usize, d: usize) -> Result<Vector> {
    let scale = 2.0 / d as f64 * ((n - 1) as f64).ln();
    Vector::new(vec![scale; d])
}

fn time_values(n: usize, d: usize) -> Result<Vec<Vector>> {
    let root = exact_isqrt(n)?;
    let mut values = Vec::with_capacity(n);
    for l in 1..=n {
        let fill = if l <= n - root { 1.0 } else { root as f64 };
        values.push(Vector::new(vec![fill; d])?);
    }
    Ok(values)
}

fn exact_isqrt(n: usize) -> Result<usize> {
    let root = (n as f64).sqrt().round() as usize;
    if root * root != n || n < 4 {
        return Err(Error::InvalidParameter(format!("n must be a perfect square >= 4, got {n}")));
    }
    Ok(root)
}

/// Time-family member H(i): the only nonzero key sits at position i, so the
/// final softmax puts weight exactly 1 - 1/n there.
pub fn build_time_family(n: usize, d: usize, i: usize) -> Result<HardInstance> {
    exact_isqrt(n)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let values = time_values(n, d)?;
    let q_final = time_query(n, d)?;
    let mut stream = Vec::with_capacity(n);
    for l in 1..=n {
        let q = if l == n { q_final.clone() } else { Vector::zeros(d)? };
        let k = if l == i {
            Vector::new(vec![1.0; d])?
        } else {
            Vector::zeros(d)?
        };
        stream.push(TokenTriple::new(q, k, values[l - 1].clone())?);
    }
    Ok(HardInstance {
        kind: InstanceKind::TimeFamily,
        n,
        d,
        w: None,
        eps: 0.0,
        eta: 0.0,
        c: 0.0,
        stream,
        bits: None,
        planted_index: Some(i),
        projector_seed: 0,
    })
}

/// Reference stream sigma: all keys zero, so attention is the plain value
/// average (2 - 1/sqrt(n) per coordinate). The final query matches the
/// family's so that H(i) and sigma differ at position i only.
pub fn build_time_sigma(n: usize, d: usize) -> Result<HardInstance> {
    exact_isqrt(n)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let values = time_values(n, d)?;
    let q_final = time_query(n, d)?;
    let mut stream = Vec::with_capacity(n);
    for l in 1..=n {
        let q = if l == n { q_final.clone() } else { Vector::zeros(d)? };
        stream.push(TokenTriple::new(q, Vector::zeros(d)?, values[l - 1].clone())?);
    }
    Ok(HardInstance {
        kind: InstanceKind::TimeSigma,
        n,
        d,
        w: None,
        eps: 0.0,
        eta: 0.0,
        c: 0.0,
        stream,
        bits: None,
        planted_index: None,
        projector_seed: 0,
    })
}

/// Benign random stream: queries and keys are scaled Gaussians so scores are
/// O(1), values are uniform in [1, 2].
pub fn build_benign(n: usize, d: usize, seed: u64) -> Result<HardInstance> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("benign stream needs n >= 1 and d >= 1".into()));
    }
    let mut rng = chacha(derive_seed(seed, 0xbe9));
    let scale = 1.0 / (d as f64).sqrt();
    let mut stream = Vec::with_capacity(n);
    for _ in 0..n {
        let q = Vector::new((0..d).map(|_| standard_normal(&mut rng) * scale).collect())?;
        let k = Vector::new((0..d).map(|_| standard_normal(&mut rng) * scale).collect())?;
        let v = Vector::new((0..d).map(|_| 1.0 + rng.random::<f64>()).collect())?;
        stream.push(TokenTriple::new(q, k, v)?);
    }
    Ok(HardInstance {
        kind: InstanceKind::Benign,
        n,
        d,
        w: None,
        eps: 0.0,
        eta: 0.0,
        c: 0.0,
        stream,
        bits: None,
        planted_index: None,
        projector_seed: seed,
    })
}

/// How the decoder's oracle output is perturbed before thresholding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleNoise {
    /// Exact attention output.
    None,
    /// Worst-case (1 +- eta) multiplicative drift toward the wrong side.
    Adversarial,
    /// Seeded uniform multiplicative drift in [1 - eta, 1 + eta].
    Seeded(u64),
}

/// Decode outcome for a full planted matrix.
#[derive(Clone, Debug)]
pub struct DecodeReport {
    pub jl: PreservationReport,
    pub jl_passed: bool,
    pub bits_total: usize,
    pub bits_correct: usize,
    /// (row, col) positions that failed to decode, 1-based.
    pub failures: Vec<(usize, usize)>,
    pub lo: f64,
    pub hi: f64,
    /// Raw readout values, row-major, for reporting.
    pub readouts: Vec<f64>,
}

impl DecodeReport {
    pub fn all_correct(&self) -> bool {
        self.bits_correct == self.bits_total
    }
}

/// Runs the full decoding experiment: verifies the projection event, reads
/// every planted bit through the exact oracle, and thresholds at
/// (1+eta) lo / (1-eta) hi.
pub fn decode_instance(inst: &HardInstance, eta: f64, noise: OracleNoise) -> Result<DecodeReport> {
    match inst.kind {
        InstanceKind::IndexReduction => decode_index(inst, eta, noise),
        InstanceKind::WindowReduction => decode_window(inst, eta, noise),
        _ => Err(Error::KindMismatch { expected: "index or window", got: inst.kind.name().into() }),
    }
}

fn basis_vector(n: usize, i: usize) -> Result<Vector> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    Vector::new(v)
}

fn perturb(value: f64, planted: u8, eta: f64, noise: OracleNoise, rng: &mut Option<rand_chacha::ChaCha8Rng>) -> f64 {
    match noise {
        OracleNoise::None => value,
        OracleNoise::Adversarial => {
            // push zero-bit readouts up and one-bit readouts down
            if planted == 0 {
                value * (1.0 + eta)
            } else {
                value * (1.0 - eta)
            }
        }
        OracleNoise::Seeded(_) => {
            let r = rng.as_mut().expect("seeded noise carries an rng");
            value * (1.0 - eta + 2.0 * eta * r.random::<f64>())
        }
    }
}

fn noise_rng(noise: OracleNoise) -> Option<rand_chacha::ChaCha8Rng> {
    match noise {
        OracleNoise::Seeded(seed) => Some(chacha(seed)),
        _ => None,
    }
}

fn decode_index(inst: &HardInstance, eta: f64, noise: OracleNoise) -> Result<DecodeReport> {
    let bits = inst
        .bits
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("instance carries no planted bits".into()))?;
    let th = thresholds(inst.n, inst.c, inst.eps, eta)?;

    let points: Vec<Vector> = (0..inst.n).map(|i| basis_vector(inst.n, i)).collect::<Result<_>>()?;
    let projected: Vec<Vector> = inst.stream.iter().map(|t| t.k.clone()).collect();
    let jl = verify_pairwise(&points, &projected, inst.eps)?;

    let mut rng = noise_rng(noise);
    let mut failures = Vec::new();
    let mut readouts = Vec::with_capacity(inst.n * inst.d);
    let mut correct = 0;
    for row in 1..=inst.n {
        let query = bob_query(inst, row)?;
        let mut cache = KvCache::from_triples(&inst.stream)?;
        cache.append_triple(&query)?;
        let out = exact_attention(&cache, &query.q)?;
        for col in 0..inst.d {
            let planted = bits.get(row - 1, col);
            let value = perturb(out[col], planted, eta, noise, &mut rng);
            readouts.push(value);
            if bit_decodes(value, planted, th, eta) {
                correct += 1;
            } else {
                failures.push((row, col + 1));
            }
        }
    }
    Ok(DecodeReport {
        jl_passed: jl.passed,
        jl,
        bits_total: inst.n * inst.d,
        bits_correct: correct,
        failures,
        lo: th.lo,
        hi: th.hi,
        readouts,
    })
}

fn decode_window(inst: &HardInstance, eta: f64, noise: OracleNoise) -> Result<DecodeReport> {
    let bits = inst
        .bits
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("instance carries no planted bits".into()))?;
    let w = inst.w.expect("window instances carry W");
    let th = thresholds(inst.n, inst.c, inst.eps, eta)?;

    // Only the last W keys are projections; the earlier ones are exactly zero.
    let points: Vec<Vector> =
        (inst.n - w..inst.n).map(|i| basis_vector(inst.n, i)).collect::<Result<_>>()?;
    let projected: Vec<Vector> = inst.stream[inst.n - w..].iter().map(|t| t.k.clone()).collect();
    let jl = verify_pairwise(&points, &projected, inst.eps)?;

    let keys: Vec<Vector> = inst.stream.iter().map(|t| t.k.clone()).collect();
    let values: Vec<Vector> = inst.stream.iter().map(|t| t.v.clone()).collect();
    let spec = SlidingWindowSpec::new(w)?;

    let mut rng = noise_rng(noise);
    let mut failures = Vec::new();
    let mut readouts = Vec::with_capacity(w * inst.d);
    let mut correct = 0;
    for row in 1..=w {
        let query = bob_window_query(inst, row)?;
        let out = sliding_window_attention_for_query(&keys, &values, spec, &query)?;
        for col in 0..inst.d {
            let planted = bits.get(row - 1, col);
            let value = perturb(out[col], planted, eta, noise, &mut rng);
            readouts.push(value);
            if bit_decodes(value, planted, th, eta) {
                correct += 1;
            } else {
                failures.push((row, col + 1));
            }
        }
    }
    Ok(DecodeReport {
        jl_passed: jl.passed,
        jl,
        bits_total: w * inst.d,
        bits_correct: correct,
        failures,
        lo: th.lo,
        hi: th.hi,
        readouts,
    })
}

/// The planted bit decodes iff the (possibly perturbed) readout lands on its
/// side of the eta-widened thresholds.
fn bit_decodes(value: f64, planted: u8, th: Thresholds, eta: f64) -> bool {
    if planted == 0 {
        value <= (1.0 + eta) * th.lo
    } else {
        value >= (1.0 - eta) * th.hi
    }
}
