//! Linear error-correcting secret sharing over a binary linear code.
//!
//! `E(m; r) = m·G_msg + r·G_rnd` and `D` returns the message coordinates of
//! a codeword of the stacked code `[G_msg; G_rnd]`, or ⊥ for any word
//! outside it. Linearity holds by construction, the distance parameter is
//! the minimum distance of the stacked code, and the secrecy parameter is
//! one less than the dual distance of `G_rnd`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NmcError, Result};
use crate::gf2::{dual_distance, min_distance, BitWord, Gf2Matrix, RowSpaceSolver};

/// Largest code length accepted by the search and the exhaustive certifiers.
pub const MAX_EXACT_LEN: usize = 24;

/// Linearity is certified over all `(c, delta)` pairs up to this length and
/// by sampling above it.
pub const LINEARITY_EXHAUSTIVE_MAX_N: usize = 12;

/// Default number of sampled `(c, delta)` pairs for long codes.
pub const LINEARITY_DEFAULT_SAMPLES: u64 = 1_000_000;

/// Random candidates tried for each generator row during the search.
const ROW_ATTEMPTS: usize = 256;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LecssJson", into = "LecssJson")]
pub struct LecssParams {
    pub n: usize,
    pub k_msg: usize,
    pub z: usize,
    /// Certified distance: every nonzero word of weight `< d` decodes to ⊥.
    pub d: usize,
    /// Certified secrecy: codeword bits are `t`-wise independent and uniform.
    pub t: usize,
    pub g_msg: Gf2Matrix,
    pub g_rnd: Gf2Matrix,
    /// Set once all three exhaustive certifiers have passed.
    pub certified: bool,
}

#[derive(Serialize, Deserialize)]
struct LecssJson {
    n: usize,
    k_msg: usize,
    z: usize,
    d: usize,
    t: usize,
    g_msg: Vec<BitWord>,
    g_rnd: Vec<BitWord>,
    #[serde(default)]
    certified: bool,
}

impl TryFrom<LecssJson> for LecssParams {
    type Error = NmcError;

    fn try_from(j: LecssJson) -> Result<Self> {
        if j.g_msg.len() != j.k_msg || j.g_rnd.len() != j.z {
            return Err(NmcError::Parse(format!(
                "declared k_msg={} z={} but found {} and {} rows",
                j.k_msg,
                j.z,
                j.g_msg.len(),
                j.g_rnd.len()
            )));
        }
        let g_msg = Gf2Matrix::new(j.n, j.g_msg)?;
        let g_rnd = Gf2Matrix::new(j.n, j.g_rnd)?;
        let mut p = LecssParams::from_generators(g_msg, g_rnd)?;
        if j.d > p.d || j.t > p.t {
            return Err(NmcError::InvalidParams(format!(
                "declared (d={}, t={}) exceeds the generators' (d={}, t={})",
                j.d, j.t, p.d, p.t
            )));
        }
        p.d = j.d;
        p.t = j.t;
        p.certified = j.certified;
        Ok(p)
    }
}

impl From<LecssParams> for LecssJson {
    fn from(p: LecssParams) -> Self {
        LecssJson {
            n: p.n,
            k_msg: p.k_msg,
            z: p.z,
            d: p.d,
            t: p.t,
            g_msg: p.g_msg.rows().to_vec(),
            g_rnd: p.g_rnd.rows().to_vec(),
            certified: p.certified,
        }
    }
}

impl LecssParams {
    /// Builds parameters from generators, computing the largest `d` and `t`
    /// they support. The stacked matrix must have full row rank.
    pub fn from_generators(g_msg: Gf2Matrix, g_rnd: Gf2Matrix) -> Result<Self> {
        let stacked = g_msg.stack(&g_rnd)?;
        let n = stacked.ncols();
        if n > MAX_EXACT_LEN {
            return Err(NmcError::TooLarge {
                what: "LECSS code length",
                log2_size: n,
                log2_limit: MAX_EXACT_LEN,
            });
        }
        let d = min_distance(&stacked)?;
        let t = dual_distance(&g_rnd)? - 1;
        Ok(Self {
            n,
            k_msg: g_msg.nrows(),
            z: g_rnd.nrows(),
            d,
            t: t.min(n),
            g_msg,
            g_rnd,
            certified: false,
        })
    }

    pub fn stacked(&self) -> Gf2Matrix {
        self.g_msg
            .stack(&self.g_rnd)
            .expect("generators share a length")
    }

    /// `d > 3n/8`, the distance premise of the affine non-malleability bound.
    pub fn meets_affine_distance_premise(&self) -> bool {
        8 * self.d > 3 * self.n
    }
}

impl fmt::Debug for LecssParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LecssParams(n={}, k_msg={}, z={}, d={}, t={}, certified={})",
            self.n, self.k_msg, self.z, self.d, self.t, self.certified
        )
    }
}

/// An instantiated LECSS scheme with its decoder precomputed.
#[derive(Clone, Debug)]
pub struct Lecss {
    params: LecssParams,
    solver: RowSpaceSolver,
}

impl Lecss {
    pub fn new(params: LecssParams) -> Result<Self> {
        let solver = RowSpaceSolver::new(&params.stacked())?;
        Ok(Self { params, solver })
    }

    pub fn params(&self) -> &LecssParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn encode(&self, msg: &BitWord, r: &BitWord) -> Result<BitWord> {
        let mut c = self.params.g_msg.vec_mul(msg)?;
        c.xor_in_place(&self.params.g_rnd.vec_mul(r)?);
        Ok(c)
    }

    /// The message component of `c`, or `None` (⊥) if `c` is not a codeword.
    pub fn decode(&self, c: &BitWord) -> Result<Option<BitWord>> {
        Ok(self
            .solver
            .solve(c)?
            .map(|coords| coords.slice(0, self.params.k_msg)))
    }

    /// Message and randomness components of a codeword.
    pub fn decode_full(&self, c: &BitWord) -> Result<Option<(BitWord, BitWord)>> {
        let k = self.params.k_msg;
        Ok(self
            .solver
            .solve(c)?
            .map(|coords| (coords.slice(0, k), coords.slice(k, coords.len()))))
    }
}

/// Which defining property a certificate covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Linearity,
    Distance,
    Secrecy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    /// Number of individual checks performed.
    pub checked: u64,
    pub exhaustive: bool,
    pub counterexample: Option<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearityMode {
    Exhaustive,
    Sampled { pairs: u64, seed: u64 },
}

impl LinearityMode {
    /// Exhaustive up to [`LINEARITY_EXHAUSTIVE_MAX_N`], sampled above.
    pub fn for_length(n: usize, seed: u64) -> Self {
        if n <= LINEARITY_EXHAUSTIVE_MAX_N {
            Self::Exhaustive
        } else {
            Self::Sampled {
                pairs: LINEARITY_DEFAULT_SAMPLES,
                seed,
            }
        }
    }
}

fn check_linear_pair(
    code: &Lecss,
    c: &BitWord,
    dc: &BitWord,
    delta: &BitWord,
) -> Result<Option<String>> {
    let expected = code.decode(delta)?.map(|dd| dc ^ &dd);
    let got = code.decode(&(c ^ delta))?;
    Ok((got != expected).then(|| {
        format!(
            "D({} + {}) = {:?}, expected {:?}",
            c.to_text(),
            delta.to_text(),
            got.map(|w| w.to_text()),
            expected.map(|w| w.to_text())
        )
    }))
}

/// For valid `c` and any `delta`: `D(c + delta)` is ⊥ when `D(delta)` is ⊥
/// and `D(c) + D(delta)` otherwise.
pub fn certify_linearity(code: &Lecss, mode: LinearityMode) -> Result<Certificate> {
    let p = code.params();
    let n = p.n;
    let dim = p.k_msg + p.z;
    let stacked = p.stacked();
    let cert = |checked, exhaustive, counterexample| Certificate {
        property: Property::Linearity,
        checked,
        exhaustive,
        counterexample,
    };
    match mode {
        LinearityMode::Exhaustive => {
            if n + dim > 2 * MAX_EXACT_LEN {
                return Err(NmcError::TooLarge {
                    what: "linearity pairs",
                    log2_size: n + dim,
                    log2_limit: 2 * MAX_EXACT_LEN,
                });
            }
            let valid: Vec<(BitWord, BitWord)> = (0u64..1 << dim)
                .map(|v| {
                    let c = stacked.vec_mul(&BitWord::from_low_bits(dim, v))?;
                    let dc = code.decode(&c)?.expect("row-space word decodes");
                    Ok((c, dc))
                })
                .collect::<Result<_>>()?;
            let bad = (0u64..1 << n)
                .into_par_iter()
                .map(|dv| -> Result<Option<String>> {
                    let delta = BitWord::from_low_bits(n, dv);
                    for (c, dc) in &valid {
                        if let Some(msg) = check_linear_pair(code, c, dc, &delta)? {
                            return Ok(Some(msg));
                        }
                    }
                    Ok(None)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .next();
            Ok(cert((valid.len() as u64) << n, true, bad))
        }
        LinearityMode::Sampled { pairs, seed } => {
            const CHUNK: u64 = 1 << 14;
            let chunks = pairs.div_ceil(CHUNK);
            let bad = (0..chunks)
                .into_par_iter()
                .map(|ci| -> Result<Option<String>> {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(ci);
                    let count = CHUNK.min(pairs - ci * CHUNK);
                    for _ in 0..count {
                        let coords = random_word(&mut rng, dim);
                        let c = stacked.vec_mul(&coords)?;
                        let dc = code.decode(&c)?.expect("row-space word decodes");
                        // half the offsets are codewords so the additive branch is exercised
                        let delta = if rng.gen::<bool>() {
                            stacked.vec_mul(&random_word(&mut rng, dim))?
                        } else {
                            random_word(&mut rng, n)
                        };
                        if let Some(msg) = check_linear_pair(code, &c, &dc, &delta)? {
                            return Ok(Some(msg));
                        }
                    }
                    Ok(None)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .next();
            Ok(cert(pairs, false, bad))
        }
    }
}

fn random_word<R: Rng>(rng: &mut R, len: usize) -> BitWord {
    BitWord::from_bits((0..len).map(|_| rng.gen::<bool>()))
}

/// Calls `visit` on every `len`-bit word of the given weight, in
/// lexicographic order of the support. Stops early when `visit` returns true.
pub(crate) fn for_each_word_of_weight(
    len: usize,
    weight: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    if weight > len {
        return;
    }
    let mut idx: Vec<usize> = (0..weight).collect();
    loop {
        if visit(&idx) {
            return;
        }
        // rightmost index that can still move right
        let mut i = weight;
        while i > 0 && idx[i - 1] == len - weight + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..weight {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every nonzero word of weight `< d` decodes to ⊥.
pub fn certify_distance(code: &Lecss) -> Result<Certificate> {
    let p = code.params();
    let mut checked = 0u64;
    let mut bad = None;
    for w in 1..p.d.min(p.n + 1) {
        let mut err = None;
        for_each_word_of_weight(p.n, w, |support| {
            checked += 1;
            let word = BitWord::from_positions(p.n, support).expect("support in range");
            match code.decode(&word) {
                Ok(Some(m)) => {
                    bad = Some(format!(
                        "weight-{w} word {} decodes to {}",
                        word.to_text(),
                        m.to_text()
                    ));
                    true
                }
                Ok(None) => false,
                Err(e) => {
                    err = Some(e);
                    true
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if bad.is_some() {
            break;
        }
    }
    Ok(Certificate {
        property: Property::Distance,
        checked,
        exhaustive: true,
        counterexample: bad,
    })
}

/// Exact uniformity check: the bits of `values` at `positions` take every
/// pattern equally often.
pub(crate) fn is_uniform_on(values: &[BitWord], positions: &[usize]) -> bool {
    let s = positions.len();
    let patterns = 1usize << s;
    if !values.len().is_multiple_of(patterns) {
        return false;
    }
    let mut counts = vec![0usize; patterns];
    for v in values {
        let idx = positions
            .iter()
            .fold(0usize, |acc, &p| (acc << 1) | usize::from(v.get(p)));
        counts[idx] += 1;
    }
    let expect = values.len() / patterns;
    counts.iter().all(|&c| c == expect)
}

/// For every message and every set of at most `t` positions, the encoding
/// restricted to those positions is exactly uniform over the randomness.
pub fn certify_secrecy(code: &Lecss) -> Result<Certificate> {
    let p = code.params();
    if p.k_msg + p.z > MAX_EXACT_LEN {
        return Err(NmcError::TooLarge {
            what: "secrecy enumeration (messages x randomness)",
            log2_size: p.k_msg + p.z,
            log2_limit: MAX_EXACT_LEN,
        });
    }
    let t = p.t.min(p.n);
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=t {
        for_each_word_of_weight(p.n, size, |s| {
            subsets.push(s.to_vec());
            false
        });
    }
    let results = (0u64..1 << p.k_msg)
        .into_par_iter()
        .map(|mv| -> Result<Option<String>> {
            let msg = BitWord::from_low_bits(p.k_msg, mv);
            let encodings = (0u64..1 << p.z)
                .map(|rv| code.encode(&msg, &BitWord::from_low_bits(p.z, rv)))
                .collect::<Result<Vec<_>>>()?;
            Ok(subsets
                .iter()
                .find(|s| !is_uniform_on(&encodings, s))
                .map(|s| {
                    format!(
                        "message {} is not uniform on positions {:?}",
                        msg.to_text(),
                        s
                    )
                }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate {
        property: Property::Secrecy,
        checked: (subsets.len() as u64) << p.k_msg,
        exhaustive: true,
        counterexample: results.into_iter().flatten().next(),
    })
}

/// Runs all three certifiers and marks the parameters certified when every
/// one passes.
pub fn certify_all(params: &mut LecssParams, seed: u64) -> Result<Vec<Certificate>> {
    let code = Lecss::new(params.clone())?;
    let certs = vec![
        certify_linearity(&code, LinearityMode::for_length(params.n, seed))?,
        certify_distance(&code)?,
        certify_secrecy(&code)?,
    ];
    params.certified = certs.iter().all(Certificate::passed);
    Ok(certs)
}

/// Incrementally built code over `u32` words (bit `i` = position `i`),
/// keeping every codeword so a candidate row is checked in one pass.
struct GrowingCode {
    n: usize,
    d_target: usize,
    words: Vec<u32>,
}

impl GrowingCode {
    fn new(n: usize, d_target: usize) -> Self {
        Self {
            n,
            d_target,
            words: vec![0],
        }
    }

    fn dim(&self) -> usize {
        self.words.len().trailing_zeros() as usize
    }

    /// Adds `row` when it is outside the span and keeps distance >= d_target.
    fn try_add(&mut self, row: u32) -> bool {
        let ok = self
            .words
            .iter()
            .all(|&c| ((c ^ row).count_ones() as usize) >= self.d_target.max(1));
        if ok {
            let extra: Vec<u32> = self.words.iter().map(|&c| c ^ row).collect();
            self.words.extend(extra);
        }
        ok
    }

    fn try_add_random<R: Rng>(&mut self, rng: &mut R) -> Option<u32> {
        let mask = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        if self.dim() >= self.n || self.dim() >= MAX_EXACT_LEN {
            return None;
        }
        (0..ROW_ATTEMPTS)
            .map(|_| rng.gen::<u32>() & mask)
            .find(|&row| row != 0 && self.try_add(row))
    }
}

fn to_matrix(n: usize, rows: &[u32]) -> Gf2Matrix {
    Gf2Matrix::new(
        n,
        rows.iter()
            .map(|&r| BitWord::from_low_bits(n, u64::from(r)))
            .collect(),
    )
    .expect("rows have length n")
}

fn dual_distance_rows(n: usize, rows: &[u32]) -> usize {
    dual_distance(&to_matrix(n, rows)).expect("rows are independent")
}

fn search_trial(
    n: usize,
    k_msg: usize,
    d_target: usize,
    t_target: usize,
    seed: u64,
    trial: u64,
) -> Option<LecssParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut code = GrowingCode::new(n, d_target);
    let mut rnd: Vec<u32> = Vec::new();
    // randomness rows until the secrecy target is met
    while dual_distance_rows(n, &rnd) <= t_target {
        if code.dim() + k_msg >= n {
            return None;
        }
        rnd.push(code.try_add_random(&mut rng)?);
    }
    let mut msg: Vec<u32> = Vec::with_capacity(k_msg);
    for _ in 0..k_msg {
        msg.push(code.try_add_random(&mut rng)?);
    }
    // then as many more randomness rows as the distance target allows
    while let Some(row) = code.try_add_random(&mut rng) {
        rnd.push(row);
    }
    let params = LecssParams::from_generators(to_matrix(n, &msg), to_matrix(n, &rnd)).ok()?;
    (params.d >= d_target && params.t >= t_target).then_some(params)
}

/// Seeded randomized search for a LECSS with distance `>= d_target` and
/// secrecy `>= t_target`.
///
/// Trial `i` draws from its own ChaCha stream, and the lowest-index
/// successful trial is returned, so the result depends only on
/// `(seed, trials)` and not on scheduling.
pub fn search_lecss(
    n: usize,
    k_msg: usize,
    d_target: usize,
    t_target: usize,
    trials: u64,
    seed: u64,
) -> Result<LecssParams> {
    if n == 0 || n > MAX_EXACT_LEN {
        return Err(NmcError::InvalidParams(format!(
            "search length n={n} outside 1..={MAX_EXACT_LEN}"
        )));
    }
    if k_msg == 0 || k_msg > n {
        return Err(NmcError::InvalidParams(format!(
            "k_msg={k_msg} must be in 1..={n}"
        )));
    }
    (0..trials)
        .into_par_iter()
        .find_map_first(|trial| search_trial(n, k_msg, d_target, t_target, seed, trial))
        .ok_or(NmcError::NotFound { trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Lecss {
        let g_msg = Gf2Matrix::from_bit_rows(&["1110000", "0110100"]).unwrap();
        let g_rnd = Gf2Matrix::from_bit_rows(&["0001111"]).unwrap();
        Lecss::new(LecssParams::from_generators(g_msg, g_rnd).unwrap()).unwrap()
    }

    fn w(s: &str) -> BitWord {
        BitWord::parse_bits(s).unwrap()
    }

    #[test]
    fn encode_examples() {
        let c = toy();
        assert_eq!(c.encode(&w("00"), &w("0")).unwrap(), w("0000000"));
        assert_eq!(c.encode(&w("10"), &w("0")).unwrap(), w("1110000"));
        let a = c.encode(&w("10"), &w("1")).unwrap();
        let b = c.encode(&w("11"), &w("1")).unwrap();
        assert_eq!(&a ^ &b, c.encode(&w("01"), &w("0")).unwrap());
        assert!(c.encode(&w("1"), &w("0")).is_err());
    }

    #[test]
    fn decode_examples() {
        let c = toy();
        for m in 0..4 {
            for r in 0..2 {
                let msg = BitWord::from_low_bits(2, m);
                let cw = c.encode(&msg, &BitWord::from_low_bits(1, r)).unwrap();
                assert_eq!(c.decode(&cw).unwrap(), Some(msg));
            }
        }
        assert_eq!(
            c.decode(&BitWord::zeros(7)).unwrap(),
            Some(BitWord::zeros(2))
        );
        let d = c.params().d;
        for_each_word_of_weight(7, 1, |s| {
            assert!(d > 1);
            assert_eq!(
                c.decode(&BitWord::from_positions(7, s).unwrap()).unwrap(),
                None
            );
            false
        });
    }

    #[test]
    fn weight_enumeration_counts() {
        for (n, w, expect) in [(5, 0, 1), (5, 2, 10), (7, 3, 35), (4, 4, 1), (3, 4, 0)] {
            let mut count = 0;
            let mut last: Option<Vec<usize>> = None;
            for_each_word_of_weight(n, w, |s| {
                assert!(s.windows(2).all(|p| p[0] < p[1]));
                if let Some(prev) = &last {
                    assert!(prev.as_slice() < s);
                }
                last = Some(s.to_vec());
                count += 1;
                false
            });
            assert_eq!(count, expect, "C({n},{w})");
        }
    }

    #[test]
    fn linearity_examples() {
        let c = toy();
        let cert = certify_linearity(&c, LinearityMode::Exhaustive).unwrap();
        assert!(cert.passed(), "{cert:?}");
        assert_eq!(cert.checked, 8 * 128);
        let cw = c.encode(&w("10"), &w("1")).unwrap();
        let delta = c.encode(&w("01"), &w("1")).unwrap();
        assert_eq!(c.decode(&(&cw ^ &delta)).unwrap(), Some(w("11")));
        let sampled = certify_linearity(
            &c,
            LinearityMode::Sampled {
                pairs: 5000,
                seed: 3,
            },
        )
        .unwrap();
        assert!(sampled.passed());
    }

    #[test]
    fn secrecy_agrees_with_dual_distance() {
        // G_rnd with an all-zero column leaks that bit
        let leaky = LecssParams::from_generators(
            Gf2Matrix::from_bit_rows(&["1100"]).unwrap(),
            Gf2Matrix::from_bit_rows(&["0111"]).unwrap(),
        )
        .unwrap();
        assert_eq!(leaky.t, 0);
        let mut forced = leaky.clone();
        forced.t = 1;
        let cert = certify_secrecy(&Lecss::new(forced).unwrap()).unwrap();
        assert!(!cert.passed());

        let hamming_rnd =
            Gf2Matrix::from_bit_rows(&["1000110", "0100011", "0010111", "0001101"]).unwrap();
        let p = LecssParams::from_generators(Gf2Matrix::empty(7), hamming_rnd.clone()).unwrap();
        assert_eq!(p.t, 3);
        assert!(certify_secrecy(&Lecss::new(p.clone()).unwrap())
            .unwrap()
            .passed());
        let mut over = p;
        over.t = 4;
        assert!(!certify_secrecy(&Lecss::new(over).unwrap())
            .unwrap()
            .passed());
    }

    #[test]
    fn distance_certifier_catches_overclaim() {
        let mut p = toy().params().clone();
        let d = p.d;
        assert!(certify_distance(&Lecss::new(p.clone()).unwrap())
            .unwrap()
            .passed());
        p.d = d + 1;
        assert!(!certify_distance(&Lecss::new(p).unwrap()).unwrap().passed());
    }

    #[test]
    fn search_examples() {
        let p = search_lecss(7, 1, 3, 1, 200, 7).unwrap();
        assert!(p.d >= 3 && p.t >= 1);
        let mut cp = p.clone();
        let certs = certify_all(&mut cp, 1).unwrap();
        assert!(certs.iter().all(Certificate::passed), "{certs:?}");
        assert!(cp.certified);

        assert_eq!(
            search_lecss(4, 1, 4, 2, 300, 1),
            Err(NmcError::NotFound { trials: 300 })
        );

        let triv = search_lecss(5, 2, 1, 0, 1, 0).unwrap();
        assert_eq!(triv.k_msg, 2);
        assert!(triv.d >= 1);
    }

    #[test]
    fn search_is_deterministic() {
        let a = search_lecss(12, 4, 3, 2, 20_000, 42).unwrap();
        let b = search_lecss(12, 4, 3, 2, 20_000, 42).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool
            .install(|| search_lecss(12, 4, 3, 2, 20_000, 42))
            .unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let p = toy().params().clone();
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains(r#""g_msg":["7:70","7:34"]"#), "{js}");
        let back: LecssParams = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
        let inflated = js.replace(&format!(r#""d":{}"#, p.d), r#""d":6"#);
        assert!(serde_json::from_str::<LecssParams>(&inflated).is_err());
    }

    #[test]
    fn affine_premise_flag() {
        let p = toy().params().clone();
        assert_eq!(p.meets_affine_distance_premise(), 8 * p.d > 21);
    }
}
