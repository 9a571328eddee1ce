//! Algebraic manipulation detection code with a polynomial tag.
//!
//! A message is `u` elements `s_1..s_u` of GF(2^m). Encoding draws `x` and
//! appends `tag = x^(u+2) + sum_i s_i * x^i`. The codeword layout is the
//! `u` message blocks, then `x`, then the tag, each block `m` bits with the
//! most significant coefficient first. For any fixed offset `delta != 0` the
//! shifted word verifies for at most `u + 1` values of `x`, so the code is
//! `(u+1)/2^m`-secure. `u + 2` must be odd for the leading term of the
//! difference polynomial to survive in characteristic 2.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NmcError, Result};
use crate::gf2::{BinaryField, BitWord, FieldElem};
use crate::scalar::{Probability, Rational};

/// Largest `log2(#messages * #offsets)` the security oracle enumerates.
pub const ORACLE_LOG2_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AmdParamsJson", into = "AmdParamsJson")]
pub struct AmdParams {
    m: u32,
    u: u32,
    field: BinaryField,
}

#[derive(Serialize, Deserialize)]
struct AmdParamsJson {
    m: u32,
    u: u32,
}

impl TryFrom<AmdParamsJson> for AmdParams {
    type Error = NmcError;

    fn try_from(j: AmdParamsJson) -> Result<Self> {
        AmdParams::new(j.m, j.u)
    }
}

impl From<AmdParams> for AmdParamsJson {
    fn from(p: AmdParams) -> Self {
        AmdParamsJson { m: p.m, u: p.u }
    }
}

impl AmdParams {
    pub fn new(m: u32, u: u32) -> Result<Self> {
        if u == 0 {
            return Err(NmcError::InvalidParams(
                "AMD block count u must be >= 1".into(),
            ));
        }
        if (u + 2).is_multiple_of(2) {
            return Err(NmcError::InvalidParams(format!(
                "u + 2 = {} must be odd over GF(2^m)",
                u + 2
            )));
        }
        let field = BinaryField::new(m)?;
        Ok(Self { m, u, field })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    /// Message length `k = u * m`.
    pub fn message_bits(&self) -> usize {
        (self.u * self.m) as usize
    }

    /// Codeword length `(u + 2) * m`.
    pub fn codeword_bits(&self) -> usize {
        ((self.u + 2) * self.m) as usize
    }

    /// Security bound `(u + 1) / 2^m`.
    pub fn rho(&self) -> Rational {
        Rational::from_counts(u64::from(self.u) + 1, 1u64 << self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmdCode {
    params: AmdParams,
}

impl AmdCode {
    pub fn new(params: AmdParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &AmdParams {
        &self.params
    }

    pub fn tag(&self, s: &[FieldElem], x: FieldElem) -> Result<FieldElem> {
        if s.len() != self.params.u as usize {
            return Err(NmcError::LengthMismatch {
                expected: self.params.u as usize,
                found: s.len(),
            });
        }
        let f = self.params.field;
        for e in s.iter().chain(std::iter::once(&x)) {
            if e.field() != f {
                return Err(NmcError::ModulusMismatch {
                    left: f.modulus(),
                    right: e.field().modulus(),
                });
            }
        }
        Ok(FieldElem::from_raw(f, tag_raw(&f, &raw(s), x.value())))
    }

    /// Splits a `k`-bit message into its `u` field elements.
    pub fn message_elems(&self, s: &BitWord) -> Result<Vec<FieldElem>> {
        let k = self.params.message_bits();
        if s.len() != k {
            return Err(NmcError::LengthMismatch {
                expected: k,
                found: s.len(),
            });
        }
        Ok(read_blocks(&self.params.field, s, self.params.u as usize))
    }

    pub fn encode_elems(&self, s: &[FieldElem], x: FieldElem) -> Result<BitWord> {
        let tag = self.tag(s, x)?;
        let m = self.params.m as usize;
        let mut out = BitWord::zeros(self.params.codeword_bits());
        for (b, e) in s.iter().chain([&x, &tag]).enumerate() {
            write_block(&mut out, b * m, m, e.value());
        }
        Ok(out)
    }

    /// `A(s; x)`: the message bits, then `x`, then the tag.
    pub fn encode(&self, s: &BitWord, x: FieldElem) -> Result<BitWord> {
        let elems = self.message_elems(s)?;
        self.encode_elems(&elems, x)
    }

    /// `V(w)`: the message bits when the tag checks, `None` otherwise.
    pub fn verify(&self, w: &BitWord) -> Result<Option<BitWord>> {
        let n = self.params.codeword_bits();
        if w.len() != n {
            return Err(NmcError::LengthMismatch {
                expected: n,
                found: w.len(),
            });
        }
        let f = self.params.field;
        let u = self.params.u as usize;
        let blocks: Vec<u32> = read_blocks(&f, w, u + 2)
            .iter()
            .map(FieldElem::value)
            .collect();
        let ok = tag_raw(&f, &blocks[..u], blocks[u]) == blocks[u + 1];
        Ok(ok.then(|| w.slice(0, self.params.message_bits())))
    }
}

fn raw(s: &[FieldElem]) -> Vec<u32> {
    s.iter().map(FieldElem::value).collect()
}

/// `x^(u+2) + sum_{i=1..u} s_i x^i` on raw element values.
fn tag_raw(f: &BinaryField, s: &[u32], x: u32) -> u32 {
    let mut acc = 0u32;
    let mut xp = x;
    for &si in s {
        acc ^= f.mul_raw(si, xp);
        xp = f.mul_raw(xp, x);
    }
    acc ^ f.mul_raw(xp, x)
}

fn read_blocks(f: &BinaryField, w: &BitWord, count: usize) -> Vec<FieldElem> {
    let m = f.degree() as usize;
    (0..count)
        .map(|b| {
            let v = (0..m).fold(0u32, |acc, j| (acc << 1) | u32::from(w.get(b * m + j)));
            FieldElem::from_raw(*f, v)
        })
        .collect()
}

fn write_block(w: &mut BitWord, start: usize, m: usize, value: u32) {
    for j in 0..m {
        w.set(start + j, (value >> (m - 1 - j)) & 1 == 1);
    }
}

/// Outcome of the exhaustive AMD security audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmdAudit {
    /// `max_{s, delta != 0} Pr_x[V(A(s; x) + delta) != bottom]`.
    pub max_acceptance: Rational,
    pub rho: Rational,
    /// A message/offset pair attaining the maximum.
    pub worst_message: BitWord,
    pub worst_delta: BitWord,
}

impl AmdAudit {
    pub fn holds(&self) -> bool {
        self.max_acceptance <= self.rho
    }
}

/// Exact maximum acceptance probability of a nonzero additive offset,
/// over every message and every offset, counting all `2^m` choices of `x`.
pub fn security_oracle(params: &AmdParams) -> Result<AmdAudit> {
    let k = params.message_bits();
    let n = params.codeword_bits();
    if k + n > ORACLE_LOG2_LIMIT {
        return Err(NmcError::TooLarge {
            what: "AMD audit (messages x offsets)",
            log2_size: k + n,
            log2_limit: ORACLE_LOG2_LIMIT,
        });
    }
    let f = params.field;
    let u = params.u as usize;
    let m = params.m as usize;
    let order = f.order();
    let mask = order - 1;
    let block = |v: u64, b: usize| -> u32 { ((v >> ((u + 1 - b) * m)) as u32) & mask };

    // Words are packed with block 0 in the most significant bits, matching
    // the bit layout of `encode`.
    let best = (0u64..1 << k)
        .into_par_iter()
        .map(|s_packed| {
            let s: Vec<u32> = (0..u)
                .map(|b| ((s_packed >> ((u - 1 - b) * m)) as u32) & mask)
                .collect();
            let mut best = (0u32, 0u64);
            for delta in 1u64..1 << n {
                let ds: Vec<u32> = (0..u).map(|b| block(delta, b)).collect();
                let dx = block(delta, u);
                let dt = block(delta, u + 1);
                let shifted: Vec<u32> = s.iter().zip(&ds).map(|(a, b)| a ^ b).collect();
                let accepted = (0..order)
                    .filter(|&x| tag_raw(&f, &shifted, x ^ dx) == tag_raw(&f, &s, x) ^ dt)
                    .count() as u32;
                if accepted > best.0 {
                    best = (accepted, delta);
                }
            }
            (best.0, s_packed, best.1)
        })
        // ties resolve to the smallest (message, offset) for a stable report
        .reduce(
            || (0, u64::MAX, u64::MAX),
            |a, b| {
                if (b.0, std::cmp::Reverse((b.1, b.2))) > (a.0, std::cmp::Reverse((a.1, a.2))) {
                    b
                } else {
                    a
                }
            },
        );
    let to_word =
        |len: usize, v: u64| BitWord::from_bits((0..len).rev().map(|i| (v >> i) & 1 == 1));
    Ok(AmdAudit {
        max_acceptance: Rational::from_counts(u64::from(best.0), u64::from(order)),
        rho: params.rho(),
        worst_message: to_word(k, best.1),
        worst_delta: to_word(n, best.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> (AmdCode, BinaryField) {
        let p = AmdParams::new(3, 1).unwrap();
        (AmdCode::new(p), p.field())
    }

    fn w(s: &str) -> BitWord {
        BitWord::parse_bits(s).unwrap()
    }

    #[test]
    fn params_invariants() {
        let p = AmdParams::new(3, 1).unwrap();
        assert_eq!(p.message_bits(), 3);
        assert_eq!(p.codeword_bits(), 9);
        assert_eq!(p.rho(), Rational::from_counts(2, 8));
        assert!(AmdParams::new(3, 2).is_err());
        assert!(AmdParams::new(3, 0).is_err());
        assert_eq!(
            AmdParams::new(4, 3).unwrap().rho(),
            Rational::from_counts(4, 16)
        );
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"{"m":3,"u":1}"#);
        assert_eq!(serde_json::from_str::<AmdParams>(&js).unwrap(), p);
        assert!(serde_json::from_str::<AmdParams>(r#"{"m":3,"u":2}"#).is_err());
    }

    #[test]
    fn encode_examples() {
        let (a, f) = gf8();
        let e = |v| f.elem(v).unwrap();
        assert_eq!(a.encode(&w("000"), e(0)).unwrap(), w("000000000"));
        assert_eq!(a.encode(&w("000"), e(1)).unwrap(), w("000001001"));
        // tag = 1^3 + alpha * 1 = 001 + 010
        assert_eq!(a.encode(&w("010"), e(1)).unwrap(), w("010001011"));
        assert_eq!(a.tag(&[e(0b010)], e(1)).unwrap().value(), 0b011);
    }

    #[test]
    fn verify_examples() {
        let (a, f) = gf8();
        assert_eq!(a.verify(&w("000001000")).unwrap(), None);
        let c = a.encode(&w("101"), f.elem(0b110).unwrap()).unwrap();
        for bit in 6..9 {
            let mut bad = c.clone();
            bad.flip(bit);
            assert_eq!(a.verify(&bad).unwrap(), None);
        }
        assert!(a.verify(&w("0000")).is_err());
    }

    #[test]
    fn correctness_exhaustive() {
        for (m, u) in [(2, 1), (3, 1), (4, 1), (2, 3), (3, 3), (4, 3)] {
            let p = AmdParams::new(m, u).unwrap();
            let a = AmdCode::new(p);
            let k = p.message_bits();
            for s in 0u64..1 << k {
                let s = BitWord::from_low_bits(k, s);
                for x in p.field().elements() {
                    assert_eq!(
                        a.verify(&a.encode(&s, x).unwrap()).unwrap(),
                        Some(s.clone())
                    );
                }
            }
        }
    }

    #[test]
    fn tag_is_linear_in_message() {
        let p = AmdParams::new(3, 3).unwrap();
        let a = AmdCode::new(p);
        let f = p.field();
        let zero_tag = |x| a.tag(&[f.zero(), f.zero(), f.zero()], x).unwrap();
        for x in f.elements() {
            for s in 0u64..64 {
                for t in [0u64, 7, 100, 511] {
                    let s = a
                        .message_elems(&BitWord::from_low_bits(9, s * 8 + 3))
                        .unwrap();
                    let t = a.message_elems(&BitWord::from_low_bits(9, t)).unwrap();
                    let sum: Vec<_> = s.iter().zip(&t).map(|(a, b)| *a + *b).collect();
                    // tag(s) + tag(t) = tag(s + t) + x^(u+2)
                    assert_eq!(
                        a.tag(&s, x).unwrap() + a.tag(&t, x).unwrap(),
                        a.tag(&sum, x).unwrap() + zero_tag(x)
                    );
                }
            }
        }
    }

    #[test]
    fn message_only_offsets_accept_at_roots() {
        // delta on the s block only: accepted iff sum ds_i x^i = 0
        let p = AmdParams::new(3, 1).unwrap();
        let a = AmdCode::new(p);
        let f = p.field();
        for ds in 1u64..8 {
            let mut worst = 0;
            for s in 0u64..8 {
                let mut delta = BitWord::zeros(9);
                for j in 0..3 {
                    delta.set(j, (ds >> (2 - j)) & 1 == 1);
                }
                let acc = f
                    .elements()
                    .filter(|&x| {
                        let c = a.encode(&BitWord::from_low_bits(3, s), x).unwrap();
                        a.verify(&(&c ^ &delta)).unwrap().is_some()
                    })
                    .count();
                worst = worst.max(acc);
            }
            // ds * x = 0 has the single root x = 0
            assert_eq!(worst, 1);
            assert!(Rational::from_counts(worst as u64, 8) <= Rational::from_counts(1, 8));
        }
    }

    #[test]
    fn oracle_small_field() {
        let p = AmdParams::new(2, 1).unwrap();
        let audit = security_oracle(&p).unwrap();
        assert!(audit.holds());
        assert_eq!(audit.rho, Rational::from_counts(1, 2));
        assert!(!audit.worst_delta.is_zero());
        // re-check the reported witness directly
        let a = AmdCode::new(p);
        let hits = p
            .field()
            .elements()
            .filter(|&x| {
                let c = a.encode(&audit.worst_message, x).unwrap();
                a.verify(&(&c ^ &audit.worst_delta)).unwrap().is_some()
            })
            .count() as u64;
        assert_eq!(Rational::from_counts(hits, 4), audit.max_acceptance);
    }

    #[test]
    fn zero_offset_always_verifies() {
        let (a, f) = gf8();
        for x in f.elements() {
            let c = a.encode(&w("110"), x).unwrap();
            assert!(a.verify(&c).unwrap().is_some());
        }
    }

    #[test]
    fn oracle_rejects_oversize() {
        let p = AmdParams::new(4, 3).unwrap();
        assert!(matches!(
            security_oracle(&p),
            Err(NmcError::TooLarge { .. })
        ));
    }
}
