use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{NmcError, Result};

const LIMB_BITS: usize = 64;

/// A fixed-length vector over GF(2).
///
/// Position 0 is the first coordinate of the word (index 1 in one-based
/// notation). In the text form it is the most significant bit, so the hex
/// string reads like the bit string left to right.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    len: usize,
    limbs: SmallVec<[u64; 2]>,
}

fn limb_count(len: usize) -> usize {
    len.div_ceil(LIMB_BITS)
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            limbs: SmallVec::from_elem(0, limb_count(len)),
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut w = Self::zeros(len);
        for limb in w.limbs.iter_mut() {
            *limb = u64::MAX;
        }
        w.mask_tail();
        w
    }

    /// Unit vector with a single 1 at `pos`.
    pub fn unit(len: usize, pos: usize) -> Self {
        let mut w = Self::zeros(len);
        w.set(pos, true);
        w
    }

    /// Word whose position `i` holds bit `i` of `value`. Bits of `value`
    /// at or above `len` are discarded.
    pub fn from_low_bits(len: usize, value: u64) -> Self {
        let mut w = Self::zeros(len);
        if len > 0 {
            w.limbs[0] = value;
            w.mask_tail();
        }
        w
    }

    /// Inverse of [`BitWord::from_low_bits`] for words of at most 64 bits.
    pub fn low_bits(&self) -> u64 {
        assert!(self.len <= LIMB_BITS, "low_bits on a {}-bit word", self.len);
        self.limbs.first().copied().unwrap_or(0)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut w = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            w.set(i, b);
        }
        w
    }

    /// Parses a plain `0`/`1` string such as `"1011"`.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | ' ' => {}
                other => return Err(NmcError::Parse(format!("bad bit character {other:?}"))),
            }
        }
        Ok(Self::from_bits(bits))
    }

    /// Word with ones exactly at the given positions.
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut w = Self::zeros(len);
        for &p in positions {
            if p >= len {
                return Err(NmcError::InvalidParams(format!(
                    "position {p} out of range for length {len}"
                )));
            }
            w.set(p, true);
        }
        Ok(w)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        assert!(
            pos < self.len,
            "bit {pos} out of range for length {}",
            self.len
        );
        (self.limbs[pos / LIMB_BITS] >> (pos % LIMB_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, pos: usize, value: bool) {
        assert!(
            pos < self.len,
            "bit {pos} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (pos % LIMB_BITS);
        if value {
            self.limbs[pos / LIMB_BITS] |= mask;
        } else {
            self.limbs[pos / LIMB_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, pos: usize) {
        assert!(
            pos < self.len,
            "bit {pos} out of range for length {}",
            self.len
        );
        self.limbs[pos / LIMB_BITS] ^= 1u64 << (pos % LIMB_BITS);
    }

    pub fn weight(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions holding a 1, in increasing order.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.limbs.iter().enumerate().flat_map(|(li, &limb)| {
            let mut rest = limb;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(li * LIMB_BITS + tz)
            })
        })
    }

    /// Lowest set position, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.limbs
            .iter()
            .enumerate()
            .find(|(_, &l)| l != 0)
            .map(|(i, &l)| i * LIMB_BITS + l.trailing_zeros() as usize)
    }

    pub fn try_xor(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.xor_in_place(other);
        Ok(out)
    }

    /// XORs `other` into `self`. Panics on length mismatch.
    #[inline]
    pub fn xor_in_place(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of words with different lengths");
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a ^= *b;
        }
    }

    /// Inner product over GF(2).
    #[inline]
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot of words with different lengths");
        self.limbs
            .iter()
            .zip(other.limbs.iter())
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.ones_positions() {
            out.set(i, true);
        }
        for i in other.ones_positions() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Sub-word covering positions `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(
            start <= end && end <= self.len,
            "slice {start}..{end} of {}",
            self.len
        );
        let mut out = Self::zeros(end - start);
        for i in self.ones_positions().filter(|&i| i >= start && i < end) {
            out.set(i - start, true);
        }
        out
    }

    pub fn restrict(&self, positions: &[usize]) -> Self {
        Self::from_bits(positions.iter().map(|&p| self.get(p)))
    }

    /// Text form: plain hex when the length is a multiple of four,
    /// otherwise `"<len>:<hex>"`. Most significant nibble first, position 0
    /// is the most significant bit.
    pub fn to_text(&self) -> String {
        let digits = self.len.div_ceil(4);
        let pad = digits * 4 - self.len;
        let mut hex = String::with_capacity(digits);
        for d in 0..digits {
            let mut nibble = 0u32;
            for j in 0..4 {
                // padded bit index, position = idx - pad
                let idx = d * 4 + j;
                nibble <<= 1;
                if idx >= pad && self.get(idx - pad) {
                    nibble |= 1;
                }
            }
            hex.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        if self.len.is_multiple_of(4) && self.len > 0 {
            hex
        } else {
            format!("{}:{}", self.len, hex)
        }
    }

    /// Parses the text form. A bare hex string has length `4 * digits`.
    pub fn from_text(s: &str) -> Result<Self> {
        let s = s.trim();
        let (len, hex) = match s.split_once(':') {
            Some((l, h)) => {
                let len: usize = l
                    .trim()
                    .parse()
                    .map_err(|_| NmcError::Parse(format!("bad length prefix in {s:?}")))?;
                (Some(len), h.trim())
            }
            None => (None, s),
        };
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| NmcError::Parse(format!("bad hex digit {ch:?} in {s:?}")))?;
            for j in (0..4).rev() {
                bits.push((v >> j) & 1 == 1);
            }
        }
        let len = len.unwrap_or(bits.len());
        if len > bits.len() || bits.len() - len >= 4 {
            return Err(NmcError::Parse(format!(
                "length {len} does not fit {} hex digits",
                hex.len()
            )));
        }
        let pad = bits.len() - len;
        if bits[..pad].iter().any(|&b| b) {
            return Err(NmcError::Parse(format!(
                "value in {s:?} exceeds declared length {len}"
            )));
        }
        Ok(Self::from_bits(bits[pad..].iter().copied()))
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(NmcError::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    fn mask_tail(&mut self) {
        let rem = self.len % LIMB_BITS;
        if rem != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

pub fn hamming_weight(x: &BitWord) -> usize {
    x.weight()
}

/// Number of positions where `x` and `y` differ, i.e. the weight of `x ^ y`.
pub fn hamming_distance(x: &BitWord, y: &BitWord) -> Result<usize> {
    x.check_len(y)?;
    Ok(x.limbs
        .iter()
        .zip(y.limbs.iter())
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

impl BitXor for &BitWord {
    type Output = BitWord;

    fn bitxor(self, rhs: &BitWord) -> BitWord {
        let mut out = self.clone();
        out.xor_in_place(rhs);
        out
    }
}

impl BitXor for BitWord {
    type Output = BitWord;

    fn bitxor(mut self, rhs: BitWord) -> BitWord {
        self.xor_in_place(&rhs);
        self
    }
}

impl BitXorAssign<&BitWord> for BitWord {
    fn bitxor_assign(&mut self, rhs: &BitWord) {
        self.xor_in_place(rhs);
    }
}

impl BitAnd for &BitWord {
    type Output = BitWord;

    fn bitand(self, rhs: &BitWord) -> BitWord {
        assert_eq!(self.len, rhs.len, "and of words with different lengths");
        let mut out = self.clone();
        for (a, b) in out.limbs.iter_mut().zip(rhs.limbs.iter()) {
            *a &= *b;
        }
        out
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = NmcError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

impl Serialize for BitWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for BitWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::from_text(&s).map_err(serde::de::Error::custom)
    }
}
