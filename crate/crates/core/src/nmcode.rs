//! The composed scheme `Enc(s) = E(A(s))`, `Dec(c) = V(D(c))`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amd::{AmdCode, AmdParams};
use crate::error::{NmcError, Result};
use crate::gf2::{BitWord, FieldElem};
use crate::lecss::{Lecss, LecssParams};

/// Exhaustive analysis enumerates at most `2^RANDOMNESS_LOG2_LIMIT`
/// encoder randomness values.
pub const RANDOMNESS_LOG2_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub amd: AmdParams,
    pub lecss: LecssParams,
}

impl SchemeParams {
    pub fn new(amd: AmdParams, lecss: LecssParams) -> Result<Self> {
        if amd.codeword_bits() != lecss.k_msg {
            return Err(NmcError::InvalidParams(format!(
                "AMD codeword length {} does not match LECSS message length {}",
                amd.codeword_bits(),
                lecss.k_msg
            )));
        }
        Ok(Self { amd, lecss })
    }

    /// Outer message length `k`.
    pub fn k(&self) -> usize {
        self.amd.message_bits()
    }

    /// Outer codeword length `n`.
    pub fn n(&self) -> usize {
        self.lecss.n
    }

    /// `log2` of the encoder randomness space: `m` bits of `x`, `z` of `r`.
    pub fn randomness_bits(&self) -> usize {
        self.amd.m() as usize + self.lecss.z
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SchemeParams =
            serde_json::from_str(s).map_err(|e| NmcError::Parse(e.to_string()))?;
        Self::new(raw.amd, raw.lecss)
    }
}

/// A decoded value, or one of the two special symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Message(BitWord),
    Bottom,
    /// Placeholder for "the original message"; only appears in simulator
    /// distributions, never as a decoder output.
    Same,
}

impl Outcome {
    pub fn from_decoded(d: Option<BitWord>) -> Self {
        d.map_or(Outcome::Bottom, Outcome::Message)
    }

    pub fn label(&self) -> String {
        match self {
            Outcome::Message(m) => m.to_text(),
            Outcome::Bottom => "bot".to_owned(),
            Outcome::Same => "same*".to_owned(),
        }
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Message(m) => write!(f, "{m}"),
            Outcome::Bottom => f.write_str("⊥"),
            Outcome::Same => f.write_str("same*"),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

/// Encoder randomness: the AMD point `x` and the LECSS randomness `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Randomness {
    pub x: FieldElem,
    pub r: BitWord,
}

#[derive(Clone, Debug)]
pub struct Scheme {
    params: SchemeParams,
    amd: AmdCode,
    lecss: Lecss,
}

impl Scheme {
    pub fn new(params: SchemeParams) -> Result<Self> {
        let params = SchemeParams::new(params.amd, params.lecss)?;
        Ok(Self {
            amd: AmdCode::new(params.amd),
            lecss: Lecss::new(params.lecss.clone())?,
            params,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn amd(&self) -> &AmdCode {
        &self.amd
    }

    pub fn lecss(&self) -> &Lecss {
        &self.lecss
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Randomness with index `i` in `0..2^randomness_bits`: the low `m`
    /// bits select `x`, the rest select `r`.
    pub fn randomness(&self, index: u64) -> Randomness {
        let m = self.params.amd.m();
        let x = self
            .params
            .amd
            .field()
            .elem((index & ((1 << m) - 1)) as u32)
            .expect("masked to the field size");
        Randomness {
            x,
            r: BitWord::from_low_bits(self.params.lecss.z, index >> m),
        }
    }

    pub fn random_randomness<R: Rng>(&self, rng: &mut R) -> Randomness {
        let m = self.params.amd.m();
        let x = self
            .params
            .amd
            .field()
            .elem(rng.gen_range(0..1u32 << m))
            .expect("in range");
        let r = BitWord::from_bits((0..self.params.lecss.z).map(|_| rng.gen::<bool>()));
        Randomness { x, r }
    }

    pub fn enc(&self, s: &BitWord, x: FieldElem, r: &BitWord) -> Result<BitWord> {
        let inner = self.amd.encode(s, x)?;
        self.lecss.encode(&inner, r)
    }

    pub fn enc_with(&self, s: &BitWord, rand: &Randomness) -> Result<BitWord> {
        self.enc(s, rand.x, &rand.r)
    }

    /// Encodes with randomness drawn from `rng`, returning it alongside.
    pub fn enc_random<R: Rng>(&self, s: &BitWord, rng: &mut R) -> Result<(BitWord, Randomness)> {
        let rand = self.random_randomness(rng);
        Ok((self.enc_with(s, &rand)?, rand))
    }

    /// `⊥` if the LECSS layer rejects, otherwise the AMD verdict.
    pub fn dec(&self, c: &BitWord) -> Result<Option<BitWord>> {
        match self.lecss.decode(c)? {
            None => Ok(None),
            Some(inner) => self.amd.verify(&inner),
        }
    }
}
