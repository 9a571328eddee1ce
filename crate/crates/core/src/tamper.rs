//! Bitwise and affine tampering functions.
//!
//! A tampering function is one action per codeword position. Every action
//! reads the original codeword, so all positions are tampered
//! simultaneously.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NmcError, Result};
use crate::gf2::{BitWord, Gf2Matrix};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum BitAction {
    Const0,
    Const1,
    Identity,
    Flip,
    /// XOR of the bits in `support`, plus `constant`.
    Affine {
        support: Vec<usize>,
        constant: bool,
    },
}

impl BitAction {
    pub fn affine(support: &[usize], constant: bool) -> Self {
        let set: BTreeSet<usize> = support.iter().copied().collect();
        BitAction::Affine {
            support: set.into_iter().collect(),
            constant,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, BitAction::Affine { .. })
    }

    /// Rewrites degenerate affine forms at position `pos`: an empty support
    /// becomes a constant, the support `{pos}` becomes identity or flip.
    pub fn canonicalize(&self, pos: usize) -> Self {
        match self {
            BitAction::Affine { support, constant } if support.is_empty() => {
                if *constant {
                    BitAction::Const1
                } else {
                    BitAction::Const0
                }
            }
            BitAction::Affine { support, constant } if support.as_slice() == [pos] => {
                if *constant {
                    BitAction::Flip
                } else {
                    BitAction::Identity
                }
            }
            other => other.clone(),
        }
    }
}

impl fmt::Debug for BitAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitAction::Const0 => f.write_str("0"),
            BitAction::Const1 => f.write_str("1"),
            BitAction::Identity => f.write_str("id"),
            BitAction::Flip => f.write_str("flip"),
            BitAction::Affine { support, constant } => {
                write!(f, "xor{support:?}")?;
                if *constant {
                    f.write_str("+1")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ActionKind {
    Const0,
    Const1,
    Id,
    Flip,
    Affine,
}

#[derive(Serialize, Deserialize)]
struct ActionJson {
    kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct TamperJson {
    ell: usize,
    actions: Vec<ActionJson>,
}

/// `f = (f_1, ..., f_n)` together with the declared affine bound `ell`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TamperJson", into = "TamperJson")]
pub struct TamperFunction {
    ell: usize,
    actions: Vec<BitAction>,
    /// Support indicator of each action (empty for non-affine actions).
    masks: Vec<Option<BitWord>>,
}

impl TryFrom<TamperJson> for TamperFunction {
    type Error = NmcError;

    fn try_from(j: TamperJson) -> Result<Self> {
        let actions = j
            .actions
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                Ok(match a.kind {
                    ActionKind::Const0 => BitAction::Const0,
                    ActionKind::Const1 => BitAction::Const1,
                    ActionKind::Id => BitAction::Identity,
                    ActionKind::Flip => BitAction::Flip,
                    ActionKind::Affine => {
                        let support = a.support.ok_or_else(|| {
                            NmcError::Parse(format!("affine action {i} has no support"))
                        })?;
                        let constant = match a.b.unwrap_or(0) {
                            0 => false,
                            1 => true,
                            b => {
                                return Err(NmcError::Parse(format!(
                                    "action {i}: b = {b} is not a bit"
                                )))
                            }
                        };
                        BitAction::affine(&support, constant)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TamperFunction::new(j.ell, actions)
    }
}

impl From<TamperFunction> for TamperJson {
    fn from(f: TamperFunction) -> Self {
        let actions = f
            .actions
            .into_iter()
            .map(|a| match a {
                BitAction::Const0 => ActionJson {
                    kind: ActionKind::Const0,
                    support: None,
                    b: None,
                },
                BitAction::Const1 => ActionJson {
                    kind: ActionKind::Const1,
                    support: None,
                    b: None,
                },
                BitAction::Identity => ActionJson {
                    kind: ActionKind::Id,
                    support: None,
                    b: None,
                },
                BitAction::Flip => ActionJson {
                    kind: ActionKind::Flip,
                    support: None,
                    b: None,
                },
                BitAction::Affine { support, constant } => ActionJson {
                    kind: ActionKind::Affine,
                    support: Some(support),
                    b: Some(u8::from(constant)),
                },
            })
            .collect();
        TamperJson {
            ell: f.ell,
            actions,
        }
    }
}

impl TamperFunction {
    /// Canonicalizes every action; affine supports must lie in `0..n`.
    pub fn new(ell: usize, actions: Vec<BitAction>) -> Result<Self> {
        let n = actions.len();
        let actions: Vec<BitAction> = actions
            .iter()
            .enumerate()
            .map(|(i, a)| a.canonicalize(i))
            .collect();
        let masks = actions
            .iter()
            .map(|a| match a {
                BitAction::Affine { support, .. } => BitWord::from_positions(n, support).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| NmcError::InvalidTamper(e.to_string()))?;
        Ok(Self {
            ell,
            actions,
            masks,
        })
    }

    pub fn identity(n: usize, ell: usize) -> Self {
        Self::new(ell, vec![BitAction::Identity; n]).expect("no affine actions")
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn actions(&self) -> &[BitAction] {
        &self.actions
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| NmcError::Parse(e.to_string()))
    }

    /// Indicator vectors of the affine supports, one row per affine action.
    pub fn beta_matrix(&self) -> Gf2Matrix {
        Gf2Matrix::new(self.n(), self.masks.iter().flatten().cloned().collect())
            .expect("masks have length n")
    }

    /// Checks `|B| <= ell` per affine action and the rank criterion
    /// `rank[beta_1 .. beta_r] >= min(r, ell)`.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, a) in self.actions.iter().enumerate() {
            if let BitAction::Affine { support, .. } = a {
                if support.len() > self.ell {
                    violations.push(Violation::SupportTooLarge {
                        position: i,
                        size: support.len(),
                        ell: self.ell,
                    });
                }
            }
        }
        let beta = self.beta_matrix();
        let r = beta.nrows();
        let rank = beta.rank();
        let required = r.min(self.ell);
        if rank < required {
            violations.push(Violation::RankDeficient { rank, required });
        }
        ValidationReport { violations }
    }

    /// `f(c)`, every action evaluated on the untampered `c`.
    pub fn apply(&self, c: &BitWord) -> Result<BitWord> {
        if c.len() != self.n() {
            return Err(NmcError::LengthMismatch {
                expected: self.n(),
                found: c.len(),
            });
        }
        let mut out = BitWord::zeros(c.len());
        for (i, (a, mask)) in self.actions.iter().zip(&self.masks).enumerate() {
            let bit = match a {
                BitAction::Const0 => false,
                BitAction::Const1 => true,
                BitAction::Identity => c.get(i),
                BitAction::Flip => !c.get(i),
                BitAction::Affine { constant, .. } => {
                    mask.as_ref().expect("affine has a mask").dot(c) ^ constant
                }
            };
            if bit {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn partition(&self) -> Partition {
        let mut part = Partition::default();
        for (i, a) in self.actions.iter().enumerate() {
            match a {
                BitAction::Const0 | BitAction::Const1 => part.b1.push(i),
                BitAction::Identity | BitAction::Flip => part.b2.push(i),
                BitAction::Affine { .. } => part.b3.push(i),
            }
        }
        part
    }
}

impl fmt::Debug for TamperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TamperFunction(ell={}, {:?})", self.ell, self.actions)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Violation {
    SupportTooLarge {
        position: usize,
        size: usize,
        ell: usize,
    },
    RankDeficient {
        rank: usize,
        required: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SupportTooLarge {
                position,
                size,
                ell,
            } => {
                write!(
                    f,
                    "affine support at position {position} has size {size} > ell = {ell}"
                )
            }
            Violation::RankDeficient { rank, required } => {
                write!(
                    f,
                    "rank of affine supports is {rank} < min(r, ell) = {required}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Positions split by action class: constants, identity/flip, affine.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
    pub b3: Vec<usize>,
}

impl Partition {
    pub fn p(&self) -> usize {
        self.b1.len()
    }

    pub fn q(&self) -> usize {
        self.b2.len()
    }

    pub fn r(&self) -> usize {
        self.b3.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// `p <= t - r`
    One,
    /// `p >= n - t`
    Two,
    /// `t - r < p <= (n - r)/2`
    Three,
    /// `(n - r)/2 < p <= n - t`
    Four,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::One, Case::Two, Case::Three, Case::Four];

    pub fn number(self) -> u8 {
        match self {
            Case::One => 1,
            Case::Two => 2,
            Case::Three => 3,
            Case::Four => 4,
        }
    }

    /// Which of the four case conditions hold, in order.
    pub fn conditions(n: usize, t: usize, p: usize, r: usize) -> [bool; 4] {
        let (n, t, p, r) = (n as i64, t as i64, p as i64, r as i64);
        [
            p <= t - r,
            p >= n - t,
            t - r < p && 2 * p <= n - r,
            n - r < 2 * p && p <= n - t,
        ]
    }
}

impl Serialize for Case {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

/// First matching case in the order 1, 2, 3, 4.
pub fn classify_case(part: &Partition, n: usize, t: usize) -> Case {
    classify_counts(n, t, part.p(), part.r())
}

pub fn classify_counts(n: usize, t: usize, p: usize, r: usize) -> Case {
    let cond = Case::conditions(n, t, p, r);
    let idx = cond
        .iter()
        .position(|&c| c)
        .expect("the four case conditions cover every (p, r)");
    Case::ALL[idx]
}

/// Draws a validated tampering function whose partition falls in `case`,
/// with at most `max_affine` affine positions (capped by `t`). Returns
/// `None` when no partition sizes fit the case.
pub fn random_function<R: Rng>(
    rng: &mut R,
    n: usize,
    t: usize,
    case: Case,
    max_affine: usize,
) -> Option<TamperFunction> {
    let ell = t;
    let max_r = max_affine.min(t).min(n);
    let mut sizes = Vec::new();
    for r in 0..=max_r {
        for p in 0..=n - r {
            if classify_counts(n, t, p, r) == case && (r == 0 || ell >= 1) {
                sizes.push((p, r));
            }
        }
    }
    let &(p, r) = sizes.choose(rng)?;
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    let (b1, rest) = positions.split_at(p);
    let (b3, b2) = rest.split_at(r);
    for _ in 0..1000 {
        let mut actions = vec![BitAction::Identity; n];
        for &i in b1 {
            actions[i] = if rng.gen() {
                BitAction::Const1
            } else {
                BitAction::Const0
            };
        }
        for &i in b2 {
            actions[i] = if rng.gen() {
                BitAction::Flip
            } else {
                BitAction::Identity
            };
        }
        for &i in b3 {
            let size = rng.gen_range(1..=ell.min(n));
            let mut support: Vec<usize> = (0..n).collect();
            support.shuffle(rng);
            support.truncate(size);
            if support == [i] {
                support = vec![(i + 1) % n];
            }
            actions[i] = BitAction::affine(&support, rng.gen());
        }
        let f = TamperFunction::new(ell, actions).ok()?;
        if f.validate().is_ok() && f.partition().r() == r {
            return Some(f);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> BitWord {
        BitWord::parse_bits(s).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(
            BitAction::affine(&[], true).canonicalize(5),
            BitAction::Const1
        );
        assert_eq!(
            BitAction::affine(&[], false).canonicalize(0),
            BitAction::Const0
        );
        assert_eq!(
            BitAction::affine(&[3], false).canonicalize(3),
            BitAction::Identity
        );
        assert_eq!(
            BitAction::affine(&[3], true).canonicalize(3),
            BitAction::Flip
        );
        let genuine = BitAction::affine(&[1, 2], true);
        assert_eq!(genuine.canonicalize(2), genuine);
        assert_eq!(
            BitAction::affine(&[3], false).canonicalize(2),
            BitAction::affine(&[3], false)
        );
    }

    #[test]
    fn validate_examples() {
        let dup = TamperFunction::new(
            2,
            vec![
                BitAction::Identity,
                BitAction::affine(&[1, 2], false),
                BitAction::affine(&[1, 2], true),
                BitAction::Identity,
            ],
        )
        .unwrap();
        assert_eq!(
            dup.validate().violations,
            vec![Violation::RankDeficient {
                rank: 1,
                required: 2
            }]
        );
        let ok = TamperFunction::new(
            2,
            vec![
                BitAction::Identity,
                BitAction::affine(&[1, 2], false),
                BitAction::affine(&[2, 3], true),
                BitAction::Identity,
            ],
        )
        .unwrap();
        assert!(ok.validate().is_ok());
        let bit = TamperFunction::new(
            2,
            vec![BitAction::Flip, BitAction::Const0, BitAction::Identity],
        )
        .unwrap();
        assert!(bit.validate().is_ok());
        let wide = TamperFunction::new(
            1,
            vec![
                BitAction::affine(&[1, 2], false),
                BitAction::Identity,
                BitAction::Identity,
            ],
        )
        .unwrap();
        assert!(matches!(
            wide.validate().violations[0],
            Violation::SupportTooLarge {
                position: 0,
                size: 2,
                ell: 1
            }
        ));
    }

    #[test]
    fn apply_examples() {
        let c = w("0110");
        assert_eq!(TamperFunction::identity(4, 2).apply(&c).unwrap(), c);
        let flips = TamperFunction::new(2, vec![BitAction::Flip; 4]).unwrap();
        assert_eq!(flips.apply(&c).unwrap(), w("1001"));
        // second bit becomes c_1 ^ c_2 ^ 1 with c = (0, 1, ...)
        let f = TamperFunction::new(
            2,
            vec![
                BitAction::Identity,
                BitAction::affine(&[0, 1], true),
                BitAction::Identity,
                BitAction::Identity,
            ],
        )
        .unwrap();
        assert!(!f.apply(&w("0100")).unwrap().get(1));
        assert!(f.apply(&w("010")).is_err());
    }

    #[test]
    fn affine_reads_original_word() {
        // position 1 copies position 0, position 0 is overwritten with 1
        let f = TamperFunction::new(1, vec![BitAction::Const1, BitAction::affine(&[0], false)])
            .unwrap();
        assert_eq!(f.apply(&w("00")).unwrap(), w("10"));
    }

    #[test]
    fn partition_examples() {
        let z = TamperFunction::new(2, vec![BitAction::Const0; 5])
            .unwrap()
            .partition();
        assert_eq!((z.p(), z.q(), z.r()), (5, 0, 0));
        let f = TamperFunction::new(
            2,
            vec![
                BitAction::Const1,
                BitAction::Identity,
                BitAction::Flip,
                BitAction::affine(&[0, 1], false),
            ],
        )
        .unwrap();
        let part = f.partition();
        assert_eq!((part.p(), part.q(), part.r()), (1, 2, 1));
        assert_eq!(part.b3, vec![3]);
        let all_aff = TamperFunction::new(
            3,
            (0..3)
                .map(|i| BitAction::affine(&[(i + 1) % 3], false))
                .collect(),
        )
        .unwrap();
        assert!(all_aff.validate().is_ok());
        assert_eq!(all_aff.partition().r(), 3);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_counts(24, 4, 0, 0), Case::One);
        assert_eq!(classify_counts(24, 4, 24, 0), Case::Two);
        assert_eq!(classify_counts(24, 4, 8, 4), Case::Three);
        assert_eq!(classify_counts(24, 4, 15, 0), Case::Four);
        // p = n - t satisfies both 2 and 4; precedence picks 2
        assert_eq!(Case::conditions(24, 4, 20, 0), [false, true, false, true]);
        assert_eq!(classify_counts(24, 4, 20, 0), Case::Two);
    }

    #[test]
    fn json_round_trip() {
        let js = r#"{"ell":2,"actions":[{"kind":"const0"},{"kind":"affine","support":[0,1],"b":1},{"kind":"id"},{"kind":"flip"},{"kind":"affine","support":[4],"b":1},{"kind":"const1"}]}"#;
        let f = TamperFunction::from_json(js).unwrap();
        // the {4} affine at position 4 is canonicalized to flip
        assert_eq!(f.actions()[4], BitAction::Flip);
        let out = serde_json::to_string(&f).unwrap();
        assert_eq!(TamperFunction::from_json(&out).unwrap(), f);
        assert!(TamperFunction::from_json(
            r#"{"ell":1,"actions":[{"kind":"affine","support":[7]}]}"#
        )
        .is_err());
        assert!(TamperFunction::from_json(r#"{"ell":1,"actions":[{"kind":"affine"}]}"#).is_err());
        assert!(TamperFunction::from_json(
            r#"{"ell":1,"actions":[{"kind":"affine","support":[0],"b":2}]}"#
        )
        .is_err());
    }

    #[test]
    fn random_functions_land_in_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in Case::ALL {
            for _ in 0..20 {
                let f = random_function(&mut rng, 16, 3, case, 3).unwrap();
                assert!(f.validate().is_ok());
                assert_eq!(classify_case(&f.partition(), 16, 3), case);
            }
        }
    }

    fn any_action(n: usize) -> impl Strategy<Value = BitAction> {
        prop_oneof![
            Just(BitAction::Const0),
            Just(BitAction::Const1),
            Just(BitAction::Identity),
            Just(BitAction::Flip),
            (proptest::collection::vec(0..n, 0..4), any::<bool>())
                .prop_map(|(s, b)| BitAction::affine(&s, b)),
        ]
    }

    proptest! {
        #[test]
        fn output_bit_depends_only_on_support(
            actions in proptest::collection::vec(any_action(10), 10),
            c in proptest::collection::vec(any::<bool>(), 10),
            flip in 0usize..10,
        ) {
            let f = TamperFunction::new(3, actions).unwrap();
            let c = BitWord::from_bits(c);
            let mut c2 = c.clone();
            c2.flip(flip);
            let (o1, o2) = (f.apply(&c).unwrap(), f.apply(&c2).unwrap());
            for (i, a) in f.actions().iter().enumerate() {
                let reads = match a {
                    BitAction::Identity | BitAction::Flip => i == flip,
                    BitAction::Affine { support, .. } => support.contains(&flip),
                    _ => false,
                };
                if !reads {
                    prop_assert_eq!(o1.get(i), o2.get(i));
                }
            }
        }

        #[test]
        fn canonicalize_is_idempotent(a in any_action(6), pos in 0usize..6) {
            let once = a.canonicalize(pos);
            prop_assert_eq!(once.canonicalize(pos), once.clone());
        }

        #[test]
        fn flip_twice_is_identity(
            flips in proptest::collection::vec(any::<bool>(), 12),
            c in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let f = TamperFunction::new(1, flips.iter().map(|&b| if b { BitAction::Flip } else { BitAction::Identity }).collect()).unwrap();
            let c = BitWord::from_bits(c);
            prop_assert_eq!(f.apply(&f.apply(&c).unwrap()).unwrap(), c);
        }
    }
}
