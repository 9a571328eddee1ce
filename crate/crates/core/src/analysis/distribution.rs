use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::gf2::BitWord;
use crate::nmcode::Outcome;
use crate::scalar::{Probability, Rational};

/// A finite probability mass function.
///
/// Outcomes with zero mass are never stored, so two distributions are equal
/// exactly when their supports and masses agree.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<K: Ord, P> {
    masses: BTreeMap<K, P>,
}

pub type ExactDistribution = Distribution<Outcome, Rational>;
pub type SampledDistribution = Distribution<Outcome, f64>;

impl<K: Ord + Clone, P: Probability> Distribution<K, P> {
    pub fn point(k: K) -> Self {
        Self {
            masses: BTreeMap::from([(k, P::one())]),
        }
    }

    /// Empirical frequencies `count / total`. `total` must be the sum of the
    /// counts.
    pub fn from_counts(counts: BTreeMap<K, u64>, total: u64) -> Self {
        debug_assert_eq!(counts.values().sum::<u64>(), total);
        Self {
            masses: counts
                .into_iter()
                .filter(|&(_, c)| c > 0)
                .map(|(k, c)| (k, P::from_counts(c, total)))
                .collect(),
        }
    }

    pub fn mass(&self, k: &K) -> P {
        self.masses.get(k).cloned().unwrap_or_else(P::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.masses.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &P)> {
        self.masses.iter()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> P {
        self.masses
            .values()
            .fold(P::zero(), |acc, p| acc + p.clone())
    }

    /// Half the L1 distance over the union of both supports.
    pub fn statistical_distance(&self, other: &Self) -> P {
        let mut sum = P::zero();
        for (k, p) in &self.masses {
            sum = sum + p.abs_diff(&other.mass(k));
        }
        for (k, q) in &other.masses {
            if !self.masses.contains_key(k) {
                sum = sum + q.clone();
            }
        }
        sum / (P::one() + P::one())
    }

    pub fn to_f64(&self) -> Distribution<K, f64> {
        Distribution {
            masses: self
                .masses
                .iter()
                .map(|(k, p)| (k.clone(), p.to_f64_lossy()))
                .collect(),
        }
    }

    /// Pushes the distribution forward along `g`, merging colliding images.
    pub fn map<J: Ord + Clone>(&self, mut g: impl FnMut(&K) -> J) -> Distribution<J, P> {
        let mut masses: BTreeMap<J, P> = BTreeMap::new();
        for (k, p) in &self.masses {
            let e = masses.entry(g(k)).or_insert_with(P::zero);
            *e = e.clone() + p.clone();
        }
        masses.retain(|_, p| !p.is_zero());
        Distribution { masses }
    }
}

impl<P: Probability> Distribution<Outcome, P> {
    /// Replaces the `same*` placeholder by the concrete message `s`.
    pub fn patch(&self, s: &BitWord) -> Self {
        self.map(|o| match o {
            Outcome::Same => Outcome::Message(s.clone()),
            other => other.clone(),
        })
    }
}

impl<K: Ord + Clone, P: Probability> FromIterator<(K, P)> for Distribution<K, P> {
    /// Collects masses, summing repeated outcomes and dropping zeros.
    fn from_iter<I: IntoIterator<Item = (K, P)>>(iter: I) -> Self {
        let mut masses: BTreeMap<K, P> = BTreeMap::new();
        for (k, p) in iter {
            let e = masses.entry(k).or_insert_with(P::zero);
            *e = e.clone() + p;
        }
        masses.retain(|_, p| !p.is_zero());
        Self { masses }
    }
}

impl<P: Probability> Serialize for Distribution<Outcome, P> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.masses.len()))?;
        for (k, p) in &self.masses {
            map.serialize_entry(&k.label(), &p.to_json())?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn msg(s: &str) -> Outcome {
        Outcome::Message(BitWord::parse_bits(s).unwrap())
    }

    #[test]
    fn patch_examples() {
        let s = BitWord::parse_bits("101").unwrap();
        let d = ExactDistribution::point(Outcome::Same).patch(&s);
        assert_eq!(d, ExactDistribution::point(msg("101")));

        let no_same: ExactDistribution = [(Outcome::Bottom, q(1, 2)), (msg("011"), q(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(no_same.patch(&s), no_same);

        let mixed: ExactDistribution = [(Outcome::Same, q(3, 10)), (Outcome::Bottom, q(7, 10))]
            .into_iter()
            .collect();
        let want: ExactDistribution = [(msg("101"), q(3, 10)), (Outcome::Bottom, q(7, 10))]
            .into_iter()
            .collect();
        assert_eq!(mixed.patch(&s), want);

        // same* merges with mass already on s
        let merge: ExactDistribution = [(Outcome::Same, q(1, 4)), (msg("101"), q(3, 4))]
            .into_iter()
            .collect();
        assert_eq!(merge.patch(&s), ExactDistribution::point(msg("101")));
    }

    #[test]
    fn sd_examples() {
        let p = ExactDistribution::point(msg("0"));
        assert_eq!(p.statistical_distance(&p), q(0, 1));
        assert_eq!(
            p.statistical_distance(&ExactDistribution::point(msg("1"))),
            q(1, 1)
        );
        let half: ExactDistribution = [(msg("0"), q(1, 2)), (msg("1"), q(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(half.statistical_distance(&p), q(1, 2));
    }

    #[test]
    fn counts_sum_to_one() {
        let counts = BTreeMap::from([(msg("00"), 3u64), (Outcome::Bottom, 5), (msg("11"), 0)]);
        let d = ExactDistribution::from_counts(counts, 8);
        assert_eq!(d.total(), q(1, 1));
        assert_eq!(d.len(), 2);
        assert_eq!(d.mass(&msg("11")), q(0, 1));
    }

    #[test]
    fn json_labels() {
        let d: ExactDistribution = [(Outcome::Same, q(1, 4)), (Outcome::Bottom, q(3, 4))]
            .into_iter()
            .collect();
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"bot":"3/4","same*":"1/4"}"#
        );
    }

    fn dist() -> impl Strategy<Value = ExactDistribution> {
        prop::collection::vec(0u64..6, 1..8).prop_map(|ws| {
            let total: u64 = ws.iter().sum::<u64>() + 1;
            let mut counts: BTreeMap<Outcome, u64> = BTreeMap::new();
            for (i, w) in ws.iter().enumerate() {
                counts.insert(Outcome::Message(BitWord::from_low_bits(3, i as u64)), *w);
            }
            counts.insert(Outcome::Bottom, 1);
            ExactDistribution::from_counts(counts, total)
        })
    }

    proptest! {
        #[test]
        fn sd_is_a_metric(a in dist(), b in dist(), c in dist()) {
            let zero = q(0, 1);
            prop_assert_eq!(a.statistical_distance(&b), b.statistical_distance(&a));
            prop_assert_eq!(a.statistical_distance(&a), zero.clone());
            prop_assert_eq!(a.statistical_distance(&b) == zero, a == b);
            prop_assert!(a.statistical_distance(&c) <= a.statistical_distance(&b) + b.statistical_distance(&c));
            prop_assert!(a.statistical_distance(&b) <= q(1, 1));
        }

        #[test]
        fn patch_preserves_total(a in dist(), v in 0u64..8) {
            let s = BitWord::from_low_bits(3, v);
            let with_same = a.map(|o| if *o == Outcome::Message(BitWord::zeros(3)) { Outcome::Same } else { o.clone() });
            prop_assert_eq!(with_same.patch(&s).total(), q(1, 1));
        }
    }
}
