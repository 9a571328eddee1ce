use nmc_core::analysis::{
    build_df, nm_certify, structural_identity, tamper_distribution, verify_fact, Distribution, Mode,
};
use nmc_core::gf2::BitWord;
use nmc_core::instances;
use nmc_core::nmcode::{Outcome, Scheme};
use nmc_core::scalar::parse_rational;
use nmc_core::tamper::{classify_case, BitAction, Case, TamperFunction};
use nmc_core::Rational;
use num_traits::One;
use proptest::prelude::*;
use std::sync::OnceLock;

fn toy() -> &'static Scheme {
    static S: OnceLock<Scheme> = OnceLock::new();
    S.get_or_init(|| Scheme::new(instances::toy()).unwrap())
}

fn rm() -> &'static Scheme {
    static S: OnceLock<Scheme> = OnceLock::new();
    S.get_or_init(|| Scheme::new(instances::reed_muller()).unwrap())
}

/// Identity/flip everywhere except `consts` positions set to constants.
fn bitwise(n: usize, ell: usize, flips: &[bool], consts: &[(usize, bool)]) -> TamperFunction {
    let mut actions: Vec<BitAction> = flips
        .iter()
        .map(|&f| {
            if f {
                BitAction::Flip
            } else {
                BitAction::Identity
            }
        })
        .collect();
    for &(i, b) in consts {
        actions[i] = if b {
            BitAction::Const1
        } else {
            BitAction::Const0
        };
    }
    assert_eq!(actions.len(), n);
    TamperFunction::new(ell, actions).unwrap()
}

fn rat(s: &Option<String>) -> Rational {
    parse_rational(s.as_deref().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Without affine positions and with at most `t` constants, the offset on
    /// the constant positions is uniform by secrecy, so its law is the same
    /// for every message.
    #[test]
    fn bitwise_case_one_offsets_are_message_independent(
        flips in prop::collection::vec(any::<bool>(), 16),
        consts in prop::collection::btree_map(0usize..16, any::<bool>(), 0..=2),
    ) {
        let consts: Vec<_> = consts.into_iter().collect();
        let f = bitwise(16, 2, &flips, &consts);
        prop_assert_eq!(classify_case(&f.partition(), 16, 2), Case::One);
        prop_assert_eq!(structural_identity(toy(), &f).unwrap(), Some(true));
        let rep = nm_certify(toy(), &f, Mode::Exact).unwrap();
        prop_assert!(rat(&rep.max_sd_exact) <= toy().params().amd.rho());
    }

    /// Constants on all but at most `t` positions: the free bits are uniform,
    /// so the tampered word has the same law for every message and the
    /// simulator is exact.
    #[test]
    fn bitwise_case_two_is_exact(
        free in prop::collection::btree_set(0usize..16, 0..=2),
        bits in prop::collection::vec(any::<bool>(), 16),
        flips in prop::collection::vec(any::<bool>(), 16),
    ) {
        let consts: Vec<_> = (0..16).filter(|i| !free.contains(i)).map(|i| (i, bits[i])).collect();
        let f = bitwise(16, 2, &flips, &consts);
        prop_assert_eq!(classify_case(&f.partition(), 16, 2), Case::Two);
        prop_assert_eq!(structural_identity(toy(), &f).unwrap(), Some(true));
        let rep = nm_certify(toy(), &f, Mode::Exact).unwrap();
        prop_assert_eq!(rep.max_sd_exact.as_deref(), Some("0/1"));
    }

    /// Affine actions reading distinct single positions restate at most `t`
    /// codeword bits, which secrecy makes jointly uniform.
    #[test]
    fn single_reads_satisfy_the_fact(
        reads in prop::sample::subsequence((0usize..16).collect::<Vec<_>>(), 1..=3),
        targets in prop::sample::subsequence((0usize..16).collect::<Vec<_>>(), 3),
        bits in prop::collection::vec(any::<bool>(), 3),
    ) {
        let mut actions = vec![BitAction::Identity; 16];
        for ((&src, &dst), &b) in reads.iter().zip(&targets).zip(&bits) {
            actions[dst] = BitAction::affine(&[src], b);
        }
        let f = TamperFunction::new(3, actions).unwrap();
        prop_assume!(f.validate().is_ok());
        let rep = verify_fact(rm(), &f).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep);
    }

    /// Cases 3 and 4 simulate with a point mass on bottom, so the distance
    /// equals the probability of not decoding to bottom.
    #[test]
    fn bottom_simulator_distance(
        consts in prop::collection::btree_map(0usize..16, any::<bool>(), 5..=12),
        flips in prop::collection::vec(any::<bool>(), 16),
    ) {
        let consts: Vec<_> = consts.into_iter().collect();
        let f = bitwise(16, 2, &flips, &consts);
        let case = classify_case(&f.partition(), 16, 2);
        prop_assert!(matches!(case, Case::Three | Case::Four));
        let df = build_df::<Rational>(toy(), &f, Mode::Exact).unwrap();
        prop_assert_eq!(&df, &Distribution::point(Outcome::Bottom));
        for v in 0..8 {
            let s = BitWord::from_low_bits(3, v);
            let d = tamper_distribution::<Rational>(toy(), &f, &s, Mode::Exact).unwrap();
            prop_assert_eq!(d.total(), Rational::one());
            let not_bottom = Rational::one() - d.mass(&Outcome::Bottom);
            prop_assert_eq!(d.statistical_distance(&df.patch(&s)), not_bottom);
        }
    }
}

#[test]
fn reports_serialize_with_documented_keys() {
    let f = TamperFunction::identity(16, 2);
    let rep = serde_json::to_value(nm_certify(toy(), &f, Mode::Exact).unwrap()).unwrap();
    for key in [
        "case",
        "p",
        "q",
        "r",
        "epsilon",
        "epsilon_components",
        "max_sd",
        "per_s_sd",
        "premises",
        "pass",
    ] {
        assert!(rep.get(key).is_some(), "{key}");
    }
    assert_eq!(rep["epsilon_components"]["rho"], 0.25);
}
