use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{epsilon_bound, epsilon_bound_exact, tail_bound, Components, Premises};
use super::distribution::Distribution;
use crate::error::{NmcError, Result};
use crate::gf2::BitWord;
use crate::lecss::for_each_word_of_weight;
use crate::nmcode::{Outcome, Scheme, RANDOMNESS_LOG2_LIMIT};
use crate::scalar::{rational_string, Probability, Rational};
use crate::tamper::{classify_case, Case, Partition, TamperFunction};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Exact certification enumerates all `2^k` messages.
pub const EXACT_MESSAGE_BITS_LIMIT: usize = 8;
/// Messages drawn per run in sampled mode when `k` exceeds the exact limit.
pub const SAMPLED_MESSAGES: usize = 16;
const SAMPLE_CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Enumerate every encoder randomness value.
    Exact,
    /// Draw `samples` seeded randomness values per message.
    Sampled { samples: u64, seed: u64 },
}

impl Mode {
    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact)
    }
}

// Sampling streams are keyed by (seed, domain, index) and split into
// chunks, so each chunk is reproducible on its own regardless of which
// worker draws it.
const DOMAIN_TAMPER: u64 = 1;
const DOMAIN_REFERENCE: u64 = 2;
const DOMAIN_MESSAGES: u64 = 3;

fn stream_rng(seed: u64, domain: u64, index: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(chunk);
    rng
}

fn merge<K: Ord>(mut a: BTreeMap<K, u64>, b: BTreeMap<K, u64>) -> BTreeMap<K, u64> {
    for (k, c) in b {
        *a.entry(k).or_insert(0) += c;
    }
    a
}

fn check_inputs(scheme: &Scheme, f: &TamperFunction, mode: Mode) -> Result<()> {
    if f.n() != scheme.n() {
        return Err(NmcError::LengthMismatch {
            expected: scheme.n(),
            found: f.n(),
        });
    }
    let report = f.validate();
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(NmcError::InvalidTamper(msgs.join("; ")));
    }
    let bits = scheme.params().randomness_bits();
    if mode.is_exact() && bits > RANDOMNESS_LOG2_LIMIT {
        return Err(NmcError::TooLarge {
            what: "encoder randomness",
            log2_size: bits,
            log2_limit: RANDOMNESS_LOG2_LIMIT,
        });
    }
    Ok(())
}

/// Counts `observe(c)` over encodings `c` of `s`: all randomness in exact
/// mode, `samples` seeded draws otherwise. Returns the counts and their
/// total.
fn tally<K, F>(
    scheme: &Scheme,
    s: &BitWord,
    mode: Mode,
    domain: u64,
    index: u64,
    observe: F,
) -> Result<(BTreeMap<K, u64>, u64)>
where
    K: Ord + Send,
    F: Fn(&BitWord) -> Result<K> + Sync,
{
    match mode {
        Mode::Exact => {
            let total = 1u64 << scheme.params().randomness_bits();
            let counts = (0..total)
                .into_par_iter()
                .try_fold(BTreeMap::new, |mut acc, i| -> Result<_> {
                    let c = scheme.enc_with(s, &scheme.randomness(i))?;
                    *acc.entry(observe(&c)?).or_insert(0) += 1;
                    Ok(acc)
                })
                .try_reduce(BTreeMap::new, |a, b| Ok(merge(a, b)))?;
            Ok((counts, total))
        }
        Mode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(NmcError::InvalidParams(
                    "sample count must be positive".into(),
                ));
            }
            let counts = (0..samples.div_ceil(SAMPLE_CHUNK))
                .into_par_iter()
                .map(|chunk| -> Result<_> {
                    let mut rng = stream_rng(seed, domain, index, chunk);
                    let draws = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
                    let mut acc = BTreeMap::new();
                    for _ in 0..draws {
                        let rand = scheme.random_randomness(&mut rng);
                        let c = scheme.enc_with(s, &rand)?;
                        *acc.entry(observe(&c)?).or_insert(0) += 1;
                    }
                    Ok(acc)
                })
                .try_reduce(BTreeMap::new, |a, b| Ok(merge(a, b)))?;
            Ok((counts, samples))
        }
    }
}

/// Distribution of `Dec(f(Enc(s)))`.
pub fn tamper_distribution<P: Probability>(
    scheme: &Scheme,
    f: &TamperFunction,
    s: &BitWord,
    mode: Mode,
) -> Result<Distribution<Outcome, P>> {
    check_inputs(scheme, f, mode)?;
    let (counts, total) = tally(scheme, s, mode, DOMAIN_TAMPER, 0, |c| {
        Ok(Outcome::from_decoded(scheme.dec(&f.apply(c)?)?))
    })?;
    Ok(Distribution::from_counts(counts, total))
}

/// Distribution of the offset `f(Enc(s)) + Enc(s)`.
pub fn offset_distribution<P: Probability>(
    scheme: &Scheme,
    f: &TamperFunction,
    s: &BitWord,
    mode: Mode,
) -> Result<Distribution<BitWord, P>> {
    check_inputs(scheme, f, mode)?;
    let (counts, total) = tally(scheme, s, mode, DOMAIN_TAMPER, 0, |c| {
        f.apply(c)?.try_xor(c)
    })?;
    Ok(Distribution::from_counts(counts, total))
}

/// Distribution of the tampered codeword `f(Enc(s))`.
pub fn tampered_distribution<P: Probability>(
    scheme: &Scheme,
    f: &TamperFunction,
    s: &BitWord,
    mode: Mode,
) -> Result<Distribution<BitWord, P>> {
    check_inputs(scheme, f, mode)?;
    let (counts, total) = tally(scheme, s, mode, DOMAIN_TAMPER, 0, |c| f.apply(c))?;
    Ok(Distribution::from_counts(counts, total))
}

fn case_of(scheme: &Scheme, f: &TamperFunction) -> (Partition, Case) {
    let part = f.partition();
    let case = classify_case(&part, scheme.n(), scheme.params().lecss.t);
    (part, case)
}

/// Maps an offset to `same*` when it decodes to the zero message and to
/// `bot` otherwise.
fn offset_verdict(scheme: &Scheme, delta: &BitWord) -> Result<Outcome> {
    Ok(match scheme.lecss().decode(delta)? {
        Some(m) if m.is_zero() => Outcome::Same,
        _ => Outcome::Bottom,
    })
}

/// The message-independent simulator distribution, built from encodings of
/// the all-zero message.
pub fn build_df<P: Probability>(
    scheme: &Scheme,
    f: &TamperFunction,
    mode: Mode,
) -> Result<Distribution<Outcome, P>> {
    check_inputs(scheme, f, mode)?;
    let reference = BitWord::zeros(scheme.k());
    let (counts, total) = match case_of(scheme, f).1 {
        Case::One => tally(scheme, &reference, mode, DOMAIN_REFERENCE, 0, |c| {
            offset_verdict(scheme, &f.apply(c)?.try_xor(c)?)
        })?,
        Case::Two => tally(scheme, &reference, mode, DOMAIN_REFERENCE, 0, |c| {
            Ok(Outcome::from_decoded(scheme.dec(&f.apply(c)?)?))
        })?,
        Case::Three | Case::Four => return Ok(Distribution::point(Outcome::Bottom)),
    };
    Ok(Distribution::from_counts(counts, total))
}

fn messages(scheme: &Scheme, mode: Mode) -> Result<Vec<BitWord>> {
    let k = scheme.k();
    match mode {
        _ if k <= EXACT_MESSAGE_BITS_LIMIT => Ok((0..1u64 << k)
            .map(|v| BitWord::from_low_bits(k, v))
            .collect()),
        Mode::Exact => Err(NmcError::TooLarge {
            what: "message space",
            log2_size: k,
            log2_limit: EXACT_MESSAGE_BITS_LIMIT,
        }),
        Mode::Sampled { seed, .. } => {
            let mut rng = stream_rng(seed, DOMAIN_MESSAGES, 0, 0);
            Ok((0..SAMPLED_MESSAGES)
                .map(|_| BitWord::from_bits((0..k).map(|_| rng.gen::<bool>())))
                .collect())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// The closed-form epsilon; all premises hold.
    Epsilon,
    /// `max(rho, max_s Pr[D(offset) != bot])`, used when the premises fail.
    Substitute,
}

#[derive(Clone, Debug, Serialize)]
pub struct MessageReport {
    pub message: String,
    pub sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_exact: Option<String>,
    /// `Pr[D(offset) != bot]` for this message.
    pub accept: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NmReport {
    pub case: Case,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_exact: Option<String>,
    pub epsilon_components: Components<f64>,
    pub premises: Premises,
    pub note: &'static str,
    pub threshold_kind: ThresholdKind,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_exact: Option<String>,
    pub max_sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sd_exact: Option<String>,
    pub worst_message: String,
    pub max_accept: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_accept_exact: Option<String>,
    /// Per-case bound: `rho`, `0`, or `2^-t` plus the tail over the
    /// non-fixed positions (`p + r` in Case 3, `q + r` in Case 4).
    pub case_bound: f64,
    pub case_bound_holds: bool,
    /// Exact mode, Cases 1 and 2: whether the offset (Case 1) or the
    /// tampered codeword (Case 2) has the same distribution for every message.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_identity: Option<bool>,
    pub df: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_s_sd: Option<Vec<MessageReport>>,
    pub pass: bool,
}

struct Run<P> {
    df: Distribution<Outcome, P>,
    per_s: Vec<(BitWord, P, P)>,
    structural: Option<bool>,
}

fn run<P: Probability>(
    scheme: &Scheme,
    f: &TamperFunction,
    case: Case,
    mode: Mode,
) -> Result<Run<P>> {
    let df = build_df::<P>(scheme, f, mode)?;
    let track = mode.is_exact() && matches!(case, Case::One | Case::Two);
    let mut per_s = Vec::new();
    let mut first_structure: Option<BTreeMap<BitWord, u64>> = None;
    let mut structural = track.then_some(true);
    for (idx, s) in messages(scheme, mode)?.into_iter().enumerate() {
        let (counts, total) = tally(scheme, &s, mode, DOMAIN_TAMPER, idx as u64, |c| {
            let ct = f.apply(c)?;
            let delta = ct.try_xor(c)?;
            let accept = scheme.lecss().decode(&delta)?.is_some();
            let out = Outcome::from_decoded(scheme.dec(&ct)?);
            let tracked = match (track, case) {
                (false, _) => None,
                (true, Case::One) => Some(delta),
                (true, _) => Some(ct),
            };
            Ok((out, accept, tracked))
        })?;
        let mut outcomes = BTreeMap::new();
        let mut structure = BTreeMap::new();
        let mut accepted = 0;
        for ((out, accept, tracked), n) in counts {
            *outcomes.entry(out).or_insert(0) += n;
            if accept {
                accepted += n;
            }
            if let Some(w) = tracked {
                *structure.entry(w).or_insert(0) += n;
            }
        }
        if track {
            match &first_structure {
                None => first_structure = Some(structure),
                Some(first) if *first != structure => structural = Some(false),
                Some(_) => {}
            }
        }
        let tampered = Distribution::<Outcome, P>::from_counts(outcomes, total);
        let sd = tampered.statistical_distance(&df.patch(&s));
        per_s.push((s, sd, P::from_counts(accepted, total)));
    }
    Ok(Run {
        df,
        per_s,
        structural,
    })
}

fn argmax<P: PartialOrd>(items: &[(BitWord, P, P)], key: impl Fn(&(BitWord, P, P)) -> &P) -> usize {
    let mut best = 0;
    for i in 1..items.len() {
        if key(&items[i]) > key(&items[best]) {
            best = i;
        }
    }
    best
}

/// Computes `SD(Tamper^f_s, Patch(D_f, s))` for every message (or a seeded
/// sample of messages) and compares the maximum against the threshold.
pub fn nm_certify(scheme: &Scheme, f: &TamperFunction, mode: Mode) -> Result<NmReport> {
    check_inputs(scheme, f, mode)?;
    let (part, case) = case_of(scheme, f);
    let lp = &scheme.params().lecss;
    let (n, d, t) = (lp.n, lp.d, lp.t);
    let rho = scheme.params().amd.rho();
    let bound = epsilon_bound(rho.to_f64_lossy(), n, d, t).with_case(case, t, part.r());
    let kind = if bound.premises.all_met() {
        ThresholdKind::Epsilon
    } else {
        ThresholdKind::Substitute
    };
    let eps_exact = epsilon_bound_exact(&rho, n, d, t);

    let mut report = NmReport {
        case,
        p: part.p(),
        q: part.q(),
        r: part.r(),
        n,
        k: scheme.k(),
        d,
        t,
        mode: if mode.is_exact() { "exact" } else { "sampled" },
        samples: None,
        seed: None,
        epsilon: bound.epsilon,
        epsilon_exact: eps_exact.as_ref().map(rational_string),
        epsilon_components: bound.components,
        premises: bound.premises,
        note: bound.note,
        threshold_kind: kind,
        threshold: 0.0,
        threshold_exact: None,
        max_sd: 0.0,
        max_sd_exact: None,
        worst_message: String::new(),
        max_accept: 0.0,
        max_accept_exact: None,
        case_bound: 0.0,
        case_bound_holds: false,
        structural_identity: None,
        df: serde_json::Value::Null,
        per_s_sd: None,
        pass: false,
    };
    let two_pow_neg_t = bound.components.two_pow_neg_t;
    report.case_bound = match case {
        Case::One => rho.to_f64_lossy(),
        Case::Two => 0.0,
        Case::Three => (two_pow_neg_t + tail_bound::<f64>(n, d, part.p(), part.r(), t)).min(1.0),
        Case::Four => (two_pow_neg_t + tail_bound::<f64>(n, d, part.q(), part.r(), t)).min(1.0),
    };

    match mode {
        Mode::Exact => {
            let run = run::<Rational>(scheme, f, case, mode)?;
            let worst = argmax(&run.per_s, |e| &e.1);
            let max_sd = run.per_s[worst].1.clone();
            let max_accept = run.per_s[argmax(&run.per_s, |e| &e.2)].2.clone();
            let threshold = match (kind, eps_exact) {
                (ThresholdKind::Epsilon, Some(eps)) => eps,
                _ => {
                    if rho > max_accept {
                        rho.clone()
                    } else {
                        max_accept.clone()
                    }
                }
            };
            let case_bound_exact = match case {
                Case::One => Some(rho.clone()),
                Case::Two => Some(Rational::zero()),
                _ => None,
            };
            report.case_bound_holds = match case_bound_exact {
                Some(b) => max_sd <= b,
                None => max_sd.to_f64_lossy() <= report.case_bound,
            };
            report.pass = max_sd <= threshold;
            report.threshold = threshold.to_f64_lossy();
            report.threshold_exact = Some(rational_string(&threshold));
            report.max_sd = max_sd.to_f64_lossy();
            report.max_sd_exact = Some(rational_string(&max_sd));
            report.max_accept = max_accept.to_f64_lossy();
            report.max_accept_exact = Some(rational_string(&max_accept));
            report.worst_message = run.per_s[worst].0.to_text();
            report.structural_identity = run.structural;
            report.df = serde_json::to_value(&run.df).expect("serializable");
            report.per_s_sd = Some(
                run.per_s
                    .iter()
                    .map(|(s, sd, acc)| MessageReport {
                        message: s.to_text(),
                        sd: sd.to_f64_lossy(),
                        sd_exact: Some(rational_string(sd)),
                        accept: acc.to_f64_lossy(),
                    })
                    .collect(),
            );
        }
        Mode::Sampled { samples, seed } => {
            let run = run::<f64>(scheme, f, case, mode)?;
            let worst = argmax(&run.per_s, |e| &e.1);
            let max_sd = run.per_s[worst].1;
            let max_accept = run.per_s[argmax(&run.per_s, |e| &e.2)].2;
            let threshold = match kind {
                ThresholdKind::Epsilon => bound.epsilon,
                ThresholdKind::Substitute => rho.to_f64_lossy().max(max_accept),
            };
            report.samples = Some(samples);
            report.seed = Some(seed);
            report.case_bound_holds = max_sd <= report.case_bound;
            report.pass = max_sd <= threshold;
            report.threshold = threshold;
            report.max_sd = max_sd;
            report.max_accept = max_accept;
            report.worst_message = run.per_s[worst].0.to_text();
            report.df = serde_json::to_value(&run.df).expect("serializable");
            report.per_s_sd = Some(
                run.per_s
                    .iter()
                    .map(|(s, sd, acc)| MessageReport {
                        message: s.to_text(),
                        sd: *sd,
                        sd_exact: None,
                        accept: *acc,
                    })
                    .collect(),
            );
        }
    }
    Ok(report)
}

/// Whether the offset (Case 1) or tampered codeword (Case 2) distribution is
/// identical for all messages, by exact enumeration. `None` for Cases 3 and 4.
pub fn structural_identity(scheme: &Scheme, f: &TamperFunction) -> Result<Option<bool>> {
    check_inputs(scheme, f, Mode::Exact)?;
    let case = case_of(scheme, f).1;
    let mut first = None;
    for s in messages(scheme, Mode::Exact)? {
        let dist = match case {
            Case::One => offset_distribution::<Rational>(scheme, f, &s, Mode::Exact)?,
            Case::Two => tampered_distribution::<Rational>(scheme, f, &s, Mode::Exact)?,
            Case::Three | Case::Four => return Ok(None),
        };
        match &first {
            None => first = Some(dist),
            Some(d0) if *d0 != dist => return Ok(Some(false)),
            Some(_) => {}
        }
    }
    Ok(Some(true))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactReport {
    pub r: usize,
    pub t: usize,
    /// Number of (message, subset) pairs examined.
    pub checked: u64,
    /// Every tampered bit in the affine block is uniform.
    pub marginals_uniform: bool,
    /// Every subset of at most `t` affine positions is jointly uniform.
    pub t_wise_uniform: bool,
    /// The same check for the offset bits on the affine block.
    pub offsets_t_wise_uniform: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl FactReport {
    pub fn holds(&self) -> bool {
        self.marginals_uniform && self.t_wise_uniform
    }
}

fn uniform_on(counts: &BTreeMap<BitWord, u64>, total: u64, subset: &[usize]) -> bool {
    let patterns = 1u64 << subset.len();
    if !total.is_multiple_of(patterns) {
        return false;
    }
    let mut per = vec![0u64; patterns as usize];
    for (w, c) in counts {
        let idx = subset
            .iter()
            .fold(0usize, |acc, &i| (acc << 1) | usize::from(w.get(i)));
        per[idx] += c;
    }
    per.iter().all(|&c| c == total / patterns)
}

/// Exhaustively checks that, for every message, the tampered bits on the
/// affine positions are uniform and jointly uniform on every subset of at
/// most `t` of them.
pub fn verify_fact(scheme: &Scheme, f: &TamperFunction) -> Result<FactReport> {
    check_inputs(scheme, f, Mode::Exact)?;
    let b3 = f.partition().b3;
    let t = scheme.params().lecss.t;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=t.min(b3.len()) {
        for_each_word_of_weight(b3.len(), size, |s| {
            subsets.push(s.to_vec());
            false
        });
    }
    let mut report = FactReport {
        r: b3.len(),
        t,
        checked: 0,
        marginals_uniform: true,
        t_wise_uniform: true,
        offsets_t_wise_uniform: true,
        counterexample: None,
    };
    for s in messages(scheme, Mode::Exact)? {
        let (counts, total) = tally(scheme, &s, Mode::Exact, DOMAIN_TAMPER, 0, |c| {
            let ct = f.apply(c)?;
            Ok((ct.restrict(&b3), ct.try_xor(c)?.restrict(&b3)))
        })?;
        let mut tampered = BTreeMap::new();
        let mut offsets = BTreeMap::new();
        for ((ct, delta), n) in counts {
            *tampered.entry(ct).or_insert(0) += n;
            *offsets.entry(delta).or_insert(0) += n;
        }
        for sub in &subsets {
            report.checked += 1;
            if !uniform_on(&tampered, total, sub) {
                if sub.len() == 1 {
                    report.marginals_uniform = false;
                }
                report.t_wise_uniform = false;
                if report.counterexample.is_none() {
                    let positions: Vec<usize> = sub.iter().map(|&i| b3[i]).collect();
                    report.counterexample = Some(format!(
                        "message {}: tampered bits at positions {:?} are not uniform",
                        s.to_text(),
                        positions
                    ));
                }
            }
            if !uniform_on(&offsets, total, sub) {
                report.offsets_t_wise_uniform = false;
            }
        }
    }
    Ok(report)
}
