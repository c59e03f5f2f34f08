//! Weak Schur sampling and the rank-test acceptance probability.
//!
//! `Tr(Π_{≤r} ρ^{⊗N})` is computed four ways: summing `dim(P_λ) s_λ(α)` over
//! partitions with at most `r` rows, enumerating every word weighted by its
//! probability, running a patience-sorting automaton over the word distribution,
//! and sampling words.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::partitions::{
    complete_homogeneous_table, count_partitions, dim_symmetric_irrep, enumerate_partitions,
    schur_from_table, Partition, Spectrum,
};
use crate::scalar::Scalar;
use crate::{domain, Caps, Error, Result};

/// Outcome distribution of weak Schur sampling on `ρ^{⊗N}`.
#[derive(Clone, Debug)]
pub struct WssDistribution<S> {
    pub n: usize,
    pub spectrum: Spectrum<S>,
    pub entries: BTreeMap<Partition, S>,
}

impl<S: Scalar> WssDistribution<S> {
    pub fn total(&self) -> S {
        self.entries.values().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn prob(&self, lambda: &Partition) -> S {
        self.entries.get(lambda).cloned().unwrap_or_else(S::zero)
    }

    /// Mass on partitions with at most `r` rows.
    pub fn mass_with_rows_at_most(&self, r: usize) -> S {
        self.entries
            .iter()
            .filter(|(l, _)| l.rows() <= r)
            .map(|(_, p)| p.clone())
            .fold(S::zero(), |a, b| a + b)
    }
}

fn check_partition_cap(n: usize, rows: usize, caps: &Caps) -> Result<()> {
    let count = count_partitions(n, rows);
    if count > BigUint::from(caps.partitions) {
        return Err(Error::CapExceeded {
            what: "partition",
            needed: count.to_string(),
            limit: caps.partitions.to_string(),
            hint: "use the automaton or Monte-Carlo method",
        });
    }
    Ok(())
}

/// `Pr[λ] = dim(P_λ)·s_λ(α)` for every `λ ⊢ N` with `ℓ(λ) ≤ d`.
pub fn wss_distribution<S: Scalar>(
    alpha: &Spectrum<S>,
    n: usize,
    caps: &Caps,
) -> Result<WssDistribution<S>> {
    if n == 0 {
        return domain("weak Schur sampling needs N >= 1");
    }
    let d = alpha.d();
    check_partition_cap(n, d, caps)?;
    let h = complete_homogeneous_table(n + d, alpha);
    let entries = enumerate_partitions(n, d)?
        .into_iter()
        .map(|lambda| {
            let p = S::from_biguint(&dim_symmetric_irrep(&lambda)) * schur_from_table(&lambda, d, &h);
            (lambda, p)
        })
        .collect();
    Ok(WssDistribution {
        n,
        spectrum: alpha.clone(),
        entries,
    })
}

/// Length of the longest strictly decreasing subsequence; letters are `1..=d`.
pub fn lds_length(word: &[usize], d: usize) -> Result<usize> {
    if let Some(bad) = word.iter().find(|&&x| x == 0 || x > d) {
        return domain(format!("letter {bad} is outside 1..={d}"));
    }
    Ok(lds_of(word))
}

/// Patience sorting: `tails[k]` is the largest possible last letter of a
/// strictly decreasing subsequence of length `k+1`; the array is strictly
/// decreasing, so each letter costs one binary search.
pub(crate) fn lds_of(word: &[usize]) -> usize {
    let mut tails: Vec<usize> = Vec::new();
    for &x in word {
        let k = tails.partition_point(|&t| t > x);
        if k == tails.len() {
            tails.push(x);
        } else {
            tails[k] = x;
        }
    }
    tails.len()
}

/// How to evaluate the rank-test acceptance probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum AcceptMethod {
    /// Schur sum over partitions with at most `r` rows.
    Exact,
    /// Enumeration of all `d^N` words.
    Brute,
    /// Dynamic programming over patience-sorting states.
    Automaton,
    MonteCarlo { samples: u64, seed: u64 },
}

/// An acceptance probability, either computed or estimated.
#[derive(Clone, Debug, PartialEq)]
pub enum Acceptance<S> {
    Value {
        value: S,
        /// Set when `N ≤ r`, where every word is accepted.
        short_circuit: bool,
    },
    Estimate(McEstimate),
}

impl<S: Scalar> Acceptance<S> {
    pub fn as_f64(&self) -> f64 {
        match self {
            Acceptance::Value { value, .. } => value.to_f64(),
            Acceptance::Estimate(e) => e.value,
        }
    }
}

/// `Tr(Π_{≤r} ρ^{⊗N}) = Pr_{x∼α^N}[LDS(x) ≤ r]`.
pub fn accept_prob_rank_test<S: Scalar>(
    alpha: &Spectrum<S>,
    n: usize,
    r: usize,
    method: AcceptMethod,
    caps: &Caps,
) -> Result<Acceptance<S>> {
    if n == 0 || r == 0 {
        return domain("the rank test needs N >= 1 and r >= 1");
    }
    if let AcceptMethod::MonteCarlo { samples, seed } = method {
        return Ok(Acceptance::Estimate(sample_lds_mc(alpha, n, r, samples, seed)?));
    }
    if n <= r {
        return Ok(Acceptance::Value {
            value: S::one(),
            short_circuit: true,
        });
    }
    let value = match method {
        AcceptMethod::Exact => accept_prob_exact(alpha, n, r, caps)?,
        AcceptMethod::Brute => accept_prob_brute(alpha, n, r, caps)?,
        AcceptMethod::Automaton => accept_prob_automaton(alpha, n, r, caps)?,
        AcceptMethod::MonteCarlo { .. } => unreachable!(),
    };
    Ok(Acceptance::Value {
        value,
        short_circuit: false,
    })
}

/// Schur-sum route. Partitions with more than `min(r, d)` rows contribute zero
/// and are never enumerated.
pub fn accept_prob_exact<S: Scalar>(alpha: &Spectrum<S>, n: usize, r: usize, caps: &Caps) -> Result<S> {
    if n <= r {
        return Ok(S::one());
    }
    let rows = r.min(alpha.d());
    check_partition_cap(n, rows, caps)?;
    let h = complete_homogeneous_table(n + rows, alpha);
    let total = enumerate_partitions(n, rows)?
        .iter()
        .map(|lambda| S::from_biguint(&dim_symmetric_irrep(lambda)) * schur_from_table(lambda, alpha.d(), &h))
        .fold(S::zero(), |a, b| a + b);
    Ok(total)
}

/// Enumerates all `d^N` words; words are grouped by letter counts so the
/// weights are multiplied once per count vector.
pub fn accept_prob_brute<S: Scalar>(alpha: &Spectrum<S>, n: usize, r: usize, caps: &Caps) -> Result<S> {
    let d = alpha.d();
    let words = (d as f64).powi(n as i32);
    if words > caps.brute_words as f64 {
        return Err(Error::CapExceeded {
            what: "brute-force word",
            needed: format!("{d}^{n}"),
            limit: caps.brute_words.to_string(),
            hint: "use the exact or Monte-Carlo method",
        });
    }
    let mut accepted: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut word = vec![0usize; n];
    let mut counts = vec![0u32; d];
    brute_words(&mut word, 0, d, r, &mut counts, &mut accepted);

    let mut keys: Vec<_> = accepted.into_iter().collect();
    keys.sort();
    let total = keys
        .into_iter()
        .map(|(counts, multiplicity)| {
            counts
                .iter()
                .zip(alpha.probs())
                .fold(S::from_u64(multiplicity), |acc, (&c, p)| acc * p.powu(c))
        })
        .fold(S::zero(), |a, b| a + b);
    Ok(total)
}

fn brute_words(
    word: &mut [usize],
    pos: usize,
    d: usize,
    r: usize,
    counts: &mut [u32],
    accepted: &mut HashMap<Vec<u32>, u64>,
) {
    if pos == word.len() {
        if lds_of(word) <= r {
            *accepted.entry(counts.to_vec()).or_insert(0) += 1;
        }
        return;
    }
    for letter in 0..d {
        word[pos] = letter;
        counts[letter] += 1;
        brute_words(word, pos + 1, d, r, counts, accepted);
        counts[letter] -= 1;
    }
}

/// Deterministic finite automaton tracking the patience-sorting piles of a word.
///
/// A state is the strictly decreasing list of pile tops, stored as a bit set of
/// letters; reading a letter either grows the list or replaces one top. Lists
/// longer than `r` are absorbed into the rejecting sink, which is not stored.
#[derive(Clone, Debug)]
pub struct LdsAutomaton {
    d: usize,
    r: usize,
    /// `next[s * d + x]` is the successor of state `s` on letter `x`.
    next: Vec<Option<usize>>,
    states: usize,
}

impl LdsAutomaton {
    pub fn new(d: usize, r: usize, caps: &Caps) -> Result<Self> {
        if d == 0 || d > 128 {
            return domain("the automaton supports alphabets of 1..=128 letters");
        }
        let states: BigUint = (0..=r.min(d)).map(|j| binomial(d, j)).sum();
        if states > BigUint::from(caps.automaton_states) {
            return Err(Error::CapExceeded {
                what: "automaton state",
                needed: states.to_string(),
                limit: caps.automaton_states.to_string(),
                hint: "use the exact or Monte-Carlo method",
            });
        }
        let mut index: HashMap<u128, usize> = HashMap::new();
        let mut masks: Vec<u128> = vec![0];
        index.insert(0, 0);
        let mut next = Vec::new();
        let mut cursor = 0;
        while cursor < masks.len() {
            let mask = masks[cursor];
            for x in 0..d {
                // Tops strictly greater than x keep their place; the first top
                // not greater than x is replaced, or x is appended.
                let low = u128::MAX >> (127 - x);
                let above = mask & !low;
                let at_or_below = mask & low;
                let target = if at_or_below == 0 {
                    let grown = mask | (1u128 << x);
                    (grown.count_ones() as usize <= r).then_some(grown)
                } else {
                    let highest = 127 - at_or_below.leading_zeros();
                    Some(above | (at_or_below & !(1u128 << highest)) | (1u128 << x))
                };
                next.push(target.map(|t| {
                    *index.entry(t).or_insert_with(|| {
                        masks.push(t);
                        masks.len() - 1
                    })
                }));
            }
            cursor += 1;
        }
        Ok(LdsAutomaton {
            d,
            r,
            next,
            states: masks.len(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    /// Probability mass over states after reading `n` letters.
    pub fn run<S: Scalar>(&self, alpha: &Spectrum<S>, n: usize) -> Result<Vec<S>> {
        let mut dist = self.initial();
        for _ in 0..n {
            dist = self.step(alpha, &dist)?;
        }
        Ok(dist)
    }

    pub fn initial<S: Scalar>(&self) -> Vec<S> {
        let mut dist = vec![S::zero(); self.states];
        dist[0] = S::one();
        dist
    }

    pub fn step<S: Scalar>(&self, alpha: &Spectrum<S>, dist: &[S]) -> Result<Vec<S>> {
        if alpha.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "automaton built for {} letters, spectrum has {}",
                self.d,
                alpha.d()
            )));
        }
        let mut out = vec![S::zero(); self.states];
        for (s, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            for (x, p) in alpha.probs().iter().enumerate() {
                if let Some(t) = self.next[s * self.d + x] {
                    out[t] = out[t].clone() + mass.clone() * p.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

/// Automaton route; numerically stable because every term is non-negative.
pub fn accept_prob_automaton<S: Scalar>(
    alpha: &Spectrum<S>,
    n: usize,
    r: usize,
    caps: &Caps,
) -> Result<S> {
    if n <= r {
        return Ok(S::one());
    }
    let automaton = LdsAutomaton::new(alpha.d(), r, caps)?;
    let dist = automaton.run(alpha, n)?;
    Ok(dist.into_iter().fold(S::zero(), |a, b| a + b))
}

/// Bernoulli Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, samples: u64, seed: u64) -> Self {
        let value = hits as f64 / samples as f64;
        McEstimate {
            value,
            stderr: (value * (1.0 - value) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }

    /// Whether `truth` lies within `k` standard errors.
    pub fn agrees_with(&self, truth: f64, k: f64) -> bool {
        (self.value - truth).abs() <= k * self.stderr
    }
}

/// Samples per random stream. Streams are indexed by chunk, not by worker, so
/// the estimate does not depend on the thread count.
pub const MC_CHUNK: u64 = 1 << 14;

/// Counts successes of `trial` over `samples` draws from seeded ChaCha streams.
pub fn bernoulli_estimate<F>(samples: u64, seed: u64, trial: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<usize>) -> bool + Sync,
{
    if samples == 0 {
        return domain("Monte-Carlo estimation needs at least one sample");
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let per_chunk: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut scratch = Vec::new();
            (0..len).filter(|_| trial(&mut rng, &mut scratch)).count() as u64
        })
        .collect();
    let hits = per_chunk.iter().sum();
    Ok(McEstimate::from_counts(hits, samples, seed))
}

/// Inverse-CDF letter sampler over a sorted spectrum.
#[derive(Clone, Debug)]
pub struct LetterSampler {
    cdf: Vec<f64>,
}

impl LetterSampler {
    pub fn new<S: Scalar>(alpha: &Spectrum<S>) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = alpha
            .probs()
            .iter()
            .map(|p| {
                acc += p.to_f64();
                acc
            })
            .collect();
        // The last support letter absorbs rounding so every draw lands somewhere.
        let last = alpha
            .probs()
            .iter()
            .rposition(|p| *p > S::zero())
            .unwrap_or(0);
        for c in cdf.iter_mut().skip(last) {
            *c = f64::INFINITY;
        }
        LetterSampler { cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }

    pub fn fill_word<R: Rng>(&self, rng: &mut R, n: usize, word: &mut Vec<usize>) {
        word.clear();
        word.extend((0..n).map(|_| self.sample(rng)));
    }
}

/// Monte-Carlo estimate of `Pr[LDS ≤ r]`; identical inputs give identical output.
pub fn sample_lds_mc<S: Scalar>(
    alpha: &Spectrum<S>,
    n: usize,
    r: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let sampler = LetterSampler::new(alpha);
    bernoulli_estimate(samples, seed, |rng, word| {
        sampler.fill_word(rng, n, word);
        lds_of(word) <= r
    })
}

/// Tail bound `((1 + r/d) e² N / r²)^r` on `Pr[LDS ≥ r]` for uniform words; not clamped.
pub fn lds_upper_bound(n: usize, d: usize, r: usize) -> Result<f64> {
    if r == 0 || r > d {
        return domain("the LDS tail bound needs 1 <= r <= d");
    }
    let (n, d, r) = (n as f64, d as f64, r as f64);
    let e2 = std::f64::consts::E.powi(2);
    Ok(((1.0 + r / d) * e2 * n / (r * r)).powf(r))
}

/// Exact count of partitions the exact path would enumerate, as `u64` when it fits.
pub fn exact_path_size(n: usize, r: usize, d: usize) -> Option<u64> {
    count_partitions(n, r.min(d)).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn uniform2() -> Spectrum<BigRational> {
        Spectrum::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    #[test]
    fn lds_examples() {
        assert_eq!(lds_length(&[3, 2, 1], 3).unwrap(), 3);
        assert_eq!(lds_length(&[1, 1, 1], 3).unwrap(), 1);
        assert_eq!(lds_length(&[2, 3, 1, 2], 3).unwrap(), 2);
        assert_eq!(lds_length(&[], 3).unwrap(), 0);
        assert!(lds_length(&[0, 1], 3).is_err());
        assert!(lds_length(&[4], 3).is_err());
    }

    #[test]
    fn wss_examples() {
        let caps = Caps::default();
        let pure = Spectrum::new(vec![ratio(1, 1), ratio(0, 1)]).unwrap();
        let dist = wss_distribution(&pure, 3, &caps).unwrap();
        assert_eq!(dist.prob(&Partition::row(3)), ratio(1, 1));
        assert_eq!(dist.total(), ratio(1, 1));

        let dist = wss_distribution(&uniform2(), 2, &caps).unwrap();
        assert_eq!(dist.entries.len(), 2);
        assert_eq!(dist.prob(&Partition::row(2)), ratio(3, 4));
        assert_eq!(dist.prob(&Partition::column(2)), ratio(1, 4));

        let third = Spectrum::new(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        let dist = wss_distribution(&third, 1, &caps).unwrap();
        assert_eq!(dist.entries.len(), 1);
        assert_eq!(dist.prob(&Partition::row(1)), ratio(1, 1));
    }

    #[test]
    fn wss_cap_points_to_monte_carlo() {
        let caps = Caps {
            partitions: 3,
            ..Caps::default()
        };
        let err = wss_distribution(&Spectrum::<f64>::uniform(4), 10, &caps).unwrap_err();
        assert!(err.to_string().contains("Monte-Carlo"));
    }

    #[test]
    fn acceptance_examples() {
        let caps = Caps::default();
        for method in [AcceptMethod::Exact, AcceptMethod::Brute, AcceptMethod::Automaton] {
            let a = accept_prob_rank_test(&uniform2(), 2, 1, method, &caps).unwrap();
            assert_eq!(
                a,
                Acceptance::Value {
                    value: ratio(3, 4),
                    short_circuit: false
                }
            );
        }
        let a = accept_prob_rank_test(&uniform2(), 3, 5, AcceptMethod::Exact, &caps).unwrap();
        assert_eq!(
            a,
            Acceptance::Value {
                value: ratio(1, 1),
                short_circuit: true
            }
        );
        let pure = Spectrum::new(vec![ratio(1, 1), ratio(0, 1), ratio(0, 1)]).unwrap();
        for method in [AcceptMethod::Exact, AcceptMethod::Brute, AcceptMethod::Automaton] {
            assert_eq!(
                accept_prob_rank_test(&pure, 6, 1, method, &caps).unwrap().as_f64(),
                1.0
            );
        }
        assert!(accept_prob_rank_test(&uniform2(), 0, 1, AcceptMethod::Exact, &caps).is_err());
    }

    #[test]
    fn brute_cap() {
        let caps = Caps {
            brute_words: 100,
            ..Caps::default()
        };
        let err = accept_prob_brute(&Spectrum::<f64>::uniform(3), 5, 1, &caps).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn mc_examples() {
        let pure = Spectrum::new(vec![1.0, 0.0]).unwrap();
        let est = sample_lds_mc(&pure, 7, 1, 1000, 3).unwrap();
        assert_eq!((est.value, est.stderr), (1.0, 0.0));

        let u = Spectrum::<f64>::uniform(2);
        let est = sample_lds_mc(&u, 2, 1, 1_000_000, 11).unwrap();
        assert!(est.agrees_with(0.75, 3.0), "{est:?}");

        let again = sample_lds_mc(&u, 2, 1, 1_000_000, 11).unwrap();
        assert_eq!(est, again);
        assert!(sample_lds_mc(&u, 2, 1, 0, 11).is_err());
    }

    #[test]
    fn mc_is_independent_of_thread_count() {
        let u = Spectrum::<f64>::new(vec![0.5, 0.3, 0.2]).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_lds_mc(&u, 9, 2, 100_000, 5).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn sampler_never_emits_zero_weight_letters() {
        let s = Spectrum::new(vec![0.7, 0.3, 0.0]).unwrap();
        let sampler = LetterSampler::new(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..10_000).all(|_| sampler.sample(&mut rng) < 2));
    }

    #[test]
    fn lds_bound_examples() {
        let v = lds_upper_bound(1, 4, 2).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert!((v - (1.5 * e2 / 4.0).powi(2)).abs() < 1e-12);
        assert!((v - 7.6776).abs() < 1e-3);
        assert!(lds_upper_bound(100, 4, 1).unwrap() > 1.0);
        assert!(lds_upper_bound(1, 2, 3).is_err());
    }

    #[test]
    fn automaton_state_count() {
        let a = LdsAutomaton::new(5, 2, &Caps::default()).unwrap();
        assert_eq!(a.state_count(), 1 + 5 + 10);
        assert_eq!(a.r(), 2);
    }
}
