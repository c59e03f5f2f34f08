//! Soundness of the `(r+1)`-copy rank test.
//!
//! On `r+1` copies the rank test rejects exactly on the antisymmetric subspace,
//! so its rejection probability is `e_{r+1}` of the spectrum. The worst case
//! over spectra with tail mass at least `ε` has a closed form as the minimum of
//! three terms `g_k`; [`beta_numeric_oracle`] recomputes the same minimum by
//! scanning the extremal family directly.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::partitions::Spectrum;
use crate::scalar::Scalar;
use crate::{domain, Result};

/// Slack used when deciding whether `z` is an integer or `ε` sits on `1 - r/d`.
const SNAP: f64 = 1e-12;

/// How `binom(x, m)` is read for real `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinomialConvention {
    /// `x (x-1) ⋯ (x-m+1) / m!` for every coefficient.
    Standard,
    /// The top coefficient `binom(r+k-1, r+1)` read as `k (k+1) ⋯ (k+r-1) / r!`,
    /// i.e. `r` factors over `r!`. Kept only to show it disagrees with the scan.
    RFactorTop,
}

/// Falling-factorial binomial coefficient for real upper argument.
pub fn generalized_binomial(x: f64, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `g_k(ε, r, q)`, the value of `e_{r+1}` on the extremal vector
/// `(1-ε-(r-1)q, q × (k+r-1), ε-qk)`.
pub fn g_k(epsilon: f64, r: usize, q: f64, k: f64) -> f64 {
    g_k_with(epsilon, r, q, k, BinomialConvention::Standard)
}

pub fn g_k_with(epsilon: f64, r: usize, q: f64, k: f64, convention: BinomialConvention) -> f64 {
    let r_u = r as u32;
    let rf = r as f64;
    let top = rf + k - 1.0;
    let c_plus = match convention {
        BinomialConvention::Standard => generalized_binomial(top, r_u + 1),
        BinomialConvention::RFactorTop => (0..r_u).fold(1.0, |acc, i| acc * (k + i as f64)) / factorial(r_u),
    };
    let c_zero = generalized_binomial(top, r_u);
    let c_minus = generalized_binomial(top, r_u - 1);
    c_plus * q.powi(r as i32 + 1)
        + c_zero * (1.0 - top * q) * q.powi(r as i32)
        + c_minus * (1.0 - epsilon - (rf - 1.0) * q) * (epsilon - q * k) * q.powi(r as i32 - 1)
}

/// `g_k(ε, r, ε/k)` as a function of real `k > 0`.
pub fn g_along_k(epsilon: f64, r: usize, k: f64) -> f64 {
    g_k(epsilon, r, epsilon / k, k)
}

/// Which term of the closed form attains the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "term")]
pub enum BetaTerm {
    /// `k = ⌊z⌋`, `q = (1-ε)/r`.
    Floor,
    /// `k = ⌈z⌉`, `q = ε/⌈z⌉`.
    Ceil,
    /// `k = d - r`, `q = ε/(d-r)`.
    Tail,
    /// A point of the scanned extremal family.
    Family { k: usize, q: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaResult {
    pub epsilon: f64,
    pub r: usize,
    pub d: usize,
    /// `z = rε/(1-ε)`.
    pub z: f64,
    pub beta: f64,
    pub argmin: BetaTerm,
    /// The three closed-form terms (floor, ceil, tail), when computed.
    pub terms: Option<[f64; 3]>,
    pub witness: Spectrum<f64>,
}

fn check_beta_domain(epsilon: f64, r: usize, d: usize) -> Result<()> {
    if r == 0 || r >= d {
        return domain(format!("need 1 <= r < d, got r = {r}, d = {d}"));
    }
    let max_eps = 1.0 - r as f64 / d as f64;
    if !(epsilon > 0.0) || epsilon > max_eps + SNAP {
        return domain(format!(
            "epsilon = {epsilon} is outside (0, 1 - r/d] = (0, {max_eps}]: no state is that far from rank {r}"
        ));
    }
    Ok(())
}

/// `(⌊z⌋, ⌈z⌉)` with `z` snapped to an integer when within rounding error.
fn floor_ceil(z: f64) -> (usize, usize) {
    let nearest = z.round();
    if (z - nearest).abs() <= SNAP * z.max(1.0) {
        (nearest as usize, nearest as usize)
    } else {
        (z.floor() as usize, z.ceil() as usize)
    }
}

/// The extremal vector `(1-ε-(r-1)q, q × (k+r-1), ε-qk)` zero-padded to `d`.
pub fn family_vector(epsilon: f64, r: usize, k: usize, q: f64, d: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(d.max(k + r + 1));
    v.push(1.0 - epsilon - (r as f64 - 1.0) * q);
    v.extend(std::iter::repeat_n(q, k + r - 1));
    v.push(epsilon - q * k as f64);
    for x in v.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    while v.len() > d && v.last().is_some_and(|&x| x.abs() <= 1e-12) {
        v.pop();
    }
    v.resize(d.max(v.len()), 0.0);
    v
}

fn witness(epsilon: f64, r: usize, k: usize, q: f64, d: usize) -> Result<Spectrum<f64>> {
    let v = family_vector(epsilon, r, k, q, d);
    if v.len() > d {
        return domain(format!("extremal vector for k = {k} needs more than {d} entries"));
    }
    Spectrum::new(v)
}

/// Exact soundness `β(ε)` of the `(r+1)`-copy rank test on `C^d`.
pub fn beta_closed_form(epsilon: f64, r: usize, d: usize) -> Result<BetaResult> {
    check_beta_domain(epsilon, r, d)?;
    let epsilon = epsilon.min(1.0 - r as f64 / d as f64);
    let rf = r as f64;
    let z = rf * epsilon / (1.0 - epsilon);
    let (zf, zc) = floor_ceil(z);
    let tail_k = d - r;
    let candidates = [
        (BetaTerm::Floor, zf, (1.0 - epsilon) / rf),
        (BetaTerm::Ceil, zc, epsilon / zc as f64),
        (BetaTerm::Tail, tail_k, epsilon / tail_k as f64),
    ];
    let terms = candidates.map(|(_, k, q)| g_k(epsilon, r, q, k as f64));
    // Candidates are ordered by k, so keeping the first minimum breaks ties toward smaller k.
    let mut best = 0;
    for i in 1..3 {
        if terms[i] < terms[best] {
            best = i;
        }
    }
    let (argmin, k, q) = candidates[best];
    Ok(BetaResult {
        epsilon,
        r,
        d,
        z,
        beta: 1.0 - terms[best],
        argmin,
        terms: Some(terms),
        witness: witness(epsilon, r, k, q, d)?,
    })
}

/// The two-branch `r = 1` formula, written in `ω = 1 - ε`. Valid for `1/d ≤ ω < 1`.
pub fn beta_r1(epsilon: f64, d: usize) -> Result<f64> {
    check_beta_domain(epsilon, 1, d)?;
    let omega = 1.0 - epsilon;
    if omega >= 0.5 {
        Ok(1.0 - omega + omega * omega)
    } else {
        let m = (1.0 / omega + SNAP).floor();
        Ok(1.0 + 0.5 * omega * m * (-2.0 + omega + omega * m))
    }
}

/// `1 - 1/(r+1)!`, the limit of `β` as `d → ∞` and then `ε → 1`.
pub fn beta_limit_large_eps(r: usize) -> f64 {
    1.0 - 1.0 / factorial(r as u32 + 1)
}

/// `lim_{d→∞} g_{d-r}(ε, r, ε/(d-r)) = ε^r (r+1-εr)/(r+1)!`.
pub fn beta_third_term_limit(epsilon: f64, r: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) || r == 0 {
        return domain("need 0 < epsilon <= 1 and r >= 1");
    }
    let rf = r as f64;
    Ok(epsilon.powi(r as i32) * (rf + 1.0 - epsilon * rf) / factorial(r as u32 + 1))
}

/// `e_k(α)` by the one-variable-at-a-time recursion.
pub fn elementary_symmetric<S: Scalar>(k: usize, alpha: &Spectrum<S>) -> S {
    elementary_symmetric_slice(k, alpha.probs())
}

pub fn elementary_symmetric_slice<S: Scalar>(k: usize, values: &[S]) -> S {
    if k > values.len() {
        return S::zero();
    }
    let mut e = vec![S::zero(); k + 1];
    e[0] = S::one();
    for (j, a) in values.iter().enumerate() {
        for i in (1..=k.min(j + 1)).rev() {
            e[i] = e[i].clone() + a.clone() * e[i - 1].clone();
        }
    }
    e.pop().expect("k+1 entries")
}

/// Settings for [`beta_numeric_oracle`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Interior `q` grid points per `k`, in addition to both endpoints.
    pub grid: usize,
    /// Random ε-far spectra checked against the family minimum.
    pub random_samples: usize,
    pub seed: u64,
    /// Slack allowed below the family minimum before a sample counts as a violation.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid: 2048,
            random_samples: 10_000,
            seed: 0x5eed,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub result: BetaResult,
    pub random_samples: usize,
    /// Smallest `e_{r+1}` seen among the random spectra.
    pub random_min: f64,
    /// Random spectra whose `e_{r+1}` fell below the family minimum minus the tolerance.
    pub violations: usize,
}

/// Minimises `e_{r+1}` over the extremal family by direct scanning, with no
/// use of the closed-form terms, and cross-checks against random ε-far spectra.
pub fn beta_numeric_oracle(epsilon: f64, r: usize, d: usize, config: &OracleConfig) -> Result<OracleResult> {
    check_beta_domain(epsilon, r, d)?;
    let epsilon = epsilon.min(1.0 - r as f64 / d as f64);
    let rf = r as f64;
    let z = rf * epsilon / (1.0 - epsilon);
    let (_, zc) = floor_ceil(z);
    let k_min = zc.saturating_sub(1);
    let objective = |k: usize, q: f64| elementary_symmetric_slice(r + 1, &family_vector(epsilon, r, k, q, d));

    let per_k: Vec<Option<(f64, usize, f64)>> = (k_min..=d - r)
        .into_par_iter()
        .map(|k| {
            let hi = if k == 0 {
                (1.0 - epsilon) / rf
            } else {
                (epsilon / k as f64).min((1.0 - epsilon) / rf)
            };
            let lo = (epsilon / (k + 1) as f64).max(epsilon / (d - r) as f64);
            if lo > hi * (1.0 + SNAP) {
                return None;
            }
            let hi = hi.max(lo);
            let steps = config.grid.max(1) + 1;
            let qs: Vec<f64> = (0..=steps)
                .map(|i| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 })
                .collect();
            let (mut best_i, mut best) = (0, f64::INFINITY);
            for (i, &q) in qs.iter().enumerate() {
                let v = objective(k, q);
                if v < best {
                    best = v;
                    best_i = i;
                }
            }
            let mut best_q = qs[best_i];
            // One golden-section pass on the bracket around the grid minimum.
            let (mut a, mut b) = (qs[best_i.saturating_sub(1)], qs[(best_i + 1).min(steps)]);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                if b - a <= 1e-15 * b.abs().max(1e-300) {
                    break;
                }
                let c = b - phi * (b - a);
                let e = a + phi * (b - a);
                let (fc, fe) = (objective(k, c), objective(k, e));
                if fc < best {
                    best = fc;
                    best_q = c;
                }
                if fe < best {
                    best = fe;
                    best_q = e;
                }
                if fc <= fe {
                    b = e;
                } else {
                    a = c;
                }
            }
            Some((best, k, best_q))
        })
        .collect();
    let (min_value, k, q) = per_k
        .into_iter()
        .flatten()
        .fold(None::<(f64, usize, f64)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| crate::Error::Degenerate("empty extremal family".into()))?;

    let (random_min, violations) = random_far_check(epsilon, r, d, min_value, config);
    Ok(OracleResult {
        result: BetaResult {
            epsilon,
            r,
            d,
            z,
            beta: 1.0 - min_value,
            argmin: BetaTerm::Family { k, q },
            terms: None,
            witness: witness(epsilon, r, k, q, d)?,
        },
        random_samples: config.random_samples,
        random_min,
        violations,
    })
}

/// Random spectra with tail mass at least `ε`: a Dirichlet draw on a random
/// support, mixed with the uniform vector just enough to reach the tail mass.
fn random_far_check(epsilon: f64, r: usize, d: usize, family_min: f64, config: &OracleConfig) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform_tail = (d - r) as f64 / d as f64;
    let mut min_seen = f64::INFINITY;
    let mut violations = 0;
    let mut p = vec![0.0; d];
    for _ in 0..config.random_samples {
        let support = rng.random_range(r + 1..=d);
        p.iter_mut().for_each(|x| *x = 0.0);
        for x in p.iter_mut().take(support) {
            *x = Exp1.sample(&mut rng);
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = p[r..].iter().sum();
        if tail < epsilon {
            let s = ((epsilon - tail) / (uniform_tail - tail)).min(1.0);
            p.iter_mut().for_each(|x| *x = (1.0 - s) * *x + s / d as f64);
        }
        let e = elementary_symmetric_slice(r + 1, &p);
        min_seen = min_seen.min(e);
        if e < family_min - config.tolerance {
            violations += 1;
        }
    }
    (min_seen, violations)
}

/// Per-round soundness for `d → ∞` in the regime `ε < 1/(r+2)`.
pub fn per_round_soundness_large_d(epsilon: f64, r: usize) -> Result<f64> {
    let rf = r as f64;
    if r == 0 || !(epsilon > 0.0 && epsilon < 1.0 / (rf + 2.0)) {
        return domain(format!("need r >= 1 and 0 < epsilon < 1/(r+2), got epsilon = {epsilon}, r = {r}"));
    }
    let terms = [
        epsilon * ((1.0 - epsilon) / rf).powi(r as i32),
        (1.0 - rf * epsilon) * epsilon.powi(r as i32),
        beta_third_term_limit(epsilon, r)?,
    ];
    Ok(1.0 - terms.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FewCopyComplexity {
    pub per_round_beta: f64,
    /// Number of `(r+1)`-copy rounds.
    pub rounds: u64,
    pub total_copies: u64,
}

/// Rounds `k` with `β^k ≤ target` when the test is repeated on fresh `r+1` copies.
///
/// `ε` is the trace distance of the input to rank `r`, as in the rank test.
pub fn copy_complexity_few_copy(epsilon: f64, r: usize, target_soundness: f64) -> Result<FewCopyComplexity> {
    let beta = per_round_soundness_large_d(epsilon, r)?;
    if !(target_soundness > 0.0 && target_soundness <= 1.0) {
        return domain("target soundness must lie in (0, 1]");
    }
    let rounds = if target_soundness >= 1.0 {
        0
    } else {
        (target_soundness.ln() / beta.ln()).ceil() as u64
    };
    Ok(FewCopyComplexity {
        per_round_beta: beta,
        rounds,
        total_copies: rounds * (r as u64 + 1),
    })
}

/// `log2` helper used by reports.
pub fn bits(x: f64) -> f64 {
    x.ln() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{schur_eval, Partition};
    use crate::scalar::ratio;
    use num_rational::BigRational;

    #[test]
    fn g_k_examples() {
        let v = g_k(0.75, 1, 0.25, 3.0);
        assert!((v - 0.375).abs() < 1e-15);
        let e2 = elementary_symmetric_slice(2, &[0.25; 4]);
        assert!((v - e2).abs() < 1e-15);
        // k = 0 and k = 1 make the top binomials vanish.
        assert_eq!(generalized_binomial(1.0, 3), 0.0);
        assert_eq!(generalized_binomial(2.0, 3), 0.0);
        assert!((g_k(0.1, 2, 0.45, 0.0) - 0.1 * 0.45f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn g_k_is_e_r_plus_one_of_family_vector() {
        for r in 1..=4 {
            for k in 0..6 {
                for &eps in &[0.05, 0.2, 0.5] {
                    let q = eps / (k as f64 + 1.5);
                    if 1.0 - eps - (r as f64 - 1.0) * q < 0.0 {
                        continue;
                    }
                    let v = family_vector(eps, r, k, q, k + r + 1);
                    let e = elementary_symmetric_slice(r + 1, &v);
                    assert!((g_k(eps, r, q, k as f64) - e).abs() < 1e-14, "r={r} k={k}");
                }
            }
        }
    }

    #[test]
    fn integer_z_terms_coincide() {
        // z = rε/(1-ε) integer: ε = z/(z+r).
        for r in 1..=4 {
            for z in 1..=6 {
                let eps = z as f64 / (z + r) as f64;
                let first = g_k(eps, r, (1.0 - eps) / r as f64, z as f64);
                let second = g_k(eps, r, eps / z as f64, z as f64);
                let closed = generalized_binomial(r as f64 / (1.0 - eps), r as u32 + 1)
                    * ((1.0 - eps) / r as f64).powi(r as i32 + 1);
                assert!((first - second).abs() < 1e-14);
                assert!((first - closed).abs() < 1e-14, "r={r} z={z}: {first} vs {closed}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let b = beta_closed_form(0.75, 1, 4).unwrap();
        assert!((b.beta - 0.625).abs() < 1e-14);
        let ws = b.witness.probs();
        assert!(ws.iter().all(|&x| (x - 0.25).abs() < 1e-14));

        for d in 2..12 {
            let b = beta_closed_form(0.5, 1, d).unwrap();
            assert!((b.beta - 0.75).abs() < 1e-14);
        }
        let b = beta_closed_form(0.1, 2, 1000).unwrap();
        assert!((b.beta - (1.0 - 0.01 * 2.8 / 6.0)).abs() < 1e-5, "{}", b.beta);
        assert_eq!(b.argmin, BetaTerm::Tail);

        assert!(beta_closed_form(0.9, 2, 2).is_err());
        assert!(beta_closed_form(0.0, 1, 4).is_err());
        assert!(beta_closed_form(0.76, 1, 4).is_err());
        assert!(beta_closed_form(0.75, 1, 4).is_ok());
    }

    #[test]
    fn witness_is_far_and_realises_beta() {
        for r in 1..=3 {
            for d in [r + 1, r + 3, 12] {
                for i in 1..=20 {
                    let eps = i as f64 / 20.0 * (1.0 - r as f64 / d as f64);
                    let b = beta_closed_form(eps, r, d).unwrap();
                    assert!(b.witness.tail_mass(r) >= eps - 1e-12);
                    let e = elementary_symmetric(r + 1, &b.witness);
                    assert!((1.0 - e - b.beta).abs() < 1e-12);
                    assert!(b.beta >= beta_limit_large_eps(r) - 1e-12 && b.beta < 1.0);
                }
            }
        }
    }

    #[test]
    fn r1_formula_examples() {
        assert_eq!(beta_r1(0.5, 8).unwrap(), 0.75);
        assert_eq!(beta_r1(0.75, 4).unwrap(), 0.625);
        let v = beta_r1(2.0 / 3.0, 6).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
        let oracle = beta_numeric_oracle(2.0 / 3.0, 1, 6, &OracleConfig::default()).unwrap();
        assert!((oracle.result.beta - v).abs() < 1e-9);
        assert!(beta_r1(0.8, 4).is_err());
    }

    #[test]
    fn limits() {
        assert_eq!(beta_limit_large_eps(1), 0.5);
        assert!((beta_limit_large_eps(2) - 5.0 / 6.0).abs() < 1e-15);
        assert!((beta_limit_large_eps(5) - (1.0 - 1.0 / 720.0)).abs() < 1e-15);
        assert!((beta_third_term_limit(1.0, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(beta_third_term_limit(1e-9, 2).unwrap() < 1e-17);
        assert!((beta_third_term_limit(0.1, 2).unwrap() - 0.0046666666666667).abs() < 1e-12);
    }

    #[test]
    fn elementary_examples() {
        let a = Spectrum::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        assert_eq!(elementary_symmetric(0, &a), ratio(1, 1));
        assert_eq!(elementary_symmetric(2, &a), ratio(1, 4));
        assert_eq!(elementary_symmetric(3, &a), ratio(0, 1));
    }

    #[test]
    fn elementary_is_column_schur() {
        let a: Spectrum<BigRational> =
            Spectrum::new(vec![ratio(2, 5), ratio(1, 4), ratio(1, 5), ratio(3, 20)]).unwrap();
        for k in 1..=5 {
            assert_eq!(elementary_symmetric(k, &a), schur_eval(&Partition::column(k), &a));
        }
    }

    #[test]
    fn oracle_matches_uniform_witness() {
        let o = beta_numeric_oracle(0.75, 1, 4, &OracleConfig::default()).unwrap();
        assert!((o.result.beta - 0.625).abs() < 1e-12);
        assert_eq!(o.violations, 0);
    }

    #[test]
    fn literal_top_binomial_disagrees_with_scan() {
        // At r = 2, ε = 0.5, d = 8 the closed form's terms use k = 2, 2, 6.
        let (eps, r, d) = (0.5, 2, 8);
        let o = beta_numeric_oracle(eps, r, d, &OracleConfig::default()).unwrap();
        let standard = beta_closed_form(eps, r, d).unwrap();
        assert!((standard.beta - o.result.beta).abs() < 1e-9);
        let lit = [(2.0, (1.0 - eps) / 2.0), (2.0, eps / 2.0), (6.0, eps / 6.0)]
            .map(|(k, q)| g_k_with(eps, r, q, k, BinomialConvention::RFactorTop))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!((1.0 - lit - o.result.beta).abs() > 1e-3);
    }

    #[test]
    fn few_copy_examples() {
        let c = copy_complexity_few_copy(0.3, 1, 1.0 / 3.0).unwrap();
        assert!((c.per_round_beta - 0.79).abs() < 1e-14);
        assert_eq!((c.rounds, c.total_copies), (5, 10));
        let c = copy_complexity_few_copy(0.3, 1, 1.0).unwrap();
        assert_eq!(c.rounds, 0);
        let c = copy_complexity_few_copy(0.1, 2, 1.0 / 3.0).unwrap();
        assert_eq!((c.rounds, c.total_copies), (235, 705));
        assert!(copy_complexity_few_copy(0.25, 2, 0.3).is_err());
        assert!(copy_complexity_few_copy(0.34, 1, 0.3).is_err());
    }
}
