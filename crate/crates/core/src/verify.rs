//! Invariant suites run by `qprop verify`. Each suite counts the checks it ran
//! and records a message for every failure.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{prob_lds_le2_exact, prob_lds_le2_ssyt, subsequence_bound_check};
use crate::linalg_oracle::{young_projector, verify_sr_projector_identity};
use crate::partitions::{count_ssyt, dim_symmetric_irrep, enumerate_partitions, schur_eval, Partition, Spectrum};
use crate::ranktest::{beta_closed_form, beta_numeric_oracle, beta_r1, OracleConfig};
use crate::scalar::ratio;
use crate::schmidt::{best_rank_r_approx, delta_r, random_state, schmidt_decompose, SCHMIDT_RANK_TOL};
use crate::ttns::{faithful_ttns_approx, is_ttns, Tree, TreeState};
use crate::wss::{accept_prob_automaton, accept_prob_brute, accept_prob_exact};
use crate::{Caps, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Partitions,
    Wss,
    Ranktest,
    Schmidt,
    Ttns,
    Bounds,
    Linalg,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Partitions,
        Suite::Wss,
        Suite::Ranktest,
        Suite::Schmidt,
        Suite::Ttns,
        Suite::Bounds,
        Suite::Linalg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partitions => "partitions",
            Suite::Wss => "wss",
            Suite::Ranktest => "ranktest",
            Suite::Schmidt => "schmidt",
            Suite::Ttns => "ttns",
            Suite::Bounds => "bounds",
            Suite::Linalg => "linalg",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn absorb(&mut self, result: Result<()>) {
        if let Err(e) = result {
            self.checks += 1;
            self.failures.push(format!("error: {e}"));
        }
    }
}

/// Dimension function checked by the partitions suite.
pub type DimFn<'a> = &'a dyn Fn(&Partition) -> BigUint;

#[derive(Clone, Copy)]
pub struct VerifyOptions<'a> {
    pub dim: DimFn<'a>,
    pub seed: u64,
}

impl Default for VerifyOptions<'_> {
    fn default() -> Self {
        VerifyOptions {
            dim: &dim_symmetric_irrep,
            seed: 7,
        }
    }
}

pub fn run_suite(suite: Suite, options: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new(suite);
    let result = match suite {
        Suite::Partitions => partitions_suite(&mut report, options.dim),
        Suite::Wss => wss_suite(&mut report),
        Suite::Ranktest => ranktest_suite(&mut report, options.seed),
        Suite::Schmidt => schmidt_suite(&mut report, options.seed),
        Suite::Ttns => ttns_suite(&mut report, options.seed),
        Suite::Bounds => bounds_suite(&mut report),
        Suite::Linalg => linalg_suite(&mut report, options.seed),
    };
    report.absorb(result);
    report
}

pub fn run_suites(suites: &[Suite], options: &VerifyOptions) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, options)).collect()
}

fn partitions_suite(report: &mut SuiteReport, dim: DimFn) -> Result<()> {
    // Branching rule: dim λ = Σ dim(λ minus a corner).
    for n in 1..=10 {
        let mut total = BigUint::zero();
        for lambda in enumerate_partitions(n, n)? {
            let d = dim(&lambda);
            total += &d * &d;
            let mut below = BigUint::zero();
            let parts = lambda.parts();
            for i in 0..parts.len() {
                if i + 1 == parts.len() || parts[i] > parts[i + 1] {
                    let mut smaller = parts.to_vec();
                    smaller[i] -= 1;
                    smaller.retain(|&p| p > 0);
                    below += if smaller.is_empty() { BigUint::one() } else { dim(&Partition::new(smaller)?) };
                }
            }
            report.check(d == below, || format!("dim {lambda} fails the branching rule"));
        }
        let factorial: BigUint = (1..=n as u64).product();
        report.check(total == factorial, || format!("sum of squared dims at N = {n} is not N!"));
    }
    // SSYT counts against Schur polynomials at the uniform point.
    for d in 1..=4 {
        for lambda in enumerate_partitions(5, d)? {
            let s = schur_eval(&lambda, &Spectrum::<BigRational>::uniform(d));
            let scaled = s * BigRational::from_integer(num_traits::pow(d.into(), 5));
            let count = BigRational::from_integer(count_ssyt(&lambda, d).into());
            report.check(scaled == count, || format!("SSYT count of {lambda} over {d} letters"));
        }
    }
    Ok(())
}

fn rational_spectra() -> Vec<Spectrum<BigRational>> {
    [[1, 1, 1], [2, 1, 1], [3, 2, 1], [5, 1, 1], [4, 3, 0]]
        .iter()
        .map(|w| {
            let total: i64 = w.iter().sum();
            Spectrum::new(w.iter().map(|&x| ratio(x, total)).collect()).expect("valid weights")
        })
        .collect()
}

fn wss_suite(report: &mut SuiteReport) -> Result<()> {
    let caps = Caps::default();
    for alpha in rational_spectra() {
        for n in 1..=6 {
            for r in 1..=2 {
                let exact = accept_prob_exact(&alpha, n, r, &caps)?;
                let brute = accept_prob_brute(&alpha, n, r, &caps)?;
                let auto = accept_prob_automaton(&alpha, n, r, &caps)?;
                report.check(exact == brute && exact == auto, || {
                    format!("acceptance paths disagree at {:?}, N = {n}, r = {r}", alpha.to_vec_f64())
                });
            }
        }
    }
    Ok(())
}

fn ranktest_suite(report: &mut SuiteReport, seed: u64) -> Result<()> {
    let config = OracleConfig {
        grid: 256,
        random_samples: 500,
        seed,
        ..OracleConfig::default()
    };
    let caps = Caps::default();
    for (r, d) in [(1, 6), (2, 6), (2, 9), (3, 8)] {
        let max_eps = 1.0 - r as f64 / d as f64;
        for i in 1..=6 {
            let eps = max_eps * i as f64 / 6.0;
            let closed = beta_closed_form(eps, r, d)?;
            let oracle = beta_numeric_oracle(eps, r, d, &config)?;
            report.check((closed.beta - oracle.result.beta).abs() <= 1e-6 && oracle.violations == 0, || {
                format!("closed form {} vs oracle {} at eps = {eps}, r = {r}, d = {d}", closed.beta, oracle.result.beta)
            });
            let accept = accept_prob_exact(&closed.witness, r + 1, r, &caps)?;
            report.check((accept - closed.beta).abs() <= 1e-10, || {
                format!("witness acceptance {accept} differs from beta {} at eps = {eps}", closed.beta)
            });
            if r == 1 {
                let b1 = beta_r1(eps, d)?;
                report.check((b1 - closed.beta).abs() <= 1e-12, || format!("beta_r1 disagrees at eps = {eps}, d = {d}"));
            }
        }
    }
    Ok(())
}

fn schmidt_suite(report: &mut SuiteReport, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (da, db) in [(2, 2), (2, 3), (3, 4), (4, 4)] {
        for _ in 0..10 {
            let state = random_state(da, db, &mut rng);
            let data = schmidt_decompose(&state)?;
            let total: f64 = data.spectrum().iter().sum();
            report.check((total - 1.0).abs() < 1e-12, || format!("Schmidt weights sum to {total}"));
            for r in 1..=da.min(db) {
                let best = best_rank_r_approx(&state, r)?;
                let fidelity = best.inner(&state)?.norm_sqr();
                let tail = delta_r(&state, r)?;
                report.check((1.0 - fidelity - tail).abs() < 1e-10, || {
                    format!("best rank-{r} fidelity {fidelity} vs tail {tail} at {da}x{db}")
                });
                report.check(schmidt_decompose(&best)?.rank() <= r, || format!("rank-{r} approximation has higher rank"));
            }
        }
    }
    Ok(())
}

fn ttns_suite(report: &mut SuiteReport, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = [
        (Tree::path(4)?, vec![2, 3, 3, 2]),
        (Tree::star(4)?, vec![3, 2, 2, 3]),
        (Tree::caterpillar(5)?, vec![2, 2, 3, 2, 2]),
    ];
    for (tree, dims) in &shapes {
        for _ in 0..10 {
            let state = TreeState::random(dims.clone(), &mut rng)?;
            for r in 1..=2 {
                let (approx, cert) = faithful_ttns_approx(&state, tree, r)?;
                report.check(is_ttns(&approx, tree, r, SCHMIDT_RANK_TOL)?.is_ttns, || {
                    format!("truncation output exceeds bond dimension {r}")
                });
                report.check(cert.overlap_bound_holds && cert.projection_bound_holds, || {
                    format!(
                        "certificate violated: overlap {} < bound {}",
                        cert.measured_overlap, cert.overlap_bound
                    )
                });
            }
        }
    }
    Ok(())
}

fn bounds_suite(report: &mut SuiteReport) -> Result<()> {
    let caps = Caps::default();
    for n in 1..=12 {
        for (a, b) in [(1, 10), (1, 5), (1, 4), (1, 3)] {
            let t = ratio(a, b);
            let one = prob_lds_le2_exact(n, &t, &t)?;
            let two = prob_lds_le2_ssyt(n, &t)?;
            report.check(one == two, || format!("LDS <= 2 paths disagree at N = {n}, t = {a}/{b}"));
        }
    }
    for alpha in rational_spectra() {
        let p = alpha.probs();
        for n in 1..=6 {
            let exact = prob_lds_le2_exact(n, &p[1], &p[2])?;
            let brute = accept_prob_brute(&alpha, n, 2, &caps)?;
            report.check(exact == brute, || format!("LDS <= 2 vs brute force at N = {n}"));
        }
    }
    for n in [1, 5, 20, 50] {
        for i in 1..=20 {
            let t = (0.5 / n as f64).min(1.0 / 3.0) * i as f64 / 20.0;
            let check = subsequence_bound_check(n, t)?;
            report.check(check.satisfied, || format!("subsequence bound fails at N = {n}, t = {t}"));
        }
    }
    Ok(())
}

fn linalg_suite(report: &mut SuiteReport, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=3 {
        for d in 1..=3 {
            let probs: Vec<f64> = {
                use rand::Rng;
                let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            };
            let alpha = Spectrum::new(probs.clone())?;
            for lambda in enumerate_partitions(n, n)? {
                let p = young_projector(&lambda, d)?;
                let dim = dim_symmetric_irrep(&lambda).to_f64().unwrap_or(f64::NAN);
                let expected = dim * schur_eval(&lambda, &alpha);
                let got = p.expectation_diagonal(&probs)?;
                report.check((got - expected).abs() < 1e-12, || {
                    format!("Tr(P_{lambda} rho^N) = {got}, expected {expected} at d = {d}")
                });
                report.check(p.idempotence_defect() < 1e-12 && p.hermiticity_defect() < 1e-12, || {
                    format!("P_{lambda} is not an orthogonal projector at d = {d}")
                });
            }
        }
    }
    for (da, db) in [(2, 2), (2, 3)] {
        let res = verify_sr_projector_identity(da, db, 2, 1, seed)?;
        report.check(res.local_residual <= 1e-10, || {
            format!("local projector residual {} at {da}x{db}", res.local_residual)
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let reports = run_suites(&Suite::ALL, &VerifyOptions::default());
        for r in &reports {
            assert!(r.passed(), "{}: {:?}", r.suite, r.failures);
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn hook_mutation_is_caught() {
        let broken = |lambda: &Partition| {
            let factorial: BigUint = (1..=lambda.n() as u64).product();
            let hooks: BigUint = lambda.hook_lengths().map(|h| BigUint::from(h as u64 + 1)).product();
            factorial / hooks
        };
        let options = VerifyOptions {
            dim: &broken,
            ..VerifyOptions::default()
        };
        assert!(!run_suite(Suite::Partitions, &options).passed());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
