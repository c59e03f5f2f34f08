//! Three-letter decreasing subsequences, majorization, a Chernoff tail and the
//! copy budget of the qutrit-pair product test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::partitions::{dim_symmetric_irrep, schur_eval, Partition, Spectrum};
use crate::scalar::Scalar;
use crate::ttns::copies::single_edge_copies;
use crate::{domain, Caps, Result};

/// Constant in the linear correction term of the three-letter bound.
pub const C2: f64 = 22.0;

fn check_weights<S: Scalar>(x: &S, y: &S) -> Result<()> {
    let two = S::from_u64(2);
    if y.is_negative() || x < y || two * x.clone() > S::one() - y.clone() {
        return domain(format!(
            "weights must satisfy 0 <= y <= x <= (1-y)/2, got x = {}, y = {}",
            x.to_f64(),
            y.to_f64()
        ));
    }
    Ok(())
}

/// `Pr[LDS ≤ 2]` for words over `(1-x-y, x, y)`, as a Schur sum over two-row shapes.
pub fn prob_lds_le2_exact<S: Scalar>(n: usize, x: &S, y: &S) -> Result<S> {
    check_weights(x, y)?;
    if n == 0 {
        return domain("word length must be positive");
    }
    let alpha = Spectrum::new(vec![S::one() - x.clone() - y.clone(), x.clone(), y.clone()])?;
    Ok((0..=n / 2)
        .map(|j| {
            let lambda = Partition::new(vec![n - j, j]).expect("two-row shape");
            S::from_biguint(&dim_symmetric_irrep(&lambda)) * schur_eval(&lambda, &alpha)
        })
        .fold(S::zero(), |a, b| a + b))
}

/// `Pr[LDS ≤ 2]` at `x = y = t` from the explicit tableau counts of each
/// two-row shape, graded by the number of 1s.
pub fn prob_lds_le2_ssyt<S: Scalar>(n: usize, t: &S) -> Result<S> {
    check_weights(t, t)?;
    if n == 0 {
        return domain("word length must be positive");
    }
    let heavy = S::one() - S::from_u64(2) * t.clone();
    // term[i] = (1-2t)^i t^{N-i}
    let mut hp = vec![S::one(); n + 1];
    let mut tp = vec![S::one(); n + 1];
    for i in 1..=n {
        hp[i] = hp[i - 1].clone() * heavy.clone();
        tp[i] = tp[i - 1].clone() * t.clone();
    }
    let term = |i: usize| hp[i].clone() * tp[n - i].clone();
    let mut total = S::zero();
    // d_j = C(N,j) - C(N,j-1)
    let mut dim = S::one();
    let mut binom = S::one();
    for j in 0..=n / 2 {
        if j > 0 {
            let next = binom.clone() * S::from_u64((n - j + 1) as u64) / S::from_u64(j as u64);
            dim = next.clone() - binom;
            binom = next;
        }
        let mut s = S::zero();
        for i in 0..=j {
            s = s + S::from_u64(((i + 1) * (n - 2 * j + 1)) as u64) * term(i);
        }
        for i in j + 1..=n - j {
            s = s + S::from_u64(((j + 1) * (n - i - j + 1)) as u64) * term(i);
        }
        total = total + dim.clone() * s;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceBound {
    pub n: usize,
    pub t: f64,
    /// `Pr[321 is a subsequence]` at `x = y = t`.
    pub exact: f64,
    /// `N²t²/4 - 22 t`.
    pub bound: f64,
    pub satisfied: bool,
    /// `N t ≤ 1/2`.
    pub in_window: bool,
}

/// Compares the exact probability of a `321` subsequence with the lower bound.
/// Outside `N t ≤ 1/2` the comparison is reported, not required.
pub fn subsequence_bound_check(n: usize, t: f64) -> Result<SubsequenceBound> {
    if !(0.0..=1.0 / 3.0).contains(&t) {
        return domain("t must lie in [0, 1/3]");
    }
    let exact = 1.0 - prob_lds_le2_ssyt(n, &t)?;
    let nt = n as f64 * t;
    let bound = nt * nt / 4.0 - C2 * t;
    Ok(SubsequenceBound {
        n,
        t,
        exact,
        bound,
        satisfied: exact >= bound,
        in_window: nt <= 0.5,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowScan {
    pub points: usize,
    pub violations: usize,
    /// Largest `c` on the scan grid such that every point with `N t ≤ c` satisfies the bound.
    pub largest_c1: f64,
    /// Smallest value of `exact - bound` seen.
    pub min_margin: f64,
}

/// Checks the bound for `N ∈ 1..=n_max` and `t_steps` values of `t` with `N t ≤ window`.
pub fn scan_subsequence_bound(n_max: usize, t_steps: usize, window: f64) -> Result<WindowScan> {
    if n_max == 0 || t_steps == 0 || !(window > 0.0) {
        return domain("need n_max >= 1, t_steps >= 1 and a positive window");
    }
    let rows: Vec<Result<Vec<SubsequenceBound>>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let t_max = (window / n as f64).min(1.0 / 3.0);
            (1..=t_steps)
                .map(|k| subsequence_bound_check(n, t_max * k as f64 / t_steps as f64))
                .collect()
        })
        .collect();
    let mut points = 0;
    let mut violations = 0;
    let mut first_bad = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for row in rows {
        for b in row? {
            points += 1;
            min_margin = min_margin.min(b.exact - b.bound);
            if !b.satisfied {
                violations += 1;
                first_bad = first_bad.min(b.n as f64 * b.t);
            }
        }
    }
    let largest_c1 = if violations == 0 {
        window.min(0.5)
    } else {
        // Largest multiple of 1/1000 strictly below the first failing N t.
        ((first_bad * 1000.0).ceil() - 1.0).max(0.0) / 1000.0
    };
    Ok(WindowScan {
        points,
        violations,
        largest_c1,
        min_margin,
    })
}

/// `p ≻ q`: every prefix sum of sorted `p` is at least the matching prefix sum of `q`.
pub fn majorization_check<S: Scalar>(p: &Spectrum<S>, q: &Spectrum<S>) -> bool {
    let d = p.d().max(q.d());
    let (p, q) = (p.padded(d), q.padded(d));
    let (mut sp, mut sq) = (S::zero(), S::zero());
    for (a, b) in p.probs().iter().zip(q.probs()) {
        sp = sp + a.clone();
        sq = sq + b.clone();
        if sp < sq && !sp.approx_eq(&sq) {
            return false;
        }
    }
    true
}

/// `exp(-μ t²/(2 + t))`.
pub fn chernoff_tail(mu: f64, t: f64) -> Result<f64> {
    if !(mu >= 0.0 && t >= 0.0) {
        return domain("chernoff_tail needs mu >= 0 and t >= 0");
    }
    Ok((-mu * t * t / (2.0 + t)).exp())
}

/// Placeholder constant in `N0 = ⌈C N1/ε²⌉` for the product-test phase.
pub const PRODUCT_TEST_CONSTANT: f64 = 100.0;
/// Placeholder for the window constant of the three-letter bound.
pub const C1_PLACEHOLDER: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prod2Budget {
    pub n: usize,
    pub epsilon: f64,
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub total: u64,
    /// `min(√(10/22), 1/√2)`.
    pub delta0: f64,
    pub in_window: bool,
    pub product_test_constant: f64,
    pub c1: f64,
}

/// Copy budget for testing products of `n/2` qutrit pairs of Schmidt rank at most 2.
///
/// `N3 = ⌊20√n/ε²⌋`, `N2` is the single-edge rank-2 count rejecting with
/// probability 99/100 at Schmidt tail `0.05 c1 ε²/√n`, `N1 = N2 + N3` and
/// `N0 = ⌈C N1/ε²⌉`.
pub fn prod2_test_budget(n: usize, epsilon: f64, caps: &Caps) -> Result<Prod2Budget> {
    if n == 0 || n % 2 == 1 {
        return domain(format!("n must be a positive even number, got {n}"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return domain("epsilon must lie in (0, 1]");
    }
    let delta0 = (10.0 / C2).sqrt().min(0.5f64.sqrt());
    let root_n = (n as f64).sqrt();
    let n3 = (20.0 * root_n / (epsilon * epsilon)).floor() as u64;
    let tail = 0.05 * C1_PLACEHOLDER * epsilon * epsilon / root_n;
    let (n2, _, _) = single_edge_copies(2, tail, 0.01, caps)?;
    let n1 = n2 + n3;
    let n0 = (PRODUCT_TEST_CONSTANT * n1 as f64 / (epsilon * epsilon)).ceil() as u64;
    Ok(Prod2Budget {
        n,
        epsilon,
        n0,
        n1,
        n2,
        n3,
        total: n0 + n1,
        delta0,
        in_window: epsilon <= delta0,
        product_test_constant: PRODUCT_TEST_CONSTANT,
        c1: C1_PLACEHOLDER,
    })
}
