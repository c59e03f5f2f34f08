use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::partitions::Spectrum;
use crate::ranktest::per_round_soundness_large_d;
use crate::wss::LdsAutomaton;
use crate::{domain, Caps, Error, Result};

/// Logarithm used in `α(n) = log(4(n-1))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbThreshold {
    pub threshold: f64,
    pub alpha: f64,
    pub log_base: LogBase,
    /// `r ≥ max(50, 1 + α)` and `ε ≤ 1/√6`.
    pub in_regime: bool,
    pub warnings: Vec<String>,
}

/// `(n-1) r² / (400 α ε²)` with `α = log(4(n-1))`; below this many copies the
/// hard instance passes with probability at least 1/2.
pub fn lb_copy_threshold(n: usize, r: usize, epsilon: f64, base: LogBase) -> Result<LbThreshold> {
    if n < 2 || r == 0 || !(epsilon > 0.0) {
        return domain("need n >= 2, r >= 1 and epsilon > 0");
    }
    let m = (n - 1) as f64;
    let alpha = base.log(4.0 * m);
    let rf = r as f64;
    let mut warnings = Vec::new();
    if rf < 50f64.max(1.0 + alpha) {
        warnings.push(format!("r = {r} is below max(50, 1 + alpha) = {}", 50f64.max(1.0 + alpha)));
    }
    if 6.0 * epsilon * epsilon > 1.0 {
        warnings.push(format!("epsilon = {epsilon} exceeds 1/sqrt(6)"));
    }
    Ok(LbThreshold {
        threshold: m * rf * rf / (400.0 * alpha * epsilon * epsilon),
        alpha,
        log_base: base,
        in_regime: warnings.is_empty(),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyUpper {
    pub copies: u64,
    /// `ε/√(2(n-1))`.
    pub delta: f64,
    pub witness: Vec<f64>,
    /// Acceptance of the witness at `copies`.
    pub acceptance: f64,
}

/// Most copies ever tried by [`ttns_copy_upper`].
pub const COPY_SEARCH_LIMIT: u64 = 50_000_000;

/// Smallest `N` at which the rank-`r` test accepts a single-edge witness with
/// tail mass `δ² = ε²/(2(n-1))` with probability below `target`.
///
/// The witness is `(1 - rδ², δ² × r)`, the `r+1`-letter spectrum whose tail is
/// exactly `δ²`. The count is an instantiated constant for the `O(n r²/ε²)` bound.
pub fn ttns_copy_upper(n: usize, r: usize, epsilon: f64, target: f64, caps: &Caps) -> Result<CopyUpper> {
    if n < 2 || r == 0 || !(epsilon > 0.0 && epsilon <= 1.0) {
        return domain("need n >= 2, r >= 1 and 0 < epsilon <= 1");
    }
    let delta = epsilon / (2.0 * (n - 1) as f64).sqrt();
    let d2 = delta * delta;
    let (copies, witness, acceptance) = single_edge_copies(r, d2, target, caps)?;
    Ok(CopyUpper {
        copies,
        delta,
        witness,
        acceptance,
    })
}

/// Smallest `N` with acceptance below `target` on `(1 - r·tail, tail × r)`,
/// together with the witness and its acceptance at that `N`.
pub fn single_edge_copies(r: usize, tail: f64, target: f64, caps: &Caps) -> Result<(u64, Vec<f64>, f64)> {
    if r == 0 || !(tail > 0.0) || tail > 1.0 / (r as f64 + 1.0) {
        return domain("need r >= 1 and 0 < tail <= 1/(r+1)");
    }
    if !(target > 0.0 && target <= 1.0) {
        return domain("soundness target must lie in (0, 1]");
    }
    let mut witness = vec![1.0 - r as f64 * tail];
    witness.extend(std::iter::repeat_n(tail, r));
    if target >= 1.0 {
        return Ok((0, witness, 1.0));
    }
    let spectrum = Spectrum::new(witness.clone())?;
    let automaton = LdsAutomaton::new(r + 1, r, caps)?;
    let mut dist = automaton.initial::<f64>();
    for copies in 1..=COPY_SEARCH_LIMIT {
        dist = automaton.step(&spectrum, &dist)?;
        let acceptance: f64 = dist.iter().sum();
        if acceptance < target {
            return Ok((copies, witness, acceptance));
        }
    }
    Err(Error::CapExceeded {
        what: "copy search",
        needed: format!("more than {COPY_SEARCH_LIMIT}"),
        limit: COPY_SEARCH_LIMIT.to_string(),
        hint: "increase epsilon or the soundness target",
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FewCopyTreeBounds {
    pub upper: BigUint,
    pub lower: BigUint,
    /// Instantiated constants, not guaranteed by any theorem.
    pub c_upper: f64,
    pub c_lower: f64,
}

/// `r+1`-copy tree-testing budgets `C_u (n-1)^r (r+1)!/ε^{2r}` and
/// `C_l (n-1)^{r-1} (r+1)!/ε^{2r}`.
///
/// `C_u = 2^r (r+1) ln 3 / r` comes from testing every edge at rank distance
/// `δ² = ε²/(2(n-1))`, where each round rejects with probability at least
/// `r δ^{2r}/(r+1)!`, and repeating until the acceptance is below 1/3.
/// `C_l = ln 3 / (2·4^r)`.
pub fn few_copy_tree_bounds(n: usize, r: usize, epsilon: f64) -> Result<FewCopyTreeBounds> {
    if n < 2 || r < 2 {
        return domain("need n >= 2 and r >= 2");
    }
    per_round_soundness_large_d(epsilon, r)?;
    let rf = r as f64;
    let ln3 = 3f64.ln();
    let c_upper = 2f64.powi(r as i32) * (rf + 1.0) * ln3 / rf;
    let c_lower = ln3 / (2.0 * 4f64.powi(r as i32));
    let exact = |x: f64| BigRational::from_float(x).expect("finite");
    let fact: BigUint = (1..=r as u64 + 1).map(BigUint::from).product();
    let m = BigUint::from(n as u64 - 1);
    let eps_2r = num_traits::pow(exact(epsilon), 2 * r);
    let core = BigRational::from_integer(fact.into()) / eps_2r;
    let upper = exact(c_upper) * BigRational::from_integer(num_traits::pow(m.clone(), r).into()) * core.clone();
    let lower = exact(c_lower) * BigRational::from_integer(num_traits::pow(m, r - 1).into()) * core;
    let to_uint = |x: BigRational| x.to_integer().to_biguint().expect("non-negative");
    Ok(FewCopyTreeBounds {
        upper: to_uint(upper.ceil()),
        lower: to_uint(lower.floor()),
        c_upper,
        c_lower,
    })
}

/// Ratio helper for reports.
pub fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    if b.is_zero() {
        return f64::INFINITY;
    }
    let g = a.gcd(b);
    let (a, b) = (a / &g, b / &g);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}
