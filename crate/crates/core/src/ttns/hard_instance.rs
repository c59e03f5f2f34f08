use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{total_dim, TreeState};
use super::tree::Tree;
use crate::partitions::Spectrum;
use crate::scalar::Scalar;
use crate::wss::{accept_prob_rank_test, bernoulli_estimate, lds_of, AcceptMethod, Acceptance, LetterSampler};
use crate::{domain, Caps, Result};

fn check_epsilon<S: Scalar>(epsilon: &S) -> Result<()> {
    // ε ≤ 1/√6 compared as 6ε² ≤ 1 so rationals stay exact.
    let six = S::from_u64(6);
    if !(*epsilon > S::zero()) || six * epsilon.clone() * epsilon.clone() > S::one() {
        return domain(format!("epsilon = {} must lie in (0, 1/sqrt(6)]", epsilon.to_f64()));
    }
    Ok(())
}

/// `(1 - 4ε²/m, 4ε²/(m(d-1)) × (d-1))` with `m = n - 1`.
pub fn hard_instance_spectrum<S: Scalar>(epsilon: &S, n: usize, d: usize) -> Result<Spectrum<S>> {
    check_epsilon(epsilon)?;
    if n < 2 || d < 2 {
        return domain(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    let m = S::from_u64(n as u64 - 1);
    let mass = S::from_u64(4) * epsilon.clone() * epsilon.clone() / m;
    let small = mass.clone() / S::from_u64(d as u64 - 1);
    let mut probs = vec![S::one() - mass];
    probs.extend(std::iter::repeat_n(small, d - 1));
    Spectrum::new(probs)
}

/// The edge state `Σ_j √p_j |j⟩|j⟩` placed on every edge. Vertex `v` carries one
/// `d`-level factor per incident edge, ordered by neighbour index with the
/// first neighbour most significant.
pub fn hard_instance_state(tree: &Tree, epsilon: f64, d: usize) -> Result<TreeState> {
    let spectrum = hard_instance_spectrum(&epsilon, tree.n(), d)?;
    let site_dims: Vec<usize> = (0..tree.n()).map(|v| d.pow(tree.degree(v) as u32)).collect();
    let total = total_dim(&site_dims)?;
    let roots: Vec<f64> = spectrum.probs().iter().map(|p| p.sqrt()).collect();

    // Position of each edge factor inside its endpoint's local index.
    let site_strides: Vec<usize> = {
        let mut acc = 1;
        let mut s = vec![0; tree.n()];
        for v in (0..tree.n()).rev() {
            s[v] = acc;
            acc *= site_dims[v];
        }
        s
    };
    let factor_stride = |v: usize, w: usize| {
        let nb = tree.neighbors(v);
        let pos = nb.binary_search(&w).expect("neighbour");
        d.pow((nb.len() - 1 - pos) as u32) * site_strides[v]
    };
    let edges = tree.edges();
    let strides: Vec<usize> = edges.iter().map(|&(u, v)| factor_stride(u, v) + factor_stride(v, u)).collect();

    let mut amps = vec![Complex64::from(0.0); total];
    let mut digits = vec![0usize; edges.len()];
    loop {
        let idx: usize = digits.iter().zip(&strides).map(|(j, s)| j * s).sum();
        let amp: f64 = digits.iter().map(|&j| roots[j]).product();
        amps[idx] = Complex64::from(amp);
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return TreeState::normalized(site_dims, amps);
            }
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Rounding slack between the distance and its lower bound, which coincide when `d = 2r - 1`.
pub const FARNESS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Farness {
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Best rank-`r` overlap squared on one edge, `1 - 4ε²/m + ((r-1)/(d-1))·4ε²/m`.
    pub edge_fidelity: f64,
    /// `sqrt(1 - F^m)`, the distance to the product of per-edge best approximations.
    pub distance: f64,
    /// `sqrt(1 - (1 - 2ε²/m)^m)`, the relaxed lower bound.
    pub lower_bound: f64,
    pub at_least_epsilon: bool,
}

/// Trace-distance lower bound of the hard instance from bond dimension `r`.
pub fn farness_hard_instance(epsilon: f64, n: usize, d: usize, r: usize) -> Result<Farness> {
    check_epsilon(&epsilon)?;
    if n < 2 || r == 0 || r >= d || d < 2 * r - 1 {
        return domain(format!("need n >= 2, 1 <= r < d and d >= 2r-1, got n = {n}, d = {d}, r = {r}"));
    }
    let m = (n - 1) as f64;
    let mass = 4.0 * epsilon * epsilon / m;
    let edge_fidelity = 1.0 - mass + (r as f64 - 1.0) / (d as f64 - 1.0) * mass;
    let distance = (1.0 - edge_fidelity.powf(m)).max(0.0).sqrt();
    let lower_bound = (1.0 - (1.0 - 2.0 * epsilon * epsilon / m).powf(m)).max(0.0).sqrt();
    Ok(Farness {
        epsilon,
        n,
        d,
        r,
        edge_fidelity,
        distance,
        lower_bound,
        at_least_epsilon: lower_bound >= epsilon && distance >= lower_bound - FARNESS_TOL,
    })
}

/// Acceptance of the TTNS test on the hard instance, `(single-edge acceptance)^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardAcceptance<S> {
    pub single_edge: Option<Acceptance<S>>,
    pub value: Acceptance<S>,
}

/// Runs the rank test on every edge. Monte-Carlo samples `n-1` independent
/// words per trial and accepts when all of them have LDS at most `r`.
pub fn ttns_test_accept_hard_instance<S: Scalar>(
    epsilon: &S,
    n: usize,
    d: usize,
    r: usize,
    copies: usize,
    method: AcceptMethod,
    caps: &Caps,
) -> Result<HardAcceptance<S>> {
    let spectrum = hard_instance_spectrum(epsilon, n, d)?;
    let m = (n - 1) as u32;
    if let AcceptMethod::MonteCarlo { samples, seed } = method {
        if copies == 0 || r == 0 {
            return domain("the rank test needs N >= 1 and r >= 1");
        }
        let sampler = LetterSampler::new(&spectrum);
        let est = bernoulli_estimate(samples, seed, |rng, word| {
            (0..m).all(|_| {
                sampler.fill_word(rng, copies, word);
                lds_of(word) <= r
            })
        })?;
        return Ok(HardAcceptance {
            single_edge: None,
            value: Acceptance::Estimate(est),
        });
    }
    let single = accept_prob_rank_test(&spectrum, copies, r, method, caps)?;
    let value = match &single {
        Acceptance::Value { value, short_circuit } => Acceptance::Value {
            value: value.powu(m),
            short_circuit: *short_circuit,
        },
        Acceptance::Estimate(_) => unreachable!("deterministic methods return values"),
    };
    Ok(HardAcceptance {
        single_edge: Some(single),
        value,
    })
}
