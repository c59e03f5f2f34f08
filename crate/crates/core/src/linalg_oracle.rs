//! Dense operators on `(C^d)^{⊗N}` at micro scale: permutation operators,
//! symmetric and antisymmetric projectors, isotypic projectors built from
//! symmetric-group characters, and the local-projector identity for the
//! Schmidt-rank test.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::partitions::{dim_symmetric_irrep, enumerate_partitions, Partition};
use crate::schmidt::random_sr_state;
use crate::{domain, Error, Result};

/// Largest `d^N` for which operators are built.
pub const OPERATOR_GUARD: usize = 512;

/// A square matrix on `(C^d)^{⊗N}`; tensor position 0 is most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub d: usize,
    pub n: usize,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `‖A² - A‖_F`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).norm()
    }

    /// `‖A - A†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// `Tr(A ρ^{⊗N})` for diagonal `ρ = diag(p)`.
    pub fn expectation_diagonal(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.d {
            return Err(Error::DimensionMismatch("spectrum length differs from d".into()));
        }
        let mut total = 0.0;
        for x in 0..self.dim() {
            let w: f64 = digits(x, self.d, self.n).iter().map(|&a| p[a]).product();
            total += self.matrix[(x, x)].re * w;
        }
        Ok(total)
    }
}

fn guard(d: usize, n: usize) -> Result<usize> {
    if d == 0 || n == 0 {
        return domain("need d >= 1 and N >= 1");
    }
    let dim = (d as f64).powi(n as i32);
    if dim > OPERATOR_GUARD as f64 {
        return Err(Error::CapExceeded {
            what: "dense operator dimension",
            needed: format!("{dim}"),
            limit: OPERATOR_GUARD.to_string(),
            hint: "use smaller d or N",
        });
    }
    Ok(d.pow(n as u32))
}

fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for i in (0..n).rev() {
        out[i] = x % d;
        x /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &a| acc * d + a)
}

fn check_permutation(pi: &[usize]) -> Result<()> {
    let mut seen = vec![false; pi.len()];
    for &p in pi {
        if p >= pi.len() || seen[p] {
            return domain(format!("{pi:?} is not a permutation of 0..{}", pi.len()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Adds `coeff · W_π` into `m`.
fn add_permutation(m: &mut DMatrix<Complex64>, pi: &[usize], d: usize, coeff: f64) {
    let n = pi.len();
    let mut y = vec![0; n];
    for x in 0..m.nrows() {
        let xs = digits(x, d, n);
        for (i, &a) in xs.iter().enumerate() {
            y[pi[i]] = a;
        }
        m[(undigits(&y, d), x)] += Complex64::from(coeff);
    }
}

/// `W_π`, moving the tensor factor at position `i` to position `π(i)`, so that
/// `W_π W_σ = W_{π∘σ}`. Positions are 0-based.
pub fn permutation_operator(pi: &[usize], d: usize) -> Result<DenseOperator> {
    check_permutation(pi)?;
    let dim = guard(d, pi.len())?;
    let mut m = DMatrix::zeros(dim, dim);
    add_permutation(&mut m, pi, d, 1.0);
    Ok(DenseOperator { matrix: m, d, n: pi.len() })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Cycle lengths of `π`, sorted non-increasingly.
pub fn cycle_type(pi: &[usize]) -> Partition {
    let mut seen = vec![false; pi.len()];
    let mut lengths = Vec::new();
    for start in 0..pi.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = pi[x];
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(lengths).expect("cycle lengths are positive")
}

pub fn sign(pi: &[usize]) -> i64 {
    let ct = cycle_type(pi);
    if (pi.len() - ct.rows()) % 2 == 0 { 1 } else { -1 }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

fn projector_from_class_function(d: usize, n: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<DenseOperator> {
    let dim = guard(d, n)?;
    let mut m = DMatrix::zeros(dim, dim);
    for pi in permutations(n) {
        let c = f(&pi);
        if c != 0.0 {
            add_permutation(&mut m, &pi, d, c);
        }
    }
    Ok(DenseOperator { matrix: m, d, n })
}

/// `(1/N!) Σ_π sign(π) W_π`.
pub fn antisymmetric_projector(d: usize, n: usize) -> Result<DenseOperator> {
    let norm = factorial(n);
    projector_from_class_function(d, n, |pi| sign(pi) as f64 / norm)
}

/// `(1/N!) Σ_π W_π`.
pub fn symmetric_projector(d: usize, n: usize) -> Result<DenseOperator> {
    let norm = factorial(n);
    projector_from_class_function(d, n, |_| 1.0 / norm)
}

type CharKey = (Vec<usize>, Vec<usize>);

static CHARACTER_MEMO: Mutex<Option<HashMap<CharKey, i64>>> = Mutex::new(None);

/// `χ_λ` on the class of cycle type `μ`, by removing border strips.
pub fn mn_character(lambda: &Partition, cycle_type: &Partition) -> Result<i64> {
    if lambda.n() != cycle_type.n() {
        return domain(format!("|{lambda}| != |{cycle_type}|"));
    }
    Ok(character(lambda.parts(), cycle_type.parts()))
}

fn character(lambda: &[usize], mu: &[usize]) -> i64 {
    if mu.is_empty() {
        return 1;
    }
    let key = (lambda.to_vec(), mu.to_vec());
    if let Some(&v) = CHARACTER_MEMO.lock().expect("memo lock").get_or_insert_with(HashMap::new).get(&key) {
        return v;
    }
    let k = mu[0];
    let rest = &mu[1..];
    let len = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &p)| p + len - 1 - i).collect();
    let mut total = 0i64;
    for (idx, &b) in beta.iter().enumerate() {
        if b < k || beta.contains(&(b - k)) {
            continue;
        }
        let between = beta.iter().filter(|&&c| c > b - k && c < b).count();
        let mut next = beta.clone();
        next[idx] = b - k;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let parts: Vec<usize> = next
            .iter()
            .enumerate()
            .map(|(i, &c)| c - (len - 1 - i))
            .filter(|&p| p > 0)
            .collect();
        let s = if between % 2 == 0 { 1 } else { -1 };
        total += s * character(&parts, rest);
    }
    CHARACTER_MEMO
        .lock()
        .expect("memo lock")
        .get_or_insert_with(HashMap::new)
        .insert(key, total);
    total
}

/// Projector onto the `λ`-isotypic component,
/// `(dim λ / N!) Σ_π χ_λ(π) W_π`.
pub fn young_projector(lambda: &Partition, d: usize) -> Result<DenseOperator> {
    let n = lambda.n();
    let scale = dim_symmetric_irrep(lambda).to_f64().expect("small dimension") / factorial(n);
    let mut by_class: HashMap<Partition, f64> = HashMap::new();
    projector_from_class_function(d, n, |pi| {
        let ct = cycle_type(pi);
        let chi = *by_class
            .entry(ct.clone())
            .or_insert_with(|| character(lambda.parts(), ct.parts()) as f64);
        scale * chi
    })
}

/// `Π_{≤r} = Σ_{ℓ(λ) ≤ r} P_λ` on `(C^d)^{⊗N}`.
pub fn rank_test_projector(d: usize, n: usize, r: usize) -> Result<DenseOperator> {
    let dim = guard(d, n)?;
    let mut m = DMatrix::zeros(dim, dim);
    for lambda in enumerate_partitions(n, r)? {
        m += young_projector(&lambda, d)?.matrix;
    }
    Ok(DenseOperator { matrix: m, d, n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrIdentity {
    pub d_a: usize,
    pub d_b: usize,
    pub n: usize,
    pub r: usize,
    /// `‖(Π_{≤r} ⊗ 1) Π_sym - (1 ⊗ Π_{≤r}) Π_sym‖_F`.
    pub local_residual: f64,
    /// `‖(Π_{≤r} ⊗ 1) Π_sym - Π_span‖_F`, where `Π_span` projects onto the
    /// span of sampled `|φ⟩^{⊗N}` with `φ` of Schmidt rank at most `r`.
    pub span_residual: f64,
    pub span_rank: usize,
    pub samples: usize,
}

/// Lifts an operator on the `A` (or `B`) factors of `(C^{d_A} ⊗ C^{d_B})^{⊗N}`
/// to the whole space, with copies outermost and `A` before `B` inside each copy.
fn embed_local(op: &DMatrix<Complex64>, d_a: usize, d_b: usize, n: usize, on_a: bool) -> DMatrix<Complex64> {
    let dim = (d_a * d_b).pow(n as u32);
    let split = |x: usize| {
        let pairs = digits(x, d_a * d_b, n);
        let a: Vec<usize> = pairs.iter().map(|p| p / d_b).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p % d_b).collect();
        (undigits(&a, d_a), undigits(&b, d_b))
    };
    let coords: Vec<(usize, usize)> = (0..dim).map(split).collect();
    DMatrix::from_fn(dim, dim, |x, y| {
        let ((ax, bx), (ay, by)) = (coords[x], coords[y]);
        if on_a {
            if bx == by { op[(ax, ay)] } else { Complex64::from(0.0) }
        } else if ax == ay {
            op[(bx, by)]
        } else {
            Complex64::from(0.0)
        }
    })
}

/// Checks that the local rank-test projector on either side agrees on the
/// symmetric subspace, and compares it with the span of product powers of
/// Schmidt-rank-`r` states.
pub fn verify_sr_projector_identity(d_a: usize, d_b: usize, n: usize, r: usize, seed: u64) -> Result<SrIdentity> {
    if r == 0 {
        return domain("r must be at least 1");
    }
    let dim = guard(d_a * d_b, n)?;
    let sym = symmetric_projector(d_a * d_b, n)?.matrix;
    let pa = embed_local(&rank_test_projector(d_a, n, r)?.matrix, d_a, d_b, n, true);
    let pb = embed_local(&rank_test_projector(d_b, n, r)?.matrix, d_a, d_b, n, false);
    let left = &pa * &sym;
    let local_residual = (&left - &pb * &sym).norm();

    let sym_dim = sym.trace().re.round() as usize;
    let samples = 4 * sym_dim + 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stack = DMatrix::<Complex64>::zeros(dim, samples);
    for s in 0..samples {
        let phi = random_sr_state(d_a, d_b, r.min(d_a).min(d_b), &mut rng);
        let v = DVector::from_fn(d_a * d_b, |i, _| phi.amplitudes()[(i / d_b, i % d_b)]);
        let mut power = DVector::from_element(1, Complex64::from(1.0));
        for _ in 0..n {
            power = power.kronecker(&v);
        }
        stack.set_column(s, &power);
    }
    let svd = stack.svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-8 * top)
        .collect();
    let basis = DMatrix::from_fn(dim, keep.len(), |i, j| u[(i, keep[j])]);
    let span = &basis * basis.adjoint();
    Ok(SrIdentity {
        d_a,
        d_b,
        n,
        r,
        local_residual,
        span_residual: (&left - span).norm(),
        span_rank: keep.len(),
        samples,
    })
}
