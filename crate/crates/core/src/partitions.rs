//! Integer partitions, symmetric-group irrep dimensions and Schur polynomials.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::{domain, Error, Result};

/// A weakly decreasing list of positive parts.
///
/// The derived ordering is lexicographic on the parts, which gives partitions a
/// canonical order for use as map keys.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Trailing zeros are dropped; any other violation of weak decrease is an error.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return domain(format!("{parts:?} is not a weakly decreasing list of positive parts"));
        }
        Ok(Partition { parts })
    }

    /// The single-row partition `(n)`.
    pub fn row(n: usize) -> Self {
        Partition { parts: if n == 0 { vec![] } else { vec![n] } }
    }

    /// The single-column partition `(1^n)`.
    pub fn column(n: usize) -> Self {
        Partition { parts: vec![1; n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The size `N` of the partition.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows, `ℓ(λ)`.
    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.parts.first().copied().unwrap_or(0);
        let parts = (0..width)
            .map(|j| self.parts.iter().take_while(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }

    /// Hook lengths, row by row.
    pub fn hook_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        let conj = self.conjugate();
        self.parts.iter().enumerate().flat_map(move |(i, &row)| {
            let conj = conj.parts.clone();
            (0..row).map(move |j| (row - j - 1) + (conj[j] - i - 1) + 1)
        })
    }

    /// Cells as `(row, column)` pairs in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &row)| (0..row).map(move |j| (i, j)))
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// A probability vector sorted non-increasingly.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<S> {
    probs: Vec<S>,
}

impl<S: Scalar> Spectrum<S> {
    /// Sorts the entries and checks non-negativity and normalisation.
    pub fn new(mut probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return domain("a spectrum needs at least one entry");
        }
        if probs.iter().any(|p| !(*p >= S::zero())) {
            return domain("spectrum entries must be non-negative numbers");
        }
        let total = probs.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !total.approx_eq(&S::one()) {
            return domain(format!("spectrum sums to {} instead of 1", total.to_f64()));
        }
        probs.sort_by(|a, b| b.partial_cmp(a).expect("entries are ordered"));
        Ok(Spectrum { probs })
    }

    /// The uniform distribution on `d` letters.
    pub fn uniform(d: usize) -> Self {
        let p = S::one() / S::from_u64(d as u64);
        Spectrum { probs: vec![p; d] }
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// Alphabet size.
    pub fn d(&self) -> usize {
        self.probs.len()
    }

    /// Number of strictly positive entries.
    pub fn support(&self) -> usize {
        self.probs.iter().filter(|p| **p > S::zero()).count()
    }

    /// Mass beyond the `r` largest entries.
    pub fn tail_mass(&self, r: usize) -> S {
        self.probs
            .iter()
            .skip(r)
            .cloned()
            .fold(S::zero(), |a, b| a + b)
    }

    /// Zero-pads (never truncates) to `d` entries.
    pub fn padded(&self, d: usize) -> Self {
        let mut probs = self.probs.clone();
        probs.resize(d.max(probs.len()), S::zero());
        Spectrum { probs }
    }

    pub fn to_f64(&self) -> Spectrum<f64> {
        Spectrum {
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn to_vec_f64(&self) -> Vec<f64> {
        self.probs.iter().map(Scalar::to_f64).collect()
    }
}

/// All partitions of `n` with at most `max_rows` parts, reverse-lexicographically.
pub fn enumerate_partitions(n: usize, max_rows: usize) -> Result<Vec<Partition>> {
    if n == 0 || max_rows == 0 {
        return domain("enumerate_partitions needs n >= 1 and max_rows >= 1");
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(max_rows);
    fill_partitions(n, n, max_rows, &mut current, &mut out);
    Ok(out)
}

fn fill_partitions(
    remaining: usize,
    max_part: usize,
    rows_left: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition { parts: current.clone() });
        return;
    }
    if rows_left == 0 {
        return;
    }
    // The remaining rows must be able to absorb what is left.
    let lowest = remaining.div_ceil(rows_left);
    for part in (lowest..=max_part.min(remaining)).rev() {
        current.push(part);
        fill_partitions(remaining - part, part, rows_left - 1, current, out);
        current.pop();
    }
}

/// Number of partitions of `n` into at most `max_rows` parts.
pub fn count_partitions(n: usize, max_rows: usize) -> BigUint {
    // p(n, k) = partitions with parts at most k (conjugate symmetry).
    let mut table = vec![BigUint::zero(); n + 1];
    table[0] = BigUint::one();
    for part in 1..=max_rows.min(n.max(1)) {
        for total in part..=n {
            let add = table[total - part].clone();
            table[total] += add;
        }
    }
    table[n].clone()
}

/// `dim(P_λ)` by the hook-length formula, in exact integer arithmetic.
pub fn dim_symmetric_irrep(lambda: &Partition) -> BigUint {
    let factorial = (1..=lambda.n()).fold(BigUint::one(), |acc, k| acc * k);
    let hooks = lambda.hook_lengths().fold(BigUint::one(), |acc, h| acc * h);
    factorial / hooks
}

/// Number of SSYT of shape `λ` over `[d]`, by the hook-content formula.
pub fn count_ssyt(lambda: &Partition, d: usize) -> BigUint {
    if lambda.rows() > d {
        return BigUint::zero();
    }
    let numer = lambda
        .cells()
        .fold(BigUint::one(), |acc, (i, j)| acc * (d + j - i));
    let hooks = lambda.hook_lengths().fold(BigUint::one(), |acc, h| acc * h);
    numer / hooks
}

/// `h_0, …, h_{kmax}` of the spectrum, adding one variable at a time.
pub fn complete_homogeneous_table<S: Scalar>(kmax: usize, alpha: &Spectrum<S>) -> Vec<S> {
    let mut h = vec![S::zero(); kmax + 1];
    h[0] = S::one();
    for a in alpha.probs() {
        if a.is_zero() {
            continue;
        }
        for k in 1..=kmax {
            let prev = h[k - 1].clone();
            h[k] = h[k].clone() + a.clone() * prev;
        }
    }
    h
}

/// The complete homogeneous symmetric polynomial `h_k(α)`.
pub fn complete_homogeneous<S: Scalar>(k: usize, alpha: &Spectrum<S>) -> S {
    complete_homogeneous_table(k, alpha).pop().expect("table has k+1 entries")
}

/// `s_λ(α)` through the Jacobi-Trudi determinant `det(h_{λ_i - i + j})`.
pub fn schur_eval<S: Scalar>(lambda: &Partition, alpha: &Spectrum<S>) -> S {
    let h = complete_homogeneous_table(lambda.n() + lambda.rows(), alpha);
    schur_from_table(lambda, alpha.d(), &h)
}

/// Jacobi-Trudi with a precomputed `h` table covering indices up to `|λ| + ℓ(λ)`.
pub fn schur_from_table<S: Scalar>(lambda: &Partition, d: usize, h: &[S]) -> S {
    let l = lambda.rows();
    if l == 0 {
        return S::one();
    }
    if l > d {
        return S::zero();
    }
    let entry = |i: usize, j: usize| -> S {
        let idx = lambda.parts()[i] as isize - i as isize + j as isize;
        if idx < 0 {
            S::zero()
        } else {
            h[idx as usize].clone()
        }
    };
    let rows = (0..l).map(|i| (0..l).map(|j| entry(i, j)).collect()).collect();
    S::determinant(rows)
}

/// `s_λ(α)` summed directly over semistandard tableaux; the oracle for [`schur_eval`].
pub fn schur_eval_ssyt<S: Scalar>(lambda: &Partition, alpha: &Spectrum<S>, cap: u64) -> Result<S> {
    let d = alpha.d();
    let count = count_ssyt(lambda, d);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            what: "SSYT",
            needed: count.to_string(),
            limit: cap.to_string(),
            hint: "use the Jacobi-Trudi evaluation",
        });
    }
    let cells: Vec<(usize, usize)> = lambda.cells().collect();
    let mut filling = vec![vec![0usize; lambda.parts().first().copied().unwrap_or(0)]; lambda.rows()];
    let mut total = S::zero();
    fill_ssyt(&cells, 0, &mut filling, alpha.probs(), S::one(), &mut total);
    Ok(total)
}

fn fill_ssyt<S: Scalar>(
    cells: &[(usize, usize)],
    pos: usize,
    filling: &mut [Vec<usize>],
    alpha: &[S],
    weight: S,
    total: &mut S,
) {
    if pos == cells.len() {
        *total = total.clone() + weight;
        return;
    }
    let (i, j) = cells[pos];
    let lo_row = if j > 0 { filling[i][j - 1] } else { 0 };
    let lo_col = if i > 0 { filling[i - 1][j] + 1 } else { 0 };
    for v in lo_row.max(lo_col)..alpha.len() {
        filling[i][j] = v;
        fill_ssyt(cells, pos + 1, filling, alpha, weight.clone() * alpha[v].clone(), total);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn half_half() -> Spectrum<BigRational> {
        Spectrum::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0, 1]).is_err());
        assert_eq!(Partition::new(vec![3, 1, 0, 0]).unwrap(), p(&[3, 1]));
        assert_eq!(p(&[3, 1]).n(), 4);
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_partitions(1, 5).unwrap(), vec![p(&[1])]);
        assert_eq!(
            enumerate_partitions(4, 2).unwrap(),
            vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]
        );
        assert_eq!(enumerate_partitions(5, 5).unwrap().len(), 7);
        assert!(enumerate_partitions(0, 3).is_err());
        assert!(enumerate_partitions(3, 0).is_err());
    }

    #[test]
    fn enumeration_is_reverse_lexicographic_and_matches_counter() {
        for n in 1..=14 {
            for rows in 1..=6 {
                let list = enumerate_partitions(n, rows).unwrap();
                assert!(list.windows(2).all(|w| w[0] > w[1]));
                assert!(list.iter().all(|l| l.n() == n && l.rows() <= rows));
                assert_eq!(BigUint::from(list.len()), count_partitions(n, rows));
            }
        }
    }

    #[test]
    fn hook_length_examples() {
        assert_eq!(dim_symmetric_irrep(&p(&[6])), BigUint::one());
        assert_eq!(dim_symmetric_irrep(&Partition::column(6)), BigUint::one());
        assert_eq!(dim_symmetric_irrep(&p(&[2, 2, 1])), BigUint::from(5u32));
        assert_eq!(dim_symmetric_irrep(&p(&[3, 2])), BigUint::from(5u32));
    }

    #[test]
    fn schur_examples() {
        let a = half_half();
        assert_eq!(schur_eval(&p(&[1, 1]), &a), ratio(1, 4));
        assert_eq!(schur_eval(&p(&[2]), &a), ratio(3, 4));
        assert_eq!(schur_eval(&p(&[1, 1, 1]), &a), ratio(0, 1));
        assert_eq!(schur_eval_ssyt(&p(&[2]), &a, 1000).unwrap(), ratio(3, 4));
        let pure = Spectrum::new(vec![ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)]).unwrap();
        assert_eq!(schur_eval_ssyt(&p(&[2, 2, 1]), &pure, 1000).unwrap(), ratio(0, 1));
        let third = Spectrum::new(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        assert_eq!(schur_eval_ssyt(&p(&[1]), &third, 1000).unwrap(), ratio(1, 1));
    }

    #[test]
    fn complete_homogeneous_examples() {
        let a = half_half();
        assert_eq!(complete_homogeneous(0, &a), ratio(1, 1));
        assert_eq!(complete_homogeneous(1, &a), ratio(1, 1));
        assert_eq!(complete_homogeneous(2, &a), ratio(3, 4));
    }

    #[test]
    fn ssyt_cap_is_enforced() {
        let u = Spectrum::<f64>::uniform(6);
        let err = schur_eval_ssyt(&p(&[4, 4, 3]), &u, 10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn ssyt_count_matches_enumeration_at_ones() {
        // With every weight 1 the tableau sum is the tableau count.
        for lambda in enumerate_partitions(6, 3).unwrap() {
            let ones = Spectrum::<f64> { probs: vec![1.0; 3] };
            let direct = schur_eval_ssyt(&lambda, &ones, 1 << 20).unwrap();
            assert_eq!(direct as u64, count_ssyt(&lambda, 3).to_string().parse::<u64>().unwrap());
        }
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![0.5, 0.6]).is_err());
        assert!(Spectrum::new(vec![-0.5, 1.5]).is_err());
        assert!(Spectrum::<f64>::new(vec![]).is_err());
        assert!(Spectrum::new(vec![f64::NAN, 1.0]).is_err());
        let s = Spectrum::new(vec![ratio(1, 6), ratio(1, 2), ratio(1, 3)]).unwrap();
        assert_eq!(s.probs()[0], ratio(1, 2));
        assert_eq!(s.tail_mass(1), ratio(1, 2));
    }

    #[test]
    fn partition_json_is_a_plain_array() {
        let json = serde_json::to_string(&p(&[3, 1])).unwrap();
        assert_eq!(json, "[3,1]");
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p(&[3, 1]));
        assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
    }
}
