//! Schmidt decomposition of bipartite pure states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{domain, Error, Result};

/// Schmidt coefficients below this count as zero in rank queries.
pub const SCHMIDT_RANK_TOL: f64 = 1e-10;
/// Allowed deviation of `‖ψ‖` from 1.
pub const NORM_TOL: f64 = 1e-12;

/// A pure state on `C^{d_A} ⊗ C^{d_B}`, stored as its `d_A × d_B` amplitude matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    amplitudes: DMatrix<Complex64>,
}

impl BipartiteState {
    /// Rejects states whose norm is not 1; pass `normalize` to rescale instead.
    pub fn new(amplitudes: DMatrix<Complex64>, normalize: bool) -> Result<Self> {
        if amplitudes.is_empty() {
            return domain("empty amplitude matrix");
        }
        let norm = amplitudes.norm();
        if normalize {
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Degenerate("cannot normalise a zero state".into()));
            }
            return Ok(BipartiteState {
                amplitudes: amplitudes / Complex64::from(norm),
            });
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return domain(format!("state has norm {norm}, expected 1"));
        }
        Ok(BipartiteState { amplitudes })
    }

    /// `Σ_j c_j |j⟩|j⟩` padded to `d_A × d_B`.
    pub fn from_coefficients(coeffs: &[f64], d_a: usize, d_b: usize) -> Result<Self> {
        if coeffs.len() > d_a.min(d_b) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients do not fit in {d_a} x {d_b}",
                coeffs.len()
            )));
        }
        let mut m = DMatrix::zeros(d_a, d_b);
        for (j, &c) in coeffs.iter().enumerate() {
            m[(j, j)] = Complex64::from(c);
        }
        BipartiteState::new(m, false)
    }

    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amplitudes.shape()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &BipartiteState) -> Result<Complex64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("states have different shapes".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `(U ⊗ V)|ψ⟩`, i.e. `U M V^T`.
    pub fn apply_local(&self, u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<Self> {
        let (a, b) = self.dims();
        if u.shape() != (a, a) || v.shape() != (b, b) {
            return Err(Error::DimensionMismatch("local operators do not match the state".into()));
        }
        BipartiteState::new(u * &self.amplitudes * v.transpose(), true)
    }
}

/// `|ψ⟩ = Σ_j λ_j |u_j⟩|v_j⟩` with `λ` sorted non-increasingly.
#[derive(Clone, Debug)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    /// Column `j` is `u_j`.
    pub left_vectors: DMatrix<Complex64>,
    /// Column `j` is `v_j`.
    pub right_vectors: DMatrix<Complex64>,
}

impl SchmidtData {
    /// Number of coefficients above [`SCHMIDT_RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c > SCHMIDT_RANK_TOL).count()
    }

    /// Squared coefficients.
    pub fn spectrum(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }
}

/// Singular value decomposition with columns sorted by decreasing singular value.
pub(crate) fn sorted_svd(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let right = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    (values, left, right)
}

pub fn schmidt_decompose(state: &BipartiteState) -> Result<SchmidtData> {
    let norm = state.amplitudes.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return domain(format!("state has norm {norm}, expected 1"));
    }
    let (coefficients, left_vectors, right_vectors) = sorted_svd(&state.amplitudes);
    Ok(SchmidtData {
        coefficients,
        left_vectors,
        right_vectors,
    })
}

fn check_rank(r: usize) -> Result<()> {
    if r == 0 {
        return domain("Schmidt rank parameter r must be at least 1");
    }
    Ok(())
}

/// `Δ_r = Σ_{j>r} λ_j²`.
pub fn delta_r(state: &BipartiteState, r: usize) -> Result<f64> {
    check_rank(r)?;
    let data = schmidt_decompose(state)?;
    Ok(data.coefficients.iter().skip(r).map(|c| c * c).sum())
}

/// Trace distance to the closest state of Schmidt rank at most `r`.
pub fn distance_to_sr(state: &BipartiteState, r: usize) -> Result<f64> {
    Ok(delta_r(state, r)?.sqrt())
}

/// Top-`r` Schmidt truncation, renormalised.
pub fn best_rank_r_approx(state: &BipartiteState, r: usize) -> Result<BipartiteState> {
    check_rank(r)?;
    let data = schmidt_decompose(state)?;
    let keep = r.min(data.coefficients.len());
    let (a, b) = state.dims();
    let mut m = DMatrix::<Complex64>::zeros(a, b);
    for j in 0..keep {
        let u = data.left_vectors.column(j);
        let v = data.right_vectors.column(j);
        m += (u * v.transpose()) * Complex64::from(data.coefficients[j]);
    }
    BipartiteState::new(m, true)
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / Complex64::from(n)
}

/// Haar-random state on `C^{d_A} ⊗ C^{d_B}`.
pub fn random_state<R: Rng + ?Sized>(d_a: usize, d_b: usize, rng: &mut R) -> BipartiteState {
    let v = random_unit_vector(d_a * d_b, rng);
    let m = DMatrix::from_fn(d_a, d_b, |i, j| v[i * d_b + j]);
    BipartiteState::new(m, true).expect("random state is non-zero")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
        let x = r[(i, i)];
        if x.norm() > 0.0 { x / x.norm() } else { Complex64::from(1.0) }
    }));
    q * phases
}

/// Random state of Schmidt rank at most `r`.
pub fn random_sr_state<R: Rng + ?Sized>(d_a: usize, d_b: usize, r: usize, rng: &mut R) -> BipartiteState {
    let a = DMatrix::from_fn(d_a, r, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let b = DMatrix::from_fn(r, d_b, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    BipartiteState::new(a * b, true).expect("random product of Ginibre matrices is non-zero")
}
