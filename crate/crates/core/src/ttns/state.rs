use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{edge_bipartition, Tree};
use crate::partitions::Spectrum;
use crate::schmidt::{random_unit_vector, sorted_svd};
use crate::{domain, Error, Result};

/// Largest dense state handled, in amplitudes.
pub const AMPLITUDE_GUARD: usize = 1 << 20;
pub const STATE_NORM_TOL: f64 = 1e-12;

/// A dense pure state on `⊗_v C^{site_dims[v]}`, row-major with vertex 0 most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct TreeState {
    site_dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    site_dims: Vec<usize>,
    amplitudes_real: Vec<f64>,
    amplitudes_imag: Vec<f64>,
}

impl TryFrom<StateFile> for TreeState {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        if f.amplitudes_real.len() != f.amplitudes_imag.len() {
            return Err(Error::DimensionMismatch("real and imaginary parts differ in length".into()));
        }
        let amps = f
            .amplitudes_real
            .into_iter()
            .zip(f.amplitudes_imag)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        TreeState::new(f.site_dims, amps)
    }
}

impl From<TreeState> for StateFile {
    fn from(s: TreeState) -> Self {
        StateFile {
            amplitudes_real: s.amplitudes.iter().map(|c| c.re).collect(),
            amplitudes_imag: s.amplitudes.iter().map(|c| c.im).collect(),
            site_dims: s.site_dims,
        }
    }
}

/// Product of site dimensions, or a guard error.
pub fn total_dim(site_dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in site_dims {
        if d == 0 {
            return domain("site dimensions must be positive");
        }
        total = total.saturating_mul(d);
        if total > AMPLITUDE_GUARD {
            return Err(Error::CapExceeded {
                what: "dense state size",
                needed: format!("more than {AMPLITUDE_GUARD}"),
                limit: AMPLITUDE_GUARD.to_string(),
                hint: "use fewer sites or smaller local dimensions",
            });
        }
    }
    Ok(total)
}

impl TreeState {
    /// Checks shape, guard and unit norm.
    pub fn new(site_dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::unnormalized(site_dims, amplitudes)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return domain(format!("state has norm {norm}, expected 1"));
        }
        Ok(s)
    }

    /// Rescales to unit norm.
    pub fn normalized(site_dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::unnormalized(site_dims, amplitudes)?;
        let norm = s.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalise a zero state".into()));
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    fn unnormalized(site_dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if site_dims.is_empty() {
            return domain("a state needs at least one site");
        }
        let total = total_dim(&site_dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amplitudes.len()
            )));
        }
        Ok(TreeState { site_dims, amplitudes })
    }

    /// Haar-random state.
    pub fn random<R: Rng + ?Sized>(site_dims: Vec<usize>, rng: &mut R) -> Result<Self> {
        let total = total_dim(&site_dims)?;
        let v = random_unit_vector(total, rng);
        TreeState::normalized(site_dims, v.iter().copied().collect())
    }

    /// `|0⟩^{⊗n}`.
    pub fn product_zero(site_dims: Vec<usize>) -> Result<Self> {
        let total = total_dim(&site_dims)?;
        let mut amps = vec![Complex64::from(0.0); total];
        amps[0] = Complex64::from(1.0);
        TreeState::new(site_dims, amps)
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TreeState) -> Result<Complex64> {
        if self.site_dims != other.site_dims {
            return Err(Error::DimensionMismatch("states live on different spaces".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub(crate) fn check_tree(&self, tree: &Tree) -> Result<()> {
        if self.site_dims.len() != tree.n() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} sites but the tree has {} vertices",
                self.site_dims.len(),
                tree.n()
            )));
        }
        Ok(())
    }
}

/// Row and column strides for the reshaping that groups the `left` sites into rows.
fn cut_strides(site_dims: &[usize], left: &[usize]) -> (Vec<bool>, Vec<usize>, usize, usize) {
    let n = site_dims.len();
    let mut is_left = vec![false; n];
    for &v in left {
        is_left[v] = true;
    }
    let mut strides = vec![0; n];
    let (mut rows, mut cols) = (1, 1);
    for v in (0..n).rev() {
        if is_left[v] {
            strides[v] = rows;
            rows *= site_dims[v];
        } else {
            strides[v] = cols;
            cols *= site_dims[v];
        }
    }
    (is_left, strides, rows, cols)
}

fn for_each_cut_index(site_dims: &[usize], left: &[usize], mut f: impl FnMut(usize, usize, usize)) {
    let (is_left, strides, _, _) = cut_strides(site_dims, left);
    let total: usize = site_dims.iter().product();
    for idx in 0..total {
        let (mut rem, mut r, mut c) = (idx, 0, 0);
        for v in (0..site_dims.len()).rev() {
            let digit = rem % site_dims[v];
            rem /= site_dims[v];
            if is_left[v] {
                r += digit * strides[v];
            } else {
                c += digit * strides[v];
            }
        }
        f(idx, r, c);
    }
}

/// Amplitudes reshaped into a matrix whose rows index the `left` sites.
pub fn cut_matrix(state: &TreeState, left: &[usize]) -> DMatrix<Complex64> {
    cut_matrix_of(&state.site_dims, &state.amplitudes, left)
}

pub(crate) fn cut_matrix_of(site_dims: &[usize], amps: &[Complex64], left: &[usize]) -> DMatrix<Complex64> {
    let (_, _, rows, cols) = cut_strides(site_dims, left);
    let mut m = DMatrix::zeros(rows, cols);
    for_each_cut_index(site_dims, left, |idx, r, c| m[(r, c)] = amps[idx]);
    m
}

/// Inverse of [`cut_matrix`], without normalisation.
pub(crate) fn from_cut_matrix(site_dims: &[usize], left: &[usize], m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let total: usize = site_dims.iter().product();
    let mut amps = vec![Complex64::from(0.0); total];
    for_each_cut_index(site_dims, left, |idx, r, c| amps[idx] = m[(r, c)]);
    amps
}

/// Squared Schmidt coefficients across the cut of edge `e`.
pub fn edge_schmidt_spectrum(state: &TreeState, tree: &Tree, e: (usize, usize)) -> Result<Spectrum<f64>> {
    state.check_tree(tree)?;
    let (left, _) = edge_bipartition(tree, e)?;
    let (values, _, _) = sorted_svd(&cut_matrix(state, &left));
    Spectrum::new(values.iter().map(|s| s * s).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRank {
    pub edge: (usize, usize),
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtnsCheck {
    pub is_ttns: bool,
    pub r: usize,
    pub tolerance: f64,
    pub edges: Vec<EdgeRank>,
}

/// Whether every edge cut has at most `r` Schmidt coefficients above `tol`.
pub fn is_ttns(state: &TreeState, tree: &Tree, r: usize, tol: f64) -> Result<TtnsCheck> {
    state.check_tree(tree)?;
    let mut edges = Vec::with_capacity(tree.edges().len());
    for &e in tree.edges() {
        let (left, _) = edge_bipartition(tree, e)?;
        let values = cut_matrix(state, &left).singular_values();
        edges.push(EdgeRank {
            edge: e,
            rank: values.iter().filter(|&&s| s > tol).count(),
        });
    }
    Ok(TtnsCheck {
        is_ttns: edges.iter().all(|e| e.rank <= r),
        r,
        tolerance: tol,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schmidt::SCHMIDT_RANK_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cut_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = TreeState::random(vec![2, 3, 2, 3], &mut rng).unwrap();
        for left in [vec![0], vec![1, 3], vec![0, 2, 3]] {
            let m = cut_matrix(&s, &left);
            assert_eq!(from_cut_matrix(s.site_dims(), &left, &m), s.amplitudes());
        }
        let m = cut_matrix(&s, &[0, 1]);
        assert_eq!(m.shape(), (6, 6));
        assert_eq!(m[(1, 0)], s.amplitudes()[6]);
    }

    #[test]
    fn product_state_is_ttns() {
        let t = Tree::star(4).unwrap();
        let s = TreeState::product_zero(vec![3, 2, 2, 3]).unwrap();
        let check = is_ttns(&s, &t, 1, SCHMIDT_RANK_TOL).unwrap();
        assert!(check.is_ttns);
        let spec = edge_schmidt_spectrum(&s, &t, (0, 2)).unwrap();
        assert!((spec.probs()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relabelling_preserves_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Tree::path(3).unwrap();
        let s = TreeState::random(vec![2, 3, 2], &mut rng).unwrap();
        // Reverse the vertex order: 0 ↔ 2.
        let mut amps = vec![Complex64::from(0.0); 12];
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    amps[c * 6 + b * 2 + a] = s.amplitudes()[a * 6 + b * 2 + c];
                }
            }
        }
        let flipped = TreeState::new(vec![2, 3, 2], amps).unwrap();
        let x = edge_schmidt_spectrum(&s, &t, (0, 1)).unwrap();
        let y = edge_schmidt_spectrum(&flipped, &t, (1, 2)).unwrap();
        for (p, q) in x.probs().iter().zip(y.probs()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn json_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = TreeState::random(vec![2, 2, 3], &mut rng).unwrap();
        let text = s.to_json().unwrap();
        let back = TreeState::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert!(text.starts_with(r#"{"site_dims":[2,2,3],"amplitudes_real":["#));
    }

    #[test]
    fn guards_and_shape() {
        assert!(TreeState::product_zero(vec![2; 21]).is_err());
        assert!(TreeState::new(vec![2], vec![Complex64::from(1.0)]).is_err());
        assert!(TreeState::new(vec![2], vec![Complex64::from(1.0), Complex64::from(1.0)]).is_err());
        assert!(TreeState::normalized(vec![2], vec![Complex64::from(1.0), Complex64::from(1.0)]).is_ok());
    }
}
