use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{cut_matrix, cut_matrix_of, from_cut_matrix, TreeState};
use super::tree::Tree;
use crate::schmidt::sorted_svd;
use crate::{domain, Error, Result};

/// Slack allowed when comparing the certificate against the measured state.
pub const CERTIFICATE_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTail {
    /// `(child, parent)` with respect to the root.
    pub edge: (usize, usize),
    /// Height of the parent vertex.
    pub height: usize,
    /// `Σ_{j>r} λ_j²` of the input across this edge.
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub r: usize,
    /// Edges in the order the projections were applied.
    pub edges: Vec<EdgeTail>,
    pub tail_sum: f64,
    /// `1 - Σ tails`; meaningful only when `tail_sum ≤ 1`.
    pub overlap_bound: f64,
    pub bound_vacuous: bool,
    /// `|⟨approx|ψ⟩|` with `approx` normalised.
    pub measured_overlap: f64,
    /// `‖ψ - Γψ‖²` before normalisation.
    pub projection_error_sq: f64,
    /// `‖ψ - Γψ‖² ≤ Σ tails`.
    pub projection_bound_holds: bool,
    /// `measured_overlap ≥ overlap_bound`.
    pub overlap_bound_holds: bool,
}

/// Projects each subtree onto the top-`r` Schmidt vectors of the input for its
/// parent edge, from the deepest parents up to the root, and normalises.
///
/// All projectors are computed from the input state before any is applied.
pub fn faithful_ttns_approx(state: &TreeState, tree: &Tree, r: usize) -> Result<(TreeState, TruncationCertificate)> {
    state.check_tree(tree)?;
    if r == 0 {
        return domain("bond dimension r must be at least 1");
    }
    let mut order: Vec<(usize, (usize, usize))> = tree
        .edges()
        .iter()
        .map(|&e| {
            let (child, parent) = tree.orient(e).expect("stored edge");
            (tree.height(parent), (child, parent))
        })
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| sorted_pair(a.1).cmp(&sorted_pair(b.1))));

    let mut projectors: Vec<(Vec<usize>, DMatrix<Complex64>)> = Vec::with_capacity(order.len());
    let mut edges = Vec::with_capacity(order.len());
    for &(height, (child, parent)) in &order {
        let below = tree.subtree(child);
        let (values, left, _) = sorted_svd(&cut_matrix(state, &below));
        let keep = r.min(values.len());
        edges.push(EdgeTail {
            edge: (child, parent),
            height,
            tail: values.iter().skip(keep).map(|s| s * s).sum(),
        });
        projectors.push((below, left.columns(0, keep).into_owned()));
    }

    let mut amps = state.amplitudes().to_vec();
    for (below, u) in &projectors {
        let m = cut_matrix_of(state.site_dims(), &amps, below);
        let projected = u * (u.adjoint() * m);
        amps = from_cut_matrix(state.site_dims(), below, &projected);
    }

    let projection_error_sq: f64 = amps
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let approx = TreeState::normalized(state.site_dims().to_vec(), amps)
        .map_err(|_| Error::Degenerate("the truncation annihilated the state".into()))?;
    let measured_overlap = approx.inner(state)?.norm();
    let tail_sum: f64 = edges.iter().map(|e| e.tail).sum();
    let overlap_bound = 1.0 - tail_sum;
    let certificate = TruncationCertificate {
        r,
        edges,
        tail_sum,
        overlap_bound,
        bound_vacuous: tail_sum > 1.0,
        measured_overlap,
        projection_error_sq,
        projection_bound_holds: projection_error_sq <= tail_sum + CERTIFICATE_SLACK,
        overlap_bound_holds: measured_overlap >= overlap_bound - CERTIFICATE_SLACK,
    };
    Ok((approx, certificate))
}

fn sorted_pair((a, b): (usize, usize)) -> (usize, usize) {
    (a.min(b), a.max(b))
}
