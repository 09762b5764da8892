use bowforge_core::NodeId;
use serde::{Deserialize, Serialize};

use super::{CMat, NodeData, Solution, Triangle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleStability {
    pub position: usize,
    pub node: u32,
    /// Frobenius norm of `B⁺A − AB⁻ + ab`.
    pub cond_a: f64,
    pub s1: bool,
    pub s2: bool,
    /// Dimension of the largest `B⁻`-invariant subspace of `Ker A ∩ Ker b`.
    pub s1_dim: usize,
    /// Dimension of the smallest `B⁺`-invariant subspace containing `Im A + Im a`.
    pub s2_dim: usize,
    pub v_minus: usize,
    pub v_plus: usize,
    /// Singular values at or below this count as zero.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub triangles: Vec<TriangleStability>,
    pub rank_tol: f64,
}

impl StabilityReport {
    pub fn stable(&self) -> bool {
        self.triangles.iter().all(|t| t.s1 && t.s2)
    }

    pub fn max_cond_a(&self) -> f64 {
        self.triangles.iter().map(|t| t.cond_a).fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the null space of `m`.
fn null_space(m: &CMat, thr: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // pad so the thin decomposition carries a full set of right vectors
    let rows = m.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let cols: Vec<_> = (0..n)
        .filter(|&i| svd.singular_values[i] <= thr)
        .map(|i| vt.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space of `m`.
fn col_space(m: &CMat, thr: f64) -> CMat {
    let r = m.nrows();
    if m.ncols() == 0 || r == 0 {
        return CMat::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(r, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

fn stack_rows(top: &CMat, bottom: &CMat) -> CMat {
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}

fn stack_cols(left: &CMat, right: &CMat) -> CMat {
    let mut out = CMat::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// Largest `B`-invariant subspace of the span of `q`: iterate
/// `K ← {v ∈ K : Bv ∈ K}` until the dimension stops dropping.
fn invariant_part(b: &CMat, mut q: CMat, thr: f64) -> usize {
    loop {
        let k = q.ncols();
        if k == 0 {
            return 0;
        }
        let bq = b * &q;
        let proj = &bq - &q * (q.adjoint() * &bq);
        let n = null_space(&proj, thr);
        if n.ncols() == k {
            return k;
        }
        q = col_space(&(&q * n), thr.min(0.5));
    }
}

/// Smallest `B`-invariant subspace containing the columns of `g`.
fn krylov_dim(b: &CMat, g: &CMat, thr: f64) -> usize {
    let mut q = col_space(g, thr);
    loop {
        let k = q.ncols();
        if k == b.nrows() {
            return k;
        }
        let next = col_space(&stack_cols(&q, &(b * &q)), thr.min(0.5));
        if next.ncols() == k {
            return k;
        }
        q = next;
    }
}

fn scale(t: &Triangle) -> f64 {
    [&t.a_map, &t.b_minus, &t.b_plus, &t.a, &t.b].iter().map(|m| m.norm()).fold(0.0, f64::max)
}

fn triangle_report(t: &Triangle, position: usize, node: NodeId, rank_tol: f64) -> TriangleStability {
    let (vm, vp) = (t.b_minus.nrows(), t.b_plus.nrows());
    let cond = &t.b_plus * &t.a_map - &t.a_map * &t.b_minus + &t.a * &t.b;
    let thr = rank_tol * scale(t);
    let kernel = null_space(&stack_rows(&t.a_map, &t.b), thr);
    let s1_dim = invariant_part(&t.b_minus, kernel, thr);
    let s2_dim = krylov_dim(&t.b_plus, &stack_cols(&t.a_map, &t.a), thr);
    TriangleStability {
        position,
        node: node.0,
        cond_a: cond.norm(),
        s1: s1_dim == 0,
        s2: s2_dim == vp,
        s1_dim,
        s2_dim,
        v_minus: vm,
        v_plus: vp,
        threshold: thr,
    }
}

/// Conditions (a), (S1), (S2) at every x-point. Rank decisions treat singular
/// values at or below `rank_tol` times the largest matrix norm of the
/// triangle as zero.
pub fn stability_check(m: &Solution, rank_tol: f64) -> StabilityReport {
    let triangles = m
        .data
        .iter()
        .enumerate()
        .filter_map(|(p, n)| match n {
            NodeData::X(t) => Some(triangle_report(t, p, m.diagram.id(p), rank_tol)),
            NodeData::Arrow(_) => None,
        })
        .collect();
    StabilityReport { triangles, rank_tol }
}
