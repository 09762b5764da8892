#![allow(dead_code)]

use bowforge_core::{BowDiagram, NodeKind};

pub fn kinds_from_mask(k: usize, mask: u32) -> Vec<NodeKind> {
    (0..k)
        .map(|i| if mask >> i & 1 == 1 { NodeKind::XPoint } else { NodeKind::Arrow })
        .collect()
}

fn dims_iter(len: usize, max_dim: i64) -> impl Iterator<Item = Vec<i64>> {
    let base = (max_dim + 1) as u64;
    let total = base.pow(len as u32);
    (0..total).map(move |mut c| {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push((c % base) as i64);
            c /= base;
        }
        v
    })
}

/// Every affine diagram with 1..=max_nodes nodes and dims in 0..=max_dim.
pub fn affine_sweep(max_nodes: usize, max_dim: i64) -> Vec<BowDiagram> {
    let mut out = Vec::new();
    for k in 1..=max_nodes {
        for mask in 0..(1u32 << k) {
            let kinds = kinds_from_mask(k, mask);
            for dims in dims_iter(k, max_dim) {
                out.push(BowDiagram::affine(&kinds, &dims).unwrap());
            }
        }
    }
    out
}

/// Every finite diagram with 1..=max_nodes nodes, interior dims in 0..=max_dim.
pub fn finite_sweep(max_nodes: usize, max_dim: i64) -> Vec<BowDiagram> {
    let mut out = Vec::new();
    for k in 1..=max_nodes {
        for mask in 0..(1u32 << k) {
            let kinds = kinds_from_mask(k, mask);
            for mut dims in dims_iter(k - 1, max_dim) {
                dims.push(0);
                out.push(BowDiagram::finite(&kinds, &dims).unwrap());
            }
        }
    }
    out
}

pub fn nw(d: &BowDiagram) -> usize {
    d.n_arrows() * d.n_xpoints()
}
