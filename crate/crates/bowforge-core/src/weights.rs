//! Affine weights, generalized Young diagrams and the stratum condition.
//!
//! A weight is stored as its ε-coordinates `[λ_1, …, λ_w]` together with the
//! level and the pairing with `d`.

use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{BowDiagram, SeparatedForm};
use crate::error::Error;
use crate::hw::{self, Rewriter};
use crate::brane::greedy_f;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineWeight {
    pub values: Vec<i64>,
    pub level: i64,
    pub dpair: i64,
}

impl AffineWeight {
    pub fn charge(&self) -> i64 {
        self.values.iter().sum()
    }
}

/// Differences along the two arcs of a separated form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedTriple {
    /// `tλ_s = v_{s-1} − v_s`, length n.
    pub tl: Vec<i64>,
    /// `μ_i = v_{-(i-1)} − v_{-i}`, length w.
    pub mu: Vec<i64>,
    /// `v_n = v_{-w}`.
    pub v: i64,
}

pub fn separated_triple(s: &SeparatedForm) -> SeparatedTriple {
    SeparatedTriple {
        tl: s.v_arr.windows(2).map(|p| p[0] - p[1]).collect(),
        mu: s.v_x.windows(2).map(|p| p[0] - p[1]).collect(),
        v: s.v(s.n()),
    }
}

impl SeparatedTriple {
    /// Rebuilds the affine separated form with fresh ids.
    pub fn to_separated(&self) -> Result<SeparatedForm> {
        if self.tl.iter().sum::<i64>() != self.mu.iter().sum::<i64>() {
            return Err(Error::Invalid("tλ and μ have different charges".into()));
        }
        let mut v_arr = vec![self.v; self.tl.len() + 1];
        for s in (0..self.tl.len()).rev() {
            v_arr[s] = v_arr[s + 1] + self.tl[s];
        }
        let mut v_x = vec![self.v; self.mu.len() + 1];
        for i in (0..self.mu.len()).rev() {
            v_x[i] = v_x[i + 1] + self.mu[i];
        }
        SeparatedForm::from_dims(false, v_arr, v_x)
    }
}

/// `λ_1 ≥ … ≥ λ_w ≥ λ_1 − n`.
pub fn gyd_membership(values: &[i64], n: i64) -> bool {
    match (values.first(), values.last()) {
        (Some(&a), Some(&b)) => values.windows(2).all(|p| p[0] >= p[1]) && b >= a - n,
        _ => true,
    }
}

/// Transpose of `λ ∈ 𝒴` with `w = values.len()` rows and level bound `n`;
/// the result has `n` rows and level bound `w`.
///
/// Cell `(b, s)` of the Maya grid in block row `b` is grey for row `i` when
/// `n·b + s ≤ λ_i`. Reading the top grey block row gives `w·b + #grey`.
pub fn transpose_gyd(values: &[i64], n: i64) -> Result<Vec<i64>> {
    if !gyd_membership(values, n) {
        return Err(Error::Precondition("not a generalized Young diagram".into()));
    }
    if n < 0 {
        return Err(Error::Precondition("negative level bound".into()));
    }
    let w = values.len() as i64;
    if w == 0 {
        return Ok(vec![0; n as usize]);
    }
    let mut out = Vec::with_capacity(n as usize);
    for s in 1..=n {
        let b0 = (values[0] - s).div_euclid(n);
        let grey = values.iter().filter(|&&l| n * b0 + s <= l).count() as i64;
        out.push(w * b0 + grey);
    }
    Ok(out)
}

/// Dominance `λ ≥ μ`: equal level and charge, and
/// `Σ_{i≤j}(λ_i − μ_i) + ⟨λ − μ, d⟩ ≥ 0` for all `j`.
pub fn dominance_ge(l: &AffineWeight, m: &AffineWeight) -> Result<bool> {
    if l.values.len() != m.values.len() {
        return Err(Error::Precondition("weights of different lengths".into()));
    }
    if l.level != m.level || l.charge() != m.charge() {
        return Ok(false);
    }
    let dd = l.dpair - m.dpair;
    let mut acc = 0i64;
    for (a, b) in l.values.iter().zip(&m.values) {
        acc += a - b;
        if acc + dd < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Balanced {
    pub diagram: BowDiagram,
    pub lambda: AffineWeight,
    pub mu: AffineWeight,
}

/// The unique HW-equivalent balanced diagram, when `tλ ∈ 𝒴` with level
/// bound `w`.
pub fn balanced_form(s: &SeparatedForm) -> Result<Option<Balanced>> {
    if s.finite {
        return Err(Error::Precondition("balanced form needs an affine diagram".into()));
    }
    let tr = separated_triple(s);
    let (n, w) = (s.n(), s.w());
    if !gyd_membership(&tr.tl, w as i64) {
        return Ok(None);
    }
    let mut rw = Rewriter::new(s.to_diagram(), false);
    let mut left: Vec<i64> = tr.tl.clone();
    let guard = left.iter().map(|x| x.unsigned_abs()).sum::<u64>() + 1;
    let mut rounds = 0u64;
    while left.iter().any(|&x| x != 0) {
        let mut progress = false;
        for si in 0..n {
            let e = s.arrows[si];
            let p = rw.d.pos_of(e)?;
            if left[si] > 0 {
                let nx = rw.d.next_pos(p);
                if rw.d.kind(nx) == crate::NodeKind::XPoint {
                    let x = rw.d.id(nx);
                    rw.hw(e, x).map_err(Error::from)?;
                    left[si] -= 1;
                    progress = true;
                }
            } else if left[si] < 0 {
                let px = rw.d.prev_pos(p);
                if rw.d.kind(px) == crate::NodeKind::XPoint {
                    let x = rw.d.id(px);
                    rw.hw(x, e).map_err(Error::from)?;
                    left[si] += 1;
                    progress = true;
                }
            }
        }
        rounds += 1;
        if !progress || rounds > guard {
            return Err(Error::Invalid("balancing stalled".into()));
        }
    }
    let d = rw.d;
    for i in 0..d.len() {
        if d.kind(i) == crate::NodeKind::Arrow && d.dims()[d.seg_before(i)] != d.dims()[i] {
            return Err(Error::Invalid("balancing left an unbalanced arrow".into()));
        }
    }
    let vhat = if w == 0 { tr.v } else { d.dims()[d.seg_after(d.pos_of(s.xs[w - 1])?)] };
    if w > 0 && n > 0 && (w as i64) > tr.tl[0] && tr.tl[0] >= 0 {
        let fast = tr.v + tr.tl.iter().filter(|&&x| x < 0).sum::<i64>();
        if fast != vhat {
            return Err(Error::Invalid("closed-form balanced dimension disagrees with replay".into()));
        }
    }
    let lambda = AffineWeight { values: transpose_gyd(&tr.tl, w as i64)?, level: n as i64, dpair: vhat };
    let mu = AffineWeight { values: tr.mu, level: n as i64, dpair: 0 };
    Ok(Some(Balanced { diagram: d, lambda, mu }))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StratumMode {
    Finite,
    Affine,
}

/// Searches for the dominant weight κ of the stratum condition.
pub fn stratum_check(s: &SeparatedForm, mode: StratumMode) -> Result<Option<AffineWeight>> {
    match mode {
        StratumMode::Finite => finite_stratum(s),
        StratumMode::Affine => affine_stratum(s),
    }
}

/// κ built from the greedy fixed-brane counts, arrow by arrow.
pub fn greedy_finite_tkappa(s: &SeparatedForm) -> Vec<i64> {
    let mut va = s.v_arr.clone();
    let mut vx = s.v_x.clone();
    let mut out = Vec::with_capacity(s.n());
    for _ in 0..s.n() {
        let v0 = va[0];
        let f = greedy_f(&vx, v0);
        out.push(f as i64);
        let fi = f as i64;
        let jt = (0..=f).find(|&j| vx[j] == fi - j as i64).unwrap_or(f);
        let mut nva = vec![v0 - fi];
        nva.extend_from_slice(&va[2.min(va.len())..]);
        va = nva;
        vx = (0..=jt).map(|k| vx[k] - (fi - k as i64)).collect();
    }
    out
}

/// The three finite stratum conditions for a candidate `tκ`.
pub fn finite_kappa_ok(s: &SeparatedForm, tk: &[i64]) -> Result<Option<AffineWeight>> {
    let (n, w) = (s.n(), s.w());
    let v0 = s.v(0);
    if tk.len() != n || tk.windows(2).any(|p| p[0] < p[1]) || tk.iter().any(|&x| x < 0 || x > w as i64) {
        return Ok(None);
    }
    let kappa = transpose_gyd(tk, w as i64)?;
    if kappa.iter().any(|&x| x < 0) || kappa.first().is_some_and(|&k1| k1 > n as i64) {
        return Ok(None);
    }
    if kappa.iter().sum::<i64>() != v0 {
        return Ok(None);
    }
    let tr = separated_triple(s);
    let mut acc = 0;
    for (k, m) in kappa.iter().zip(&tr.mu) {
        acc += k - m;
        if acc < 0 {
            return Ok(None);
        }
    }
    let mut acc = 0;
    for d in 1..=n {
        acc += tk[d - 1];
        if acc < v0 - s.v(d) {
            return Ok(None);
        }
    }
    Ok(Some(AffineWeight { values: kappa, level: n as i64, dpair: 0 }))
}

/// Every `tκ` with `n` parts in `[0, w]`, weakly decreasing, summing to `total`.
pub fn finite_candidates(n: usize, w: i64, total: i64) -> Vec<Vec<i64>> {
    fn go(n: usize, hi: i64, total: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let slots = (n - cur.len()) as i64;
        for x in (0..=hi.min(total)).rev() {
            if x * slots < total {
                break;
            }
            cur.push(x);
            go(n, x, total - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if total >= 0 {
        go(n, w, total, &mut Vec::new(), &mut out);
    }
    out
}

fn finite_stratum(s: &SeparatedForm) -> Result<Option<AffineWeight>> {
    if !s.finite {
        return Err(Error::Precondition("finite stratum check needs a finite separated form".into()));
    }
    if let Some(k) = finite_kappa_ok(s, &greedy_finite_tkappa(s))? {
        return Ok(Some(k));
    }
    for tk in finite_candidates(s.n(), s.w() as i64, s.v(0)) {
        if let Some(k) = finite_kappa_ok(s, &tk)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// All `tκ` with `w − 1 ≥ tκ_1 ≥ … ≥ tκ_n ≥ tκ_1 − w` and `Σ tκ = total`,
/// in lexicographic order.
fn affine_candidates(n: usize, w: i64, total: i64) -> Vec<Vec<i64>> {
    fn go(n: usize, lo: i64, hi: i64, total: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let slots = (n - cur.len()) as i64;
        for x in lo..=hi {
            // remaining entries lie in [lo, x]
            if x * slots < total || lo * slots > total {
                continue;
            }
            cur.push(x);
            go(n, lo, x, total - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for first in 0..w {
        let mut cur = vec![first];
        go(n, first - w, first, total - first, &mut cur, &mut out);
    }
    out.sort();
    out
}

fn affine_stratum(s: &SeparatedForm) -> Result<Option<AffineWeight>> {
    if s.finite {
        return Err(Error::Precondition("affine stratum check needs an affine separated form".into()));
    }
    let (n, w) = (s.n(), s.w());
    let tr0 = separated_triple(s);
    if n == 0 || w == 0 {
        return Ok(Some(AffineWeight { values: tr0.mu, level: n as i64, dpair: 0 }));
    }
    let (norm, _) = hw::normalize_gap_unchecked(s)?;
    let tr = separated_triple(&norm);
    let gap = norm.gap();
    let mut best: Option<AffineWeight> = None;
    for tk in affine_candidates(n, w as i64, gap) {
        let kappa = transpose_gyd(&tk, w as i64)?;
        let negs: i64 = tk.iter().filter(|&&x| x < 0).sum();
        // κ ≥ μ with ⟨κ, d⟩ = v′ + negs
        let mut acc = 0i64;
        let mut need = i64::MIN;
        for (k, m) in kappa.iter().zip(&tr.mu) {
            acc += k - m;
            need = need.max(-acc);
        }
        let lo = need - negs;
        // subdiagram: v′ + Σ_{i>s} tκ_i ≤ v_s for s = 0..n
        let mut hi = i64::MAX;
        let mut suffix = 0i64;
        for si in (0..=n).rev() {
            hi = hi.min(norm.v(si) - suffix);
            if si > 0 {
                suffix += tk[si - 1];
            }
        }
        if lo <= hi {
            let cand = AffineWeight { values: kappa, level: n as i64, dpair: hi + negs };
            if best.as_ref().map_or(true, |b| cand.values < b.values) {
                best = Some(cand);
            }
        }
    }
    Ok(best)
}

/// Stratum condition of an arbitrary diagram: separate, then search for κ in
/// the mode matching its shape. Diagrams without arrows or without x-points
/// only need nonnegative dimensions.
pub fn stratum_for_diagram(d: &BowDiagram) -> Result<Option<AffineWeight>> {
    d.ensure_valid()?;
    if d.min_dim().is_some_and(|m| m < 0) {
        return Ok(None);
    }
    let (s, _) = hw::separate_unchecked(d)?;
    if s.n() == 0 || s.w() == 0 {
        let tr = separated_triple(&s);
        return Ok(Some(AffineWeight { values: tr.mu, level: s.n() as i64, dpair: 0 }));
    }
    let mode = if s.finite { StratumMode::Finite } else { StratumMode::Affine };
    stratum_check(&s, mode)
}
