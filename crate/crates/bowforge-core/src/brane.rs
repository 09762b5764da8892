//! D3-brane ledgers over bow diagrams.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{BowDiagram, NodeId, NodeKind, SeparatedForm};
use crate::error::Error;
use crate::hw::{apply_hw, arc_segments};
use crate::moves::Move;
use crate::susy::{check_finite_separated, decide_supersymmetry};
use crate::Result;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    /// Against the list order.
    Cw,
    /// Along the list order.
    Acw,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Cw => Dir::Acw,
            Dir::Acw => Dir::Cw,
        }
    }
}

/// `mult` copies of a brane from `start` to `end` travelling in `dir` after
/// `laps` full turns.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Brane {
    pub start: NodeId,
    pub end: NodeId,
    pub dir: Dir,
    pub laps: u32,
    pub mult: u32,
}

type Slot = (NodeId, NodeId, Dir, u32);

impl Brane {
    pub fn slot(&self) -> Slot {
        (self.start, self.end, self.dir, self.laps)
    }

    pub fn is_fixed(&self, host: &BowDiagram) -> Result<bool> {
        Ok(host.kind_of(self.start)? != host.kind_of(self.end)?)
    }

    /// Segments crossed once on top of the full laps.
    pub fn arc(&self, host: &BowDiagram) -> Result<Vec<usize>> {
        if self.start == self.end {
            host.pos_of(self.start)?;
            return Ok(Vec::new());
        }
        match self.dir {
            Dir::Acw => arc_segments(host, self.start, self.end),
            Dir::Cw => arc_segments(host, self.end, self.start),
        }
    }

    /// Coverage of a single copy.
    pub fn unit_coverage(&self, host: &BowDiagram) -> Result<Vec<i64>> {
        let mut out = vec![self.laps as i64; host.len()];
        for s in self.arc(host)? {
            out[s] += 1;
        }
        Ok(out)
    }

    fn canonical(mut self, host: &BowDiagram) -> Result<Brane> {
        if !self.is_fixed(host)? && self.dir == Dir::Acw {
            core::mem::swap(&mut self.start, &mut self.end);
            self.dir = Dir::Cw;
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraneLedger {
    pub branes: Vec<Brane>,
    pub host: BowDiagram,
}

impl BraneLedger {
    pub fn empty(host: BowDiagram) -> Self {
        BraneLedger { branes: Vec::new(), host }
    }

    pub fn add(&mut self, b: Brane) -> Result<()> {
        if b.mult > 0 {
            self.host.pos_of(b.start)?;
            self.host.pos_of(b.end)?;
            self.branes.push(b);
        }
        Ok(())
    }

    /// Merges equal slots, normalizes unfixed directions and sorts.
    pub fn normalize(&mut self) -> Result<()> {
        let mut acc: BTreeMap<Slot, u32> = BTreeMap::new();
        for b in &self.branes {
            let c = b.canonical(&self.host)?;
            *acc.entry(c.slot()).or_insert(0) += c.mult;
        }
        self.branes = acc
            .into_iter()
            .filter(|(_, m)| *m > 0)
            .map(|((start, end, dir, laps), mult)| Brane { start, end, dir, laps, mult })
            .collect();
        Ok(())
    }

    /// Removes `mult` copies of the slot of `b`.
    pub fn remove(&mut self, b: Brane) -> Result<()> {
        let want = b.canonical(&self.host)?;
        self.normalize()?;
        let i = self
            .branes
            .iter()
            .position(|x| x.slot() == want.slot())
            .ok_or_else(|| Error::Ledger(format!("no brane {:?} to remove", want.slot())))?;
        if self.branes[i].mult < want.mult {
            return Err(Error::Ledger("not enough copies to remove".into()));
        }
        self.branes[i].mult -= want.mult;
        if self.branes[i].mult == 0 {
            self.branes.remove(i);
        }
        Ok(())
    }

    pub fn coverage(&self) -> Result<Vec<i64>> {
        coverage_on(&self.branes, &self.host)
    }

    pub fn check_coverage(&self) -> Result<()> {
        if self.coverage()? != self.host.dims() {
            return Err(Error::Ledger("coverage differs from the host dimensions".into()));
        }
        Ok(())
    }

    pub fn brane_count(&self) -> u64 {
        self.branes.iter().map(|b| b.mult as u64).sum()
    }
}

pub fn coverage_on(branes: &[Brane], host: &BowDiagram) -> Result<Vec<i64>> {
    let mut out = vec![0i64; host.len()];
    for b in branes {
        for (o, c) in out.iter_mut().zip(b.unit_coverage(host)?) {
            *o += c * b.mult as i64;
        }
    }
    Ok(out)
}

pub fn coverage(l: &BraneLedger) -> Result<Vec<i64>> {
    l.coverage()
}

/// A `(NS5, D5, dir, laps)` slot holding two or more fixed branes, if any.
pub fn check_ledger_susy(l: &BraneLedger) -> Result<Option<(NodeId, NodeId, Dir, u32)>> {
    let mut acc: BTreeMap<Slot, u32> = BTreeMap::new();
    for b in &l.branes {
        if b.is_fixed(&l.host)? {
            *acc.entry(b.slot()).or_insert(0) += b.mult;
        }
    }
    Ok(acc.into_iter().find(|(_, m)| *m > 1).map(|(s, _)| s))
}

fn unfixed_arc(from: NodeId, to: NodeId, amount: u32) -> Brane {
    Brane { start: to, end: from, dir: Dir::Cw, laps: u32::from(from == to), mult: amount }
}

fn raise(l: &mut BraneLedger, from: NodeId, to: NodeId, amount: i64) -> Result<()> {
    let m = u32::try_from(amount.unsigned_abs()).map_err(|_| Error::Overflow)?;
    if amount > 0 {
        l.add(unfixed_arc(from, to, m))
    } else if amount < 0 {
        l.remove(unfixed_arc(from, to, m))
    } else {
        Ok(())
    }
}

/// Transports a ledger along one log entry (or its inverse).
pub fn ledger_apply_move(l: &BraneLedger, entry: &Move, inverse: bool) -> Result<BraneLedger> {
    let m = if inverse { entry.inverse() } else { entry.clone() };
    let mut out = l.clone();
    match m {
        Move::Hw { left, right } => {
            let host = apply_hw(&l.host, left, right)?;
            let i = l.host.pos_of(left)?;
            let j = l.host.next_pos(i);
            let mut branes = Vec::with_capacity(l.branes.len() + 1);
            let mut annihilated = false;
            for b in &l.branes {
                let pair = (b.start == left && b.end == right) || (b.start == right && b.end == left);
                if !pair {
                    branes.push(*b);
                    continue;
                }
                // segment j sits outside the pair both before and after the swap
                let old = b.unit_coverage(&l.host)?[j];
                let new = b.unit_coverage(&host)?[j];
                let laps = b.laps as i64 + old - new;
                if laps >= 0 {
                    branes.push(Brane { laps: laps as u32, ..*b });
                } else if laps == -1 && b.mult == 1 && !annihilated {
                    annihilated = true;
                } else {
                    return Err(Error::Ledger("brane cannot follow the transition".into()));
                }
            }
            if !annihilated {
                let (start, end, dir) = if host.kind_of(right)? == NodeKind::Arrow {
                    (right, left, Dir::Acw)
                } else {
                    (left, right, Dir::Cw)
                };
                branes.push(Brane { start, end, dir, laps: 0, mult: 1 });
            }
            out = BraneLedger { branes, host };
        }
        Move::IncrementArrows { from, to, amount } | Move::IncrementX { from, to, amount } => {
            out.host = m.apply(&l.host)?;
            raise(&mut out, from, to, amount)?;
        }
        Move::SubtractArrowArc { from, to, amount } => {
            out.host = m.apply(&l.host)?;
            raise(&mut out, from, to, -amount)?;
        }
        Move::CutAt { .. } | Move::Uncut { .. } => {
            out.host = m.apply(&l.host)?;
        }
    }
    out.normalize()?;
    out.check_coverage()?;
    Ok(out)
}

/// Splits a nonnegative profile into interval branes. `nodes[i]` and
/// `nodes[i + 1]` delimit the segment carrying `q[i]`, in list order.
fn intervals(l: &mut BraneLedger, nodes: &[NodeId], q: &[i64]) -> Result<()> {
    if q.is_empty() {
        return Ok(());
    }
    if nodes.len() != q.len() + 1 {
        return Err(Error::Ledger("interval profile mismatch".into()));
    }
    if let Some(&neg) = q.iter().find(|v| **v < 0) {
        return Err(Error::Ledger(format!("negative residual profile value {neg}")));
    }
    let mut q = q.to_vec();
    let mut stack = vec![(0usize, q.len())];
    while let Some((lo, hi)) = stack.pop() {
        if lo >= hi {
            continue;
        }
        let m = q[lo..hi].iter().copied().min().unwrap_or(0);
        if m > 0 {
            let mult = u32::try_from(m).map_err(|_| Error::Overflow)?;
            l.add(unfixed_arc(nodes[lo], nodes[hi], mult))?;
            for v in &mut q[lo..hi] {
                *v -= m;
            }
        }
        let mut a = lo;
        for i in lo..=hi {
            if i == hi || q[i] == 0 {
                if a < i {
                    stack.push((a, i));
                }
                a = i + 1;
            }
        }
    }
    Ok(())
}

/// Greedy supersymmetric ledger on a finite separated diagram: each arrow in
/// turn takes as many fixed branes as the x-profile allows.
pub fn synthesize_finite(s: &SeparatedForm) -> Result<BraneLedger> {
    let (ok, _) = check_finite_separated(s)?;
    if !ok {
        return Err(Error::NotSupersymmetric);
    }
    let host = s.to_diagram();
    let mut l = BraneLedger::empty(host);
    let mut arrows = s.arrows.clone();
    let mut xs = s.xs.clone();
    let mut va = s.v_arr.clone();
    let mut vx = s.v_x.clone();
    loop {
        let v0 = va[0];
        if v0 == 0 {
            let an: Vec<NodeId> = arrows.iter().rev().copied().collect();
            let aq: Vec<i64> = va[1..arrows.len().max(1)].iter().rev().copied().collect();
            intervals(&mut l, &an, &aq)?;
            if !xs.is_empty() {
                intervals(&mut l, &xs, &vx[1..xs.len()])?;
            }
            break;
        }
        if arrows.is_empty() || v0 < 0 {
            return Err(Error::Ledger("arrow profile exhausted".into()));
        }
        let f = greedy_f(&vx, v0);
        for &x in &xs[..f] {
            l.add(Brane { start: arrows[0], end: x, dir: Dir::Acw, laps: 0, mult: 1 })?;
        }
        let fi = f as i64;
        let u = va[1] - (v0 - fi);
        if u < 0 || (arrows.len() == 1 && u != 0) {
            return Err(Error::Ledger("unfixed arrow count negative".into()));
        }
        if u > 0 {
            let mult = u32::try_from(u).map_err(|_| Error::Overflow)?;
            l.add(Brane { start: arrows[0], end: arrows[1], dir: Dir::Cw, laps: 0, mult })?;
        }
        let jt = (0..=f)
            .find(|&j| vx[j] == fi - j as i64)
            .ok_or_else(|| Error::Ledger("no truncation index".into()))?;
        let big_j = xs.len();
        let tail: Vec<i64> = (jt + 1..big_j).map(|k| vx[k] - (fi - k as i64).max(0)).collect();
        if jt < big_j {
            intervals(&mut l, &xs[jt..big_j], &tail)?;
        }
        arrows.remove(0);
        xs.truncate(jt);
        let mut nva = vec![v0 - fi];
        nva.extend_from_slice(&va[2.min(va.len())..]);
        va = nva;
        vx = (0..=jt).map(|k| vx[k] - (fi - k as i64)).collect();
    }
    l.normalize()?;
    l.check_coverage()?;
    if check_ledger_susy(&l)?.is_some() {
        return Err(Error::Ledger("greedy synthesis duplicated a fixed slot".into()));
    }
    Ok(l)
}

/// Largest `f ≤ min(J, v_0)` with `v_{-j} ≥ f − j` for every `j ≤ f`.
pub(crate) fn greedy_f(vx: &[i64], v0: i64) -> usize {
    let big_j = vx.len() - 1;
    let cap = big_j.min(usize::try_from(v0.max(0)).unwrap_or(usize::MAX));
    (0..=cap)
        .rev()
        .find(|&f| (1..=f).all(|j| vx[j] >= f as i64 - j as i64))
        .unwrap_or(0)
}

fn trivial_ledger(d: &BowDiagram) -> Result<BraneLedger> {
    let mut l = BraneLedger::empty(d.clone());
    let k = d.len();
    if k == 0 {
        return Ok(l);
    }
    let mn = d.min_dim().unwrap_or(0);
    if mn < 0 {
        return Err(Error::NotSupersymmetric);
    }
    let z = d.dims().iter().position(|&v| v == mn).unwrap_or(0);
    let first = d.id((z + 1) % k);
    if mn > 0 {
        let mult = u32::try_from(mn).map_err(|_| Error::Overflow)?;
        l.add(Brane { start: first, end: first, dir: Dir::Cw, laps: 1, mult })?;
    }
    let nodes: Vec<NodeId> = (1..=k).map(|i| d.id((z + i) % k)).collect();
    let q: Vec<i64> = (1..k).map(|i| d.dims()[(z + i) % k] - mn).collect();
    intervals(&mut l, &nodes, &q)?;
    l.normalize()?;
    l.check_coverage()?;
    Ok(l)
}

/// Moves a ledger onto `target`, which must list the same nodes and dims in
/// the same cyclic order.
fn rehost(mut l: BraneLedger, target: &BowDiagram) -> Result<BraneLedger> {
    let k = target.len();
    let same = k == l.host.len()
        && (0..k).all(|i| {
            l.host.position(target.id(i)).is_some_and(|p| {
                l.host.id(l.host.next_pos(p)) == target.id((i + 1) % k)
                    && l.host.dims()[p] == target.dims()[i]
            })
        });
    if !same {
        return Err(Error::Ledger("lifted host differs from the source diagram".into()));
    }
    l.host = target.clone();
    l.check_coverage()?;
    Ok(l)
}

/// A supersymmetric ledger whose coverage is exactly `d`'s dimensions.
pub fn synthesize(d: &BowDiagram) -> Result<BraneLedger> {
    let cert = decide_supersymmetry(d)?;
    if !cert.verdict {
        return Err(Error::NotSupersymmetric);
    }
    if d.n_arrows() == 0 || d.n_xpoints() == 0 {
        return trivial_ledger(d);
    }
    let fin = cert.pipeline.replay(d)?;
    let view = fin.separated_view().ok_or(Error::NotSeparated)?;
    let mut l = synthesize_finite(&view)?;
    for m in cert.pipeline.iter().rev() {
        l = ledger_apply_move(&l, m, true)?;
    }
    let l = rehost(l, d)?;
    if let Some(slot) = check_ledger_susy(&l)? {
        return Err(Error::Ledger(format!("lifted ledger duplicates slot {slot:?}")));
    }
    Ok(l)
}
