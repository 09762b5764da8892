//! Hanany-Witten transitions and the rewrites built from them.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;

use crate::brane::Dir;
use crate::diagram::{BowDiagram, NodeId, NodeKind, SeparatedForm};
use crate::error::{self, Error};
use crate::moves::{Move, MoveLog};
use crate::Result;

/// A replayable path to a negative dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeWitness {
    pub move_log: MoveLog,
    /// Position of the segment in the diagram reached by `move_log`.
    pub segment: usize,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<T> {
    Done(T),
    Negative(NegativeWitness),
}

impl<T> Outcome<T> {
    pub fn done(self) -> Option<T> {
        match self {
            Outcome::Done(t) => Some(t),
            Outcome::Negative(_) => None,
        }
    }
}

pub(crate) enum Halt {
    Neg(NegativeWitness),
    Err(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Err(e)
    }
}

pub(crate) fn finish<T>(r: core::result::Result<T, Halt>) -> Result<Outcome<T>> {
    match r {
        Ok(t) => Ok(Outcome::Done(t)),
        Err(Halt::Neg(w)) => Ok(Outcome::Negative(w)),
        Err(Halt::Err(e)) => Err(e),
    }
}

pub(crate) fn unchecked<T>(r: core::result::Result<T, Halt>) -> Result<T> {
    match r {
        Ok(t) => Ok(t),
        Err(Halt::Err(e)) => Err(e),
        Err(Halt::Neg(_)) => unreachable!("unchecked rewriter never halts on negatives"),
    }
}

/// A diagram together with the log that produced it.
pub(crate) struct Rewriter {
    pub d: BowDiagram,
    pub log: MoveLog,
    pub checked: bool,
}

impl Rewriter {
    pub fn new(d: BowDiagram, checked: bool) -> Self {
        Rewriter { d, log: MoveLog::new(), checked }
    }

    pub fn hw(&mut self, left: NodeId, right: NodeId) -> core::result::Result<(), Halt> {
        self.d = apply_hw(&self.d, left, right)?;
        self.log.push(Move::Hw { left, right });
        if self.checked {
            // the middle segment now sits after `right`
            let seg = self.d.seg_after(self.d.pos_of(right)?);
            let value = self.d.dims()[seg];
            if value < 0 {
                return Err(Halt::Neg(NegativeWitness { move_log: self.log.clone(), segment: seg, value }));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, m: Move) -> core::result::Result<(), Halt> {
        if let Move::Hw { left, right } = m {
            return self.hw(left, right);
        }
        self.d = m.apply(&self.d)?;
        self.log.push(m);
        Ok(())
    }

    pub fn view(&self) -> Result<SeparatedForm> {
        self.d.separated_view().ok_or(Error::NotSeparated)
    }
}

/// Swaps `left` with the node right after it; the middle dimension becomes
/// `v⁻ + v⁺ + 1 − v`.
pub fn apply_hw(d: &BowDiagram, left: NodeId, right: NodeId) -> Result<BowDiagram> {
    let i = d.pos_of(left)?;
    let j = d.pos_of(right)?;
    let k = d.len();
    if k < 2 || d.next_pos(i) != j {
        return Err(Error::NotAdjacent(left, right));
    }
    if d.kind(i) == d.kind(j) {
        return Err(Error::SameKind(left, right));
    }
    if d.cut() == Some(i) {
        return Err(Error::CrossesCut(left, right));
    }
    let dims = d.dims();
    let (vm, v, vp) = (dims[d.seg_before(i)], dims[i], dims[j]);
    let nv = error::sub(error::add(error::add(vm, vp)?, 1)?, v)?;
    let mut out = d.clone();
    out.dims_mut()[i] = nv;
    out.swap_nodes(i, j);
    Ok(out)
}

/// Segment positions of the arc running along the list from `from` to `to`.
pub fn arc_segments(d: &BowDiagram, from: NodeId, to: NodeId) -> Result<Vec<usize>> {
    let p = d.pos_of(from)?;
    let q = d.pos_of(to)?;
    let k = d.len();
    let len = if p == q { k } else { (q + k - p) % k };
    Ok((0..len).map(|i| (p + i) % k).collect())
}

pub(crate) fn raise_arc(
    d: &BowDiagram,
    from: NodeId,
    to: NodeId,
    amount: i64,
    kind: Option<NodeKind>,
) -> Result<BowDiagram> {
    let (kf, kt) = (d.kind_of(from)?, d.kind_of(to)?);
    if kf != kt {
        return Err(Error::Precondition(format!(
            "arc delimiters {} and {} have different kinds",
            from.0, to.0
        )));
    }
    if let Some(k) = kind {
        if k != kf {
            return Err(Error::Precondition("arc delimiters have the wrong kind".into()));
        }
    }
    let segs = arc_segments(d, from, to)?;
    if amount != 0 {
        if let Some(c) = d.cut() {
            if segs.contains(&c) {
                return Err(Error::Precondition("arc contains the cut".into()));
            }
        }
    }
    let mut out = d.clone();
    for s in segs {
        out.dims_mut()[s] = error::add(out.dims()[s], amount)?;
    }
    Ok(out)
}

/// Applies an `IncrementArrows` or `IncrementX` entry with a nonnegative amount.
pub fn apply_increment(d: &BowDiagram, entry: &Move) -> Result<BowDiagram> {
    match entry {
        Move::IncrementArrows { amount, .. } | Move::IncrementX { amount, .. } => {
            if *amount < 0 {
                return Err(Error::Precondition("negative increment".into()));
            }
            entry.apply(d)
        }
        _ => Err(Error::Precondition("not an increment entry".into())),
    }
}

fn separate_impl(d: &BowDiagram, checked: bool) -> core::result::Result<(SeparatedForm, MoveLog), Halt> {
    if d.is_empty() {
        return Err(Error::Precondition("empty diagram".into()).into());
    }
    if !d.is_finite() {
        if let Some(v) = d.separated_view() {
            return Ok((v, MoveLog::new()));
        }
    }
    let mut rw = Rewriter::new(d.clone(), checked);
    loop {
        let k = rw.d.len();
        let hit = (0..k - 1)
            .find(|&i| rw.d.kind(i) == NodeKind::XPoint && rw.d.kind(i + 1) == NodeKind::Arrow);
        match hit {
            Some(i) => {
                let (l, r) = (rw.d.id(i), rw.d.id(i + 1));
                rw.hw(l, r)?;
            }
            None => break,
        }
    }
    let v = rw.view()?;
    Ok((v, rw.log))
}

/// Gathers the x-points into one run, stopping at the first negative dimension.
pub fn separate(d: &BowDiagram) -> Result<Outcome<(SeparatedForm, MoveLog)>> {
    finish(separate_impl(d, true))
}

/// Like [`separate`] but carries on through negative dimensions.
pub fn separate_unchecked(d: &BowDiagram) -> Result<(SeparatedForm, MoveLog)> {
    unchecked(separate_impl(d, false))
}

fn normalize_impl(s: &SeparatedForm, checked: bool) -> core::result::Result<(SeparatedForm, MoveLog), Halt> {
    if s.finite {
        return Err(Error::Precondition("gap normalization needs an affine diagram".into()).into());
    }
    let (n, w) = (s.n(), s.w());
    if n == 0 || w == 0 {
        return Ok((s.clone(), MoveLog::new()));
    }
    let mut rw = Rewriter::new(s.to_diagram(), checked);
    let mut view = s.clone();
    loop {
        let gap = view.gap();
        if gap >= 0 && gap < w as i64 {
            break;
        }
        if gap >= w as i64 {
            let e1 = view.arrows[0];
            for &x in &view.xs {
                rw.hw(e1, x)?;
            }
        } else {
            let en = view.arrows[n - 1];
            for &x in view.xs.iter().rev() {
                rw.hw(x, en)?;
            }
        }
        view = rw.view()?;
    }
    Ok((view, rw.log))
}

/// Brings the gap `v_0 − v_{−w}` into `[0, w)` by walking e_1 or e_n around
/// the x-points.
pub fn normalize_gap(s: &SeparatedForm) -> Result<Outcome<(SeparatedForm, MoveLog)>> {
    finish(normalize_impl(s, true))
}

pub fn normalize_gap_unchecked(s: &SeparatedForm) -> Result<(SeparatedForm, MoveLog)> {
    unchecked(normalize_impl(s, false))
}

/// Lexicographically least rotation of the `(kind, dim)` token stream.
/// Finite diagrams are anchored at the cut.
pub fn canonical_encoding(d: &BowDiagram) -> Vec<i64> {
    let k = d.len();
    let tok = |i: usize| -> [i64; 2] {
        [if d.kind(i) == NodeKind::Arrow { 0 } else { 1 }, d.dims()[i]]
    };
    let stream = |start: usize| -> Vec<i64> { (0..k).flat_map(|i| tok((start + i) % k)).collect() };
    let mut best = stream(0);
    if !d.is_finite() {
        for r in 1..k {
            let cand = stream(r);
            if cand < best {
                best = cand;
            }
        }
    }
    let mut out = Vec::with_capacity(best.len() + 1);
    out.push(if d.is_finite() { 1 } else { 0 });
    out.extend(best);
    out
}

/// Legal single moves out of `d`.
pub fn neighbours(d: &BowDiagram) -> Vec<(NodeId, NodeId)> {
    let k = d.len();
    if k < 2 {
        return Vec::new();
    }
    (0..k)
        .filter(|&i| d.cut() != Some(i))
        .filter(|&i| d.kind(i) != d.kind(d.next_pos(i)))
        .map(|i| (d.id(i), d.id(d.next_pos(i))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivClassSample {
    pub members: BTreeSet<Vec<i64>>,
    pub min_dim: Option<i64>,
}

/// Breadth-first search over HW moves up to `budget` moves from `d`.
pub fn enumerate_equivalent(d: &BowDiagram, budget: usize) -> Result<EquivClassSample> {
    let mut members = BTreeSet::new();
    let mut min_dim = d.min_dim();
    members.insert(canonical_encoding(d));
    let mut queue = VecDeque::new();
    queue.push_back((d.clone(), 0usize));
    while let Some((cur, depth)) = queue.pop_front() {
        if depth == budget {
            continue;
        }
        for (l, r) in neighbours(&cur) {
            let nd = apply_hw(&cur, l, r)?;
            if members.insert(canonical_encoding(&nd)) {
                min_dim = match (min_dim, nd.min_dim()) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                queue.push_back((nd, depth + 1));
            }
        }
    }
    Ok(EquivClassSample { members, min_dim })
}

/// The HW sequence whose last produced dimension is the (t, s, k) bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub log: MoveLog,
    pub diagram: BowDiagram,
    pub segment: usize,
    pub value: i64,
}

fn seg_v_arr(d: &BowDiagram, v: &SeparatedForm, j: usize) -> Result<usize> {
    if j == 0 {
        Ok(d.seg_before(d.pos_of(v.xs[0])?))
    } else {
        Ok(d.seg_before(d.pos_of(v.arrows[j - 1])?))
    }
}

fn seg_v_x(d: &BowDiagram, v: &SeparatedForm, k: usize) -> Result<usize> {
    if k == 0 {
        Ok(d.seg_before(d.pos_of(v.xs[0])?))
    } else {
        Ok(d.seg_after(d.pos_of(v.xs[k - 1])?))
    }
}

/// Realizes a supersymmetry bound by moving x-points through arrows:
/// clockwise moves run against the list order, anticlockwise along it.
pub fn realize_bound(s: &SeparatedForm, dir: Dir, t: u32, si: usize, ki: usize) -> Result<Realization> {
    let (n, w) = (s.n(), s.w());
    if n == 0 || w == 0 || t == 0 || si > n || ki > w {
        return Err(Error::Precondition("bound index out of range".into()));
    }
    let (mut t, mut si, mut ki) = (t, si, ki);
    while t > 1 && (si == 0 || ki == 0) {
        if si == 0 {
            si = n;
        } else {
            ki = w;
        }
        t -= 1;
    }
    let mut rw = Rewriter::new(s.to_diagram(), false);
    let seg = if si == 0 || ki == 0 {
        let d = &rw.d;
        match (dir, si, ki) {
            (Dir::Cw, 0, k) => seg_v_x(d, s, k)?,
            (Dir::Cw, s_, _) => seg_v_arr(d, s, s_)?,
            (Dir::Acw, 0, k) => seg_v_x(d, s, w - k)?,
            (Dir::Acw, s_, _) => seg_v_arr(d, s, n - s_)?,
        }
    } else {
        let r = match dir {
            Dir::Cw => {
                for _ in 1..t {
                    for &x in &s.xs {
                        for &e in &s.arrows {
                            rw.hw(e, x)?;
                        }
                    }
                }
                for &x in &s.xs[..ki] {
                    for &e in &s.arrows[..si] {
                        rw.hw(e, x)?;
                    }
                }
                rw.d.seg_after(rw.d.pos_of(s.xs[ki - 1])?)
            }
            Dir::Acw => {
                for _ in 1..t {
                    for &x in s.xs.iter().rev() {
                        for &e in s.arrows.iter().rev() {
                            rw.hw(x, e)?;
                        }
                    }
                }
                for &x in s.xs[w - ki..].iter().rev() {
                    for &e in s.arrows[n - si..].iter().rev() {
                        rw.hw(x, e)?;
                    }
                }
                rw.d.seg_before(rw.d.pos_of(s.xs[w - ki])?)
            }
        };
        r
    };
    let value = rw.d.dims()[seg];
    Ok(Realization { log: rw.log, diagram: rw.d, segment: seg, value })
}

impl From<Halt> for Error {
    fn from(h: Halt) -> Self {
        match h {
            Halt::Err(e) => e,
            Halt::Neg(_) => Error::Precondition("unexpected negative dimension".into()),
        }
    }
}
