//! Replayable rewrite logs.

use alloc::vec::Vec;

use crate::diagram::{BowDiagram, NodeId, NodeKind};
use crate::error::Error;
use crate::hw;
use crate::Result;

/// One rewrite step. Arcs are given by their delimiting nodes and run along
/// the list order from `from` to `to`; `from == to` means the whole circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// Hanany-Witten transition of `left` and the node right after it.
    Hw { left: NodeId, right: NodeId },
    IncrementArrows { from: NodeId, to: NodeId, amount: i64 },
    IncrementX { from: NodeId, to: NodeId, amount: i64 },
    /// Lowers the arc from `from` (x_w) to `to` (x_1), i.e. every arrow-arc segment.
    SubtractArrowArc { from: NodeId, to: NodeId, amount: i64 },
    /// Cuts the segment right after `after`.
    CutAt { after: NodeId },
    /// Glues the cut back; inverse of `CutAt`.
    Uncut { after: NodeId },
}

impl Move {
    pub fn inverse(&self) -> Move {
        match *self {
            Move::Hw { left, right } => Move::Hw { left: right, right: left },
            Move::IncrementArrows { from, to, amount } => {
                Move::IncrementArrows { from, to, amount: -amount }
            }
            Move::IncrementX { from, to, amount } => Move::IncrementX { from, to, amount: -amount },
            Move::SubtractArrowArc { from, to, amount } => {
                Move::SubtractArrowArc { from, to, amount: -amount }
            }
            Move::CutAt { after } => Move::Uncut { after },
            Move::Uncut { after } => Move::CutAt { after },
        }
    }

    pub fn is_hw(&self) -> bool {
        matches!(self, Move::Hw { .. })
    }

    pub fn apply(&self, d: &BowDiagram) -> Result<BowDiagram> {
        match *self {
            Move::Hw { left, right } => hw::apply_hw(d, left, right),
            Move::IncrementArrows { from, to, amount } => {
                hw::raise_arc(d, from, to, amount, Some(NodeKind::Arrow))
            }
            Move::IncrementX { from, to, amount } => {
                hw::raise_arc(d, from, to, amount, Some(NodeKind::XPoint))
            }
            Move::SubtractArrowArc { from, to, amount } => {
                hw::raise_arc(d, from, to, -amount, Some(NodeKind::XPoint))
            }
            Move::CutAt { after } => {
                let p = d.pos_of(after)?;
                d.cut_at(d.seg_after(p))
            }
            Move::Uncut { after } => {
                let p = d.pos_of(after)?;
                if d.cut() != Some(d.seg_after(p)) {
                    return Err(Error::Precondition("uncut at a segment that is not the cut".into()));
                }
                Ok(d.uncut())
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MoveLog {
    pub entries: Vec<Move>,
}

impl MoveLog {
    pub fn new() -> Self {
        MoveLog { entries: Vec::new() }
    }

    pub fn push(&mut self, m: Move) {
        self.entries.push(m);
    }

    pub fn extend(&mut self, other: &MoveLog) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hw_count(&self) -> usize {
        self.entries.iter().filter(|m| m.is_hw()).count()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Move> {
        self.entries.iter()
    }

    pub fn replay(&self, d: &BowDiagram) -> Result<BowDiagram> {
        let mut cur = d.clone();
        for m in &self.entries {
            cur = m.apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn inverse(&self) -> MoveLog {
        MoveLog { entries: self.entries.iter().rev().map(Move::inverse).collect() }
    }
}

impl From<Vec<Move>> for MoveLog {
    fn from(entries: Vec<Move>) -> Self {
        MoveLog { entries }
    }
}

impl<'a> IntoIterator for &'a MoveLog {
    type Item = &'a Move;
    type IntoIter = core::slice::Iter<'a, Move>;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
