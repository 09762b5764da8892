//! Bow diagrams, their text form, and the separated view.
//!
//! Nodes are listed in the orientation of the circle. Segment `i` sits
//! between node `i` and node `i + 1` (cyclically). A finite diagram is an
//! affine one whose last segment is the cut: it must have dimension 0 and no
//! move may swap the two nodes around it.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::Result;

/// The two kinds of 5-brane.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    /// NS5-brane, drawn `o`.
    Arrow,
    /// D5-brane, drawn `x`.
    XPoint,
}

impl NodeKind {
    pub fn flip(self) -> NodeKind {
        match self {
            NodeKind::Arrow => NodeKind::XPoint,
            NodeKind::XPoint => NodeKind::Arrow,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            NodeKind::Arrow => 'o',
            NodeKind::XPoint => 'x',
        }
    }
}

/// Stable node identity. Ids survive every rewrite.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Affine,
    /// The last segment is the cut.
    Finite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BowDiagram {
    nodes: Vec<Node>,
    dims: Vec<i64>,
    shape: Shape,
}

impl BowDiagram {
    /// Builds a diagram with ids `0..len` in list order.
    pub fn new(shape: Shape, kinds: &[NodeKind], dims: &[i64]) -> Result<Self> {
        let nodes = kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| Node { id: NodeId(i as u32), kind })
            .collect();
        Self::from_nodes(shape, nodes, dims.to_vec())
    }

    pub fn affine(kinds: &[NodeKind], dims: &[i64]) -> Result<Self> {
        Self::new(Shape::Affine, kinds, dims)
    }

    /// `dims` includes the cut as its last entry.
    pub fn finite(kinds: &[NodeKind], dims: &[i64]) -> Result<Self> {
        Self::new(Shape::Finite, kinds, dims)
    }

    /// Only the counts and id distinctness are enforced here; see [`validate`](Self::validate).
    pub fn from_nodes(shape: Shape, nodes: Vec<Node>, dims: Vec<i64>) -> Result<Self> {
        if nodes.len() != dims.len() {
            return Err(Error::Invalid(format!(
                "{} nodes but {} segment dimensions",
                nodes.len(),
                dims.len()
            )));
        }
        let mut ids: Vec<u32> = nodes.iter().map(|n| n.id.0).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate node id".into()));
        }
        Ok(BowDiagram { nodes, dims, shape })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dims(&self) -> &[i64] {
        &self.dims
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_finite(&self) -> bool {
        self.shape == Shape::Finite
    }

    pub fn node(&self, pos: usize) -> Node {
        self.nodes[pos]
    }

    pub fn kind(&self, pos: usize) -> NodeKind {
        self.nodes[pos].kind
    }

    pub fn id(&self, pos: usize) -> NodeId {
        self.nodes[pos].id
    }

    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn pos_of(&self, id: NodeId) -> Result<usize> {
        self.position(id).ok_or(Error::UnknownNode(id))
    }

    pub fn kind_of(&self, id: NodeId) -> Result<NodeKind> {
        Ok(self.nodes[self.pos_of(id)?].kind)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn n_arrows(&self) -> usize {
        self.count(NodeKind::Arrow)
    }

    pub fn n_xpoints(&self) -> usize {
        self.count(NodeKind::XPoint)
    }

    /// The cut segment of a finite diagram.
    pub fn cut(&self) -> Option<usize> {
        match self.shape {
            Shape::Finite if !self.nodes.is_empty() => Some(self.nodes.len() - 1),
            _ => None,
        }
    }

    /// Segment just before node `pos`.
    pub fn seg_before(&self, pos: usize) -> usize {
        (pos + self.len() - 1) % self.len()
    }

    /// Segment just after node `pos`.
    pub fn seg_after(&self, pos: usize) -> usize {
        pos
    }

    pub fn next_pos(&self, pos: usize) -> usize {
        (pos + 1) % self.len()
    }

    pub fn prev_pos(&self, pos: usize) -> usize {
        (pos + self.len() - 1) % self.len()
    }

    pub fn min_dim(&self) -> Option<i64> {
        self.dims.iter().copied().min()
    }

    pub fn fresh_id(&self) -> NodeId {
        NodeId(self.nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0))
    }

    pub(crate) fn dims_mut(&mut self) -> &mut Vec<i64> {
        &mut self.dims
    }

    pub(crate) fn swap_nodes(&mut self, i: usize, j: usize) {
        self.nodes.swap(i, j);
    }

    pub fn with_dims(&self, dims: Vec<i64>) -> Result<Self> {
        Self::from_nodes(self.shape, self.nodes.clone(), dims)
    }

    /// Same kinds, dims and shape, ignoring ids.
    pub fn same_structure(&self, other: &BowDiagram) -> bool {
        self.shape == other.shape
            && self.dims == other.dims
            && self.nodes.iter().map(|n| n.kind).eq(other.nodes.iter().map(|n| n.kind))
    }

    /// Every violated invariant, in a human readable form. Negative
    /// dimensions are legal data and are not reported.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.nodes.len() != self.dims.len() {
            out.push("segment count differs from node count".to_string());
        }
        let mut ids: Vec<u32> = self.nodes.iter().map(|n| n.id.0).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            out.push("node ids are not distinct".to_string());
        }
        if let Some(c) = self.cut() {
            if self.dims.get(c).copied().unwrap_or(0) != 0 {
                out.push("cut segment nonzero".to_string());
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v.join("; ")))
        }
    }

    /// Swaps the kind of every node; dims and ids are kept.
    pub fn s_dual(&self) -> BowDiagram {
        BowDiagram {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node { id: n.id, kind: n.kind.flip() })
                .collect(),
            dims: self.dims.clone(),
            shape: self.shape,
        }
    }

    /// Turns an affine diagram into a finite one cut at `seg`, rotating the
    /// node list so that the cut becomes the last segment.
    pub fn cut_at(&self, seg: usize) -> Result<BowDiagram> {
        if self.shape != Shape::Affine {
            return Err(Error::Precondition("diagram is already finite".into()));
        }
        if seg >= self.len() {
            return Err(Error::Precondition(format!("segment {seg} out of range")));
        }
        if self.dims[seg] != 0 {
            return Err(Error::Precondition(format!("segment {seg} is not zero")));
        }
        let k = self.len();
        let start = (seg + 1) % k;
        let nodes = (0..k).map(|i| self.nodes[(start + i) % k]).collect();
        let dims = (0..k).map(|i| self.dims[(start + i) % k]).collect();
        Ok(BowDiagram { nodes, dims, shape: Shape::Finite })
    }

    /// Forgets the cut.
    pub fn uncut(&self) -> BowDiagram {
        BowDiagram { nodes: self.nodes.clone(), dims: self.dims.clone(), shape: Shape::Affine }
    }

    pub fn parse(text: &str) -> Result<BowDiagram> {
        parse(text)
    }

    pub fn separated_view(&self) -> Option<SeparatedForm> {
        separated_view(self)
    }
}

impl fmt::Display for BowDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.len();
        match self.shape {
            Shape::Affine => {
                f.write_str("(")?;
                for i in 0..k {
                    write!(f, " {} {}", self.dims[(i + k - 1) % k], self.nodes[i].kind.symbol())?;
                }
                f.write_str(" )")
            }
            Shape::Finite => {
                if k == 0 {
                    return f.write_str("[ 0 ]");
                }
                let c = self.dims[k - 1];
                write!(f, "[ {c}")?;
                for i in 0..k {
                    write!(f, " {}", self.nodes[i].kind.symbol())?;
                    let d = if i + 1 == k { c } else { self.dims[i] };
                    write!(f, " {d}")?;
                }
                f.write_str(" ]")
            }
        }
    }
}

enum Tok<'a> {
    Open(char),
    Close(char),
    Word(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        let bracket = matches!(c, '(' | ')' | '[' | ']');
        if c.is_whitespace() || bracket {
            if let Some(s) = start.take() {
                out.push((s, Tok::Word(&text[s..i])));
            }
            if bracket {
                out.push((i, if matches!(c, '(' | '[') { Tok::Open(c) } else { Tok::Close(c) }));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Tok::Word(&text[s..])));
    }
    out
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

fn parse(text: &str) -> Result<BowDiagram> {
    let toks = tokenize(text);
    let open = match toks.first() {
        Some((_, Tok::Open(c))) => *c,
        Some((p, _)) => return Err(syntax(*p, "expected '(' or '['")),
        None => return Err(syntax(0, "empty input")),
    };
    let close = if open == '(' { ')' } else { ']' };
    let (close_idx, close_pos) = match toks.iter().enumerate().skip(1).find(|(_, t)| !matches!(t.1, Tok::Word(_))) {
        Some((i, (p, Tok::Close(c)))) if *c == close => (i, *p),
        Some((_, (p, _))) => return Err(syntax(*p, format!("expected '{close}'"))),
        None => return Err(syntax(text.len(), format!("missing '{close}'"))),
    };
    if let Some((p, _)) = toks.get(close_idx + 1) {
        return Err(syntax(*p, "trailing input"));
    }
    let mut dims = Vec::new();
    let mut kinds = Vec::new();
    for (j, (p, t)) in toks[1..close_idx].iter().enumerate() {
        let Tok::Word(w) = t else { unreachable!() };
        if j % 2 == 0 {
            let d: i64 = w.parse().map_err(|_| syntax(*p, format!("expected an integer, got '{w}'")))?;
            dims.push(d);
        } else {
            let k = match *w {
                "o" | "O" => NodeKind::Arrow,
                "x" | "X" => NodeKind::XPoint,
                _ => return Err(syntax(*p, format!("expected 'o' or 'x', got '{w}'"))),
            };
            kinds.push(k);
        }
    }
    if open == '(' {
        if dims.len() != kinds.len() {
            return Err(syntax(close_pos, "affine diagram must end with a node"));
        }
        let k = kinds.len();
        let mut d = Vec::with_capacity(k);
        for i in 0..k {
            d.push(dims[(i + 1) % k]);
        }
        BowDiagram::affine(&kinds, &d)
    } else {
        if dims.len() != kinds.len() + 1 {
            return Err(syntax(close_pos, "finite diagram must start and end with a dimension"));
        }
        let k = kinds.len();
        let (left, right) = (dims[0], dims[k]);
        if k == 0 {
            if left == 0 {
                return BowDiagram::finite(&[], &[]);
            }
            return BowDiagram::finite(&[NodeKind::Arrow, NodeKind::Arrow], &[left, 0]);
        }
        let mut ks = Vec::with_capacity(k + 2);
        let mut ds = Vec::with_capacity(k + 2);
        if left != 0 {
            ks.push(NodeKind::Arrow);
            ds.push(left);
        }
        for i in 0..k {
            ks.push(kinds[i]);
            if i + 1 < k {
                ds.push(dims[i + 1]);
            }
        }
        if right != 0 {
            ds.push(right);
            ks.push(NodeKind::Arrow);
        }
        ds.push(0);
        BowDiagram::finite(&ks, &ds)
    }
}

/// Canonical labelling of a diagram whose x-points form one cyclic run.
///
/// Orientation order: `v_0, x_1, v_{-1}, …, x_w, v_{-w} = v_n, e_n, v_{n-1}, …, e_1`.
/// The node list of [`to_diagram`](Self::to_diagram) therefore reads
/// `e_n … e_1 x_1 … x_w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedForm {
    pub finite: bool,
    /// `v_0, v_1, …, v_n`.
    pub v_arr: Vec<i64>,
    /// `v_0, v_{-1}, …, v_{-w}`.
    pub v_x: Vec<i64>,
    /// `e_1, …, e_n`.
    pub arrows: Vec<NodeId>,
    /// `x_1, …, x_w`.
    pub xs: Vec<NodeId>,
}

impl SeparatedForm {
    /// Fresh ids: arrows get `0..n` (e_1 = 0), x-points `n..n+w`.
    pub fn from_dims(finite: bool, v_arr: Vec<i64>, v_x: Vec<i64>) -> Result<Self> {
        let n = v_arr.len().checked_sub(1).ok_or_else(|| Error::Invalid("empty arrow arc".into()))?;
        let w = v_x.len().checked_sub(1).ok_or_else(|| Error::Invalid("empty x arc".into()))?;
        let s = SeparatedForm {
            finite,
            arrows: (0..n as u32).map(NodeId).collect(),
            xs: (n as u32..(n + w) as u32).map(NodeId).collect(),
            v_arr,
            v_x,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        let (n, w) = (self.n(), self.w());
        if self.arrows.len() != n || self.xs.len() != w {
            return Err(Error::Invalid("label count mismatch".into()));
        }
        if self.v_arr[0] != self.v_x[0] || self.v_arr[n] != self.v_x[w] {
            return Err(Error::Invalid("shared entries v_0 / v_n = v_-w disagree".into()));
        }
        if self.finite && self.v_arr[n] != 0 {
            return Err(Error::Invalid("finite separated form needs v_n = 0".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.v_arr.len() - 1
    }

    pub fn w(&self) -> usize {
        self.v_x.len() - 1
    }

    /// `v_s` on the arrow arc.
    pub fn v(&self, s: usize) -> i64 {
        self.v_arr[s]
    }

    /// `v_{-k}` on the x arc.
    pub fn vx(&self, k: usize) -> i64 {
        self.v_x[k]
    }

    /// `v_0 - v_{-w}`.
    pub fn gap(&self) -> i64 {
        self.v_arr[0] - self.v_x[self.w()]
    }

    pub fn to_diagram(&self) -> BowDiagram {
        let (n, w) = (self.n(), self.w());
        let mut nodes = Vec::with_capacity(n + w);
        let mut dims = Vec::with_capacity(n + w);
        for s in (1..=n).rev() {
            nodes.push(Node { id: self.arrows[s - 1], kind: NodeKind::Arrow });
            dims.push(self.v_arr[s - 1]);
        }
        for k in 1..=w {
            nodes.push(Node { id: self.xs[k - 1], kind: NodeKind::XPoint });
            dims.push(self.v_x[k]);
        }
        let shape = if self.finite { Shape::Finite } else { Shape::Affine };
        BowDiagram { nodes, dims, shape }
    }
}

fn separated_view(d: &BowDiagram) -> Option<SeparatedForm> {
    let k = d.len();
    if k == 0 {
        return None;
    }
    let n = d.n_arrows();
    let w = k - n;
    if d.is_finite() {
        if d.nodes.iter().skip(n).any(|x| x.kind == NodeKind::Arrow) {
            return None;
        }
        return Some(read_separated(d, n, true));
    }
    // position of x_1: an x-point preceded by an arrow
    let p = if n == 0 {
        0
    } else if w == 0 {
        // put e_1 at the end of the list, so the "x_1 slot" is position 0
        0
    } else {
        let starts: Vec<usize> = (0..k)
            .filter(|&i| d.kind(i) == NodeKind::XPoint && d.kind(d.prev_pos(i)) == NodeKind::Arrow)
            .collect();
        if starts.len() != 1 {
            return None;
        }
        starts[0]
    };
    Some(read_separated(d, p, false))
}

fn read_separated(d: &BowDiagram, p: usize, finite: bool) -> SeparatedForm {
    let k = d.len();
    let n = d.n_arrows();
    let w = k - n;
    let at = |off: isize| -> usize { ((p as isize + off).rem_euclid(k as isize)) as usize };
    let xs = (0..w).map(|i| d.id(at(i as isize))).collect();
    let arrows = (1..=n).map(|s| d.id(at(-(s as isize)))).collect();
    let mut v_x = Vec::with_capacity(w + 1);
    v_x.push(d.dims[at(-1)]);
    for i in 0..w {
        v_x.push(d.dims[at(i as isize)]);
    }
    let mut v_arr = Vec::with_capacity(n + 1);
    v_arr.push(d.dims[at(-1)]);
    for s in 1..=n {
        v_arr.push(d.dims[at(-(s as isize) - 1)]);
    }
    SeparatedForm { finite, v_arr, v_x, arrows, xs }
}
