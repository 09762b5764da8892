//! Serde mirrors of the core types. Every mirror converts back, so anything
//! the CLI prints can be read again.

use bowforge_core::brane::BraneLedger;
use bowforge_core::diagram::Node;
use bowforge_core::hw::NegativeWitness;
use bowforge_core::weights::AffineWeight;
use bowforge_core::{Brane, BowDiagram, Certificate, Dir, Move, MoveLog, NodeId, NodeKind, SeparatedForm, Shape, Witness};
use serde::{Deserialize, Serialize};

use crate::moment::{ArrowMaps, CMat, MomentError, NodeData, Solution, Triangle, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeJson {
    Affine,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: u32,
    /// `"o"` or `"x"`.
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub shape: ShapeJson,
    pub nodes: Vec<NodeJson>,
    pub dims: Vec<i64>,
    /// The text form; informational, ignored when reading back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

fn kind_symbol(k: NodeKind) -> String {
    k.symbol().to_string()
}

fn kind_from(s: &str) -> Result<NodeKind, String> {
    match s {
        "o" => Ok(NodeKind::Arrow),
        "x" => Ok(NodeKind::XPoint),
        other => Err(format!("unknown node kind {other:?}")),
    }
}

impl From<&BowDiagram> for DiagramJson {
    fn from(d: &BowDiagram) -> Self {
        DiagramJson {
            shape: if d.is_finite() { ShapeJson::Finite } else { ShapeJson::Affine },
            nodes: d.nodes().iter().map(|n| NodeJson { id: n.id.0, kind: kind_symbol(n.kind) }).collect(),
            dims: d.dims().to_vec(),
            text: Some(d.to_string()),
        }
    }
}

impl TryFrom<&DiagramJson> for BowDiagram {
    type Error = String;
    fn try_from(j: &DiagramJson) -> Result<Self, String> {
        let nodes = j
            .nodes
            .iter()
            .map(|n| Ok(Node { id: NodeId(n.id), kind: kind_from(&n.kind)? }))
            .collect::<Result<Vec<_>, String>>()?;
        let shape = match j.shape {
            ShapeJson::Affine => Shape::Affine,
            ShapeJson::Finite => Shape::Finite,
        };
        BowDiagram::from_nodes(shape, nodes, j.dims.clone()).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MoveJson {
    Hw { left: u32, right: u32 },
    IncrementArrows { from: u32, to: u32, amount: i64 },
    IncrementX { from: u32, to: u32, amount: i64 },
    SubtractArrowArc { from: u32, to: u32, amount: i64 },
    CutAt { after: u32 },
    Uncut { after: u32 },
}

impl From<&Move> for MoveJson {
    fn from(m: &Move) -> Self {
        match *m {
            Move::Hw { left, right } => MoveJson::Hw { left: left.0, right: right.0 },
            Move::IncrementArrows { from, to, amount } => MoveJson::IncrementArrows { from: from.0, to: to.0, amount },
            Move::IncrementX { from, to, amount } => MoveJson::IncrementX { from: from.0, to: to.0, amount },
            Move::SubtractArrowArc { from, to, amount } => {
                MoveJson::SubtractArrowArc { from: from.0, to: to.0, amount }
            }
            Move::CutAt { after } => MoveJson::CutAt { after: after.0 },
            Move::Uncut { after } => MoveJson::Uncut { after: after.0 },
        }
    }
}

impl From<&MoveJson> for Move {
    fn from(m: &MoveJson) -> Self {
        match *m {
            MoveJson::Hw { left, right } => Move::Hw { left: NodeId(left), right: NodeId(right) },
            MoveJson::IncrementArrows { from, to, amount } => {
                Move::IncrementArrows { from: NodeId(from), to: NodeId(to), amount }
            }
            MoveJson::IncrementX { from, to, amount } => Move::IncrementX { from: NodeId(from), to: NodeId(to), amount },
            MoveJson::SubtractArrowArc { from, to, amount } => {
                Move::SubtractArrowArc { from: NodeId(from), to: NodeId(to), amount }
            }
            MoveJson::CutAt { after } => Move::CutAt { after: NodeId(after) },
            MoveJson::Uncut { after } => Move::Uncut { after: NodeId(after) },
        }
    }
}

pub fn log_to_json(log: &MoveLog) -> Vec<MoveJson> {
    log.iter().map(MoveJson::from).collect()
}

pub fn log_from_json(log: &[MoveJson]) -> MoveLog {
    MoveLog::from(log.iter().map(Move::from).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirJson {
    Cw,
    Acw,
}

impl From<Dir> for DirJson {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Cw => DirJson::Cw,
            Dir::Acw => DirJson::Acw,
        }
    }
}

impl From<DirJson> for Dir {
    fn from(d: DirJson) -> Self {
        match d {
            DirJson::Cw => Dir::Cw,
            DirJson::Acw => Dir::Acw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeJson {
    pub move_log: Vec<MoveJson>,
    pub segment: usize,
    pub value: i64,
}

impl From<&NegativeWitness> for NegativeJson {
    fn from(w: &NegativeWitness) -> Self {
        NegativeJson { move_log: log_to_json(&w.move_log), segment: w.segment, value: w.value }
    }
}

impl From<&NegativeJson> for NegativeWitness {
    fn from(w: &NegativeJson) -> Self {
        NegativeWitness { move_log: log_from_json(&w.move_log), segment: w.segment, value: w.value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessJson {
    InequalityViolation { dir: DirJson, t: u32, s: usize, k: usize, value: i64 },
    Negative(NegativeJson),
    FiniteCheckPassed { checked: Vec<(usize, usize, i64)> },
    TrivialNoNodes { min_dim: i64 },
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::InequalityViolation { dir, t, s, k, value } => {
                WitnessJson::InequalityViolation { dir: (*dir).into(), t: *t, s: *s, k: *k, value: *value }
            }
            Witness::Negative(n) => WitnessJson::Negative(n.into()),
            Witness::FiniteCheckPassed { checked } => WitnessJson::FiniteCheckPassed { checked: checked.clone() },
            Witness::TrivialNoNodes { min_dim } => WitnessJson::TrivialNoNodes { min_dim: *min_dim },
        }
    }
}

impl From<&WitnessJson> for Witness {
    fn from(w: &WitnessJson) -> Self {
        match w {
            WitnessJson::InequalityViolation { dir, t, s, k, value } => {
                Witness::InequalityViolation { dir: (*dir).into(), t: *t, s: *s, k: *k, value: *value }
            }
            WitnessJson::Negative(n) => Witness::Negative(n.into()),
            WitnessJson::FiniteCheckPassed { checked } => Witness::FiniteCheckPassed { checked: checked.clone() },
            WitnessJson::TrivialNoNodes { min_dim } => Witness::TrivialNoNodes { min_dim: *min_dim },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub susy: bool,
    /// Value of the witness when the verdict is negative.
    pub value: Option<i64>,
    pub witness: WitnessJson,
    pub pipeline: Vec<MoveJson>,
    pub realization: Vec<MoveJson>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            susy: c.verdict,
            value: if c.verdict { None } else { c.witness.value() },
            witness: (&c.witness).into(),
            pipeline: log_to_json(&c.pipeline),
            realization: log_to_json(&c.realization),
        }
    }
}

impl From<&CertificateJson> for Certificate {
    fn from(c: &CertificateJson) -> Self {
        Certificate {
            verdict: c.susy,
            witness: (&c.witness).into(),
            pipeline: log_from_json(&c.pipeline),
            realization: log_from_json(&c.realization),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraneJson {
    pub start: u32,
    pub end: u32,
    pub dir: DirJson,
    pub laps: u32,
    pub mult: u32,
}

impl From<&Brane> for BraneJson {
    fn from(b: &Brane) -> Self {
        BraneJson { start: b.start.0, end: b.end.0, dir: b.dir.into(), laps: b.laps, mult: b.mult }
    }
}

impl From<&BraneJson> for Brane {
    fn from(b: &BraneJson) -> Self {
        Brane { start: NodeId(b.start), end: NodeId(b.end), dir: b.dir.into(), laps: b.laps, mult: b.mult }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerJson {
    pub host: DiagramJson,
    pub branes: Vec<BraneJson>,
}

impl From<&BraneLedger> for LedgerJson {
    fn from(l: &BraneLedger) -> Self {
        LedgerJson { host: (&l.host).into(), branes: l.branes.iter().map(BraneJson::from).collect() }
    }
}

impl TryFrom<&LedgerJson> for BraneLedger {
    type Error = String;
    fn try_from(l: &LedgerJson) -> Result<Self, String> {
        Ok(BraneLedger { host: BowDiagram::try_from(&l.host)?, branes: l.branes.iter().map(Brane::from).collect() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightJson {
    pub values: Vec<i64>,
    pub level: i64,
    pub dpair: i64,
}

impl From<&AffineWeight> for WeightJson {
    fn from(w: &AffineWeight) -> Self {
        WeightJson { values: w.values.clone(), level: w.level, dpair: w.dpair }
    }
}

impl From<&WeightJson> for AffineWeight {
    fn from(w: &WeightJson) -> Self {
        AffineWeight { values: w.values.clone(), level: w.level, dpair: w.dpair }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatedJson {
    pub diagram: DiagramJson,
    pub v_arr: Vec<i64>,
    pub v_x: Vec<i64>,
    pub arrows: Vec<u32>,
    pub xs: Vec<u32>,
}

impl From<&SeparatedForm> for SeparatedJson {
    fn from(s: &SeparatedForm) -> Self {
        SeparatedJson {
            diagram: (&s.to_diagram()).into(),
            v_arr: s.v_arr.clone(),
            v_x: s.v_x.clone(),
            arrows: s.arrows.iter().map(|i| i.0).collect(),
            xs: s.xs.iter().map(|i| i.0).collect(),
        }
    }
}

impl From<&SeparatedJson> for SeparatedForm {
    fn from(s: &SeparatedJson) -> Self {
        SeparatedForm {
            finite: s.diagram.shape == ShapeJson::Finite,
            v_arr: s.v_arr.clone(),
            v_x: s.v_x.clone(),
            arrows: s.arrows.iter().map(|&i| NodeId(i)).collect(),
            xs: s.xs.iter().map(|&i| NodeId(i)).collect(),
        }
    }
}

/// A complex matrix as row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMat> for MatrixJson {
    fn from(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<&MatrixJson> for CMat {
    type Error = String;
    fn try_from(m: &MatrixJson) -> Result<Self, String> {
        if m.data.len() != m.rows * m.cols {
            return Err(format!("{}x{} matrix with {} entries", m.rows, m.cols, m.data.len()));
        }
        Ok(CMat::from_row_iterator(m.rows, m.cols, m.data.iter().map(|p| C64::new(p[0], p[1]))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeDataJson {
    X {
        id: u32,
        #[serde(rename = "A")]
        a_map: MatrixJson,
        #[serde(rename = "B_minus")]
        b_minus: MatrixJson,
        #[serde(rename = "B_plus")]
        b_plus: MatrixJson,
        a: MatrixJson,
        b: MatrixJson,
    },
    Arrow {
        id: u32,
        #[serde(rename = "C")]
        c: MatrixJson,
        #[serde(rename = "D")]
        d: MatrixJson,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub diagram: DiagramJson,
    pub seed: Option<u64>,
    /// Node data in diagram position order.
    pub nodes: Vec<NodeDataJson>,
}

impl From<&Solution> for SolutionJson {
    fn from(s: &Solution) -> Self {
        let nodes = s
            .data
            .iter()
            .enumerate()
            .map(|(p, n)| {
                let id = s.diagram.id(p).0;
                match n {
                    NodeData::X(t) => NodeDataJson::X {
                        id,
                        a_map: (&t.a_map).into(),
                        b_minus: (&t.b_minus).into(),
                        b_plus: (&t.b_plus).into(),
                        a: (&t.a).into(),
                        b: (&t.b).into(),
                    },
                    NodeData::Arrow(e) => NodeDataJson::Arrow { id, c: (&e.c).into(), d: (&e.d).into() },
                }
            })
            .collect();
        SolutionJson { diagram: (&s.diagram).into(), seed: s.seed, nodes }
    }
}

impl TryFrom<&SolutionJson> for Solution {
    type Error = MomentError;
    fn try_from(j: &SolutionJson) -> Result<Self, MomentError> {
        let shape = |e: String| MomentError::Shape(e);
        let diagram = BowDiagram::try_from(&j.diagram).map_err(shape)?;
        if j.nodes.len() != diagram.len() {
            return Err(MomentError::Shape(format!("{} nodes, {} data entries", diagram.len(), j.nodes.len())));
        }
        let mut data = Vec::with_capacity(j.nodes.len());
        for (p, n) in j.nodes.iter().enumerate() {
            let (id, node) = match n {
                NodeDataJson::X { id, a_map, b_minus, b_plus, a, b } => (
                    *id,
                    NodeData::X(Triangle {
                        a_map: a_map.try_into().map_err(shape)?,
                        b_minus: b_minus.try_into().map_err(shape)?,
                        b_plus: b_plus.try_into().map_err(shape)?,
                        a: a.try_into().map_err(shape)?,
                        b: b.try_into().map_err(shape)?,
                    }),
                ),
                NodeDataJson::Arrow { id, c, d } => {
                    (*id, NodeData::Arrow(ArrowMaps { c: c.try_into().map_err(shape)?, d: d.try_into().map_err(shape)? }))
                }
            };
            if diagram.id(p).0 != id {
                return Err(MomentError::Shape(format!("position {p} holds node {} but data names {id}", diagram.id(p).0)));
            }
            data.push(node);
        }
        let s = Solution { diagram, data, seed: j.seed };
        s.check_shapes()?;
        Ok(s)
    }
}
