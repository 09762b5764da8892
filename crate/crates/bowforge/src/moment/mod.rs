//! Triangle and arrow data on a bow diagram, the moment map and its
//! stability conditions, explicit increment extensions and a numerical
//! solver for points of the zero fibre.

mod construct;
mod extend;
mod solver;
mod stability;

pub use construct::{construct_solution, closed_form_solution, ConstructReport, Route};
pub use extend::{extend_increment, pick_shift};
pub use solver::{objective_and_gradient, refine, solve_numeric, SolveOptions, SolveReport};
pub use stability::{stability_check, StabilityReport, TriangleStability};

use std::fmt;

use bowforge_core::{BowDiagram, NodeId, NodeKind};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

#[derive(Clone, Debug, PartialEq)]
pub enum MomentError {
    Shape(String),
    NegativeDimension { segment: usize, value: i64 },
    Precondition(String),
    /// The shift scalar of an x-point extension makes a block singular.
    SingularShift,
    NotSupersymmetric,
    NoConvergence { best_residual: f64, attempts: usize },
    Core(bowforge_core::Error),
}

impl fmt::Display for MomentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentError::Shape(m) => write!(f, "shape mismatch: {m}"),
            MomentError::NegativeDimension { segment, value } => {
                write!(f, "segment {segment} has negative dimension {value}")
            }
            MomentError::Precondition(m) => write!(f, "precondition violated: {m}"),
            MomentError::SingularShift => write!(f, "shift scalar hits the spectrum"),
            MomentError::NotSupersymmetric => write!(f, "diagram is not supersymmetric"),
            MomentError::NoConvergence { best_residual, attempts } => {
                write!(f, "no accepted solution after {attempts} attempts (best residual {best_residual:.3e})")
            }
            MomentError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MomentError {}

impl From<bowforge_core::Error> for MomentError {
    fn from(e: bowforge_core::Error) -> Self {
        MomentError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, MomentError>;

/// `(A, B⁻, B⁺, a, b)` at an x-point with `A: v⁻ → v⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    pub a_map: CMat,
    pub b_minus: CMat,
    pub b_plus: CMat,
    pub a: CMat,
    pub b: CMat,
}

/// `C: v_t → v_h`, `D: v_h → v_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrowMaps {
    pub c: CMat,
    pub d: CMat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeData {
    X(Triangle),
    Arrow(ArrowMaps),
}

impl NodeData {
    fn mats(&self) -> Vec<&CMat> {
        match self {
            NodeData::X(t) => vec![&t.a_map, &t.b_minus, &t.b_plus, &t.a, &t.b],
            NodeData::Arrow(e) => vec![&e.c, &e.d],
        }
    }

    fn mats_mut(&mut self) -> Vec<&mut CMat> {
        match self {
            NodeData::X(t) => vec![&mut t.a_map, &mut t.b_minus, &mut t.b_plus, &mut t.a, &mut t.b],
            NodeData::Arrow(e) => vec![&mut e.c, &mut e.d],
        }
    }

    pub fn triangle(&self) -> Option<&Triangle> {
        match self {
            NodeData::X(t) => Some(t),
            NodeData::Arrow(_) => None,
        }
    }

    pub fn arrow(&self) -> Option<&ArrowMaps> {
        match self {
            NodeData::Arrow(e) => Some(e),
            NodeData::X(_) => None,
        }
    }
}

/// A point of the data space, with node data listed in diagram position order.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub diagram: BowDiagram,
    pub data: Vec<NodeData>,
    pub seed: Option<u64>,
}

/// `(rows, cols)` of every matrix of the node at `pos`.
fn shapes(d: &BowDiagram, pos: usize) -> Vec<(usize, usize)> {
    let vl = d.dims()[d.seg_before(pos)] as usize;
    let vr = d.dims()[d.seg_after(pos)] as usize;
    match d.kind(pos) {
        NodeKind::XPoint => vec![(vr, vl), (vl, vl), (vr, vr), (vr, 1), (1, vl)],
        NodeKind::Arrow => vec![(vr, vl), (vl, vr)],
    }
}

fn node_from(kind: NodeKind, mut mats: Vec<CMat>) -> NodeData {
    match kind {
        NodeKind::XPoint => {
            let b = mats.pop().unwrap();
            let a = mats.pop().unwrap();
            let b_plus = mats.pop().unwrap();
            let b_minus = mats.pop().unwrap();
            let a_map = mats.pop().unwrap();
            NodeData::X(Triangle { a_map, b_minus, b_plus, a, b })
        }
        NodeKind::Arrow => {
            let d = mats.pop().unwrap();
            let c = mats.pop().unwrap();
            NodeData::Arrow(ArrowMaps { c, d })
        }
    }
}

fn check_dims(d: &BowDiagram) -> Result<()> {
    if let Some((segment, &value)) = d.dims().iter().enumerate().find(|(_, v)| **v < 0) {
        return Err(MomentError::NegativeDimension { segment, value });
    }
    Ok(())
}

impl Solution {
    pub fn zeros(d: &BowDiagram) -> Result<Solution> {
        check_dims(d)?;
        let data = (0..d.len())
            .map(|p| node_from(d.kind(p), shapes(d, p).into_iter().map(|(r, c)| CMat::zeros(r, c)).collect()))
            .collect();
        Ok(Solution { diagram: d.clone(), data, seed: None })
    }

    /// Complex Gaussian entries with standard deviation `scale` per component.
    pub fn random<R: Rng>(d: &BowDiagram, rng: &mut R, scale: f64) -> Result<Solution> {
        let mut s = Solution::zeros(d)?;
        for node in &mut s.data {
            for m in node.mats_mut() {
                for z in m.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = C64::new(re * scale, im * scale);
                }
            }
        }
        Ok(s)
    }

    /// Checks every matrix against the dimensions of the diagram.
    pub fn check_shapes(&self) -> Result<()> {
        let d = &self.diagram;
        check_dims(d)?;
        if self.data.len() != d.len() {
            return Err(MomentError::Shape(format!("{} nodes, {} data entries", d.len(), self.data.len())));
        }
        for (p, node) in self.data.iter().enumerate() {
            let kind_ok = matches!(
                (d.kind(p), node),
                (NodeKind::XPoint, NodeData::X(_)) | (NodeKind::Arrow, NodeData::Arrow(_))
            );
            if !kind_ok {
                return Err(MomentError::Shape(format!("node {p} has data of the wrong kind")));
            }
            for (m, (r, c)) in node.mats().into_iter().zip(shapes(d, p)) {
                if m.shape() != (r, c) {
                    return Err(MomentError::Shape(format!(
                        "node {p}: expected {r}x{c}, found {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeData> {
        Ok(&self.data[self.diagram.pos_of(id)?])
    }

    pub fn n_params(&self) -> usize {
        2 * self.data.iter().flat_map(|n| n.mats()).map(|m| m.len()).sum::<usize>()
    }

    /// Real and imaginary parts of every entry, matrices in node order, each
    /// matrix row-major.
    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for m in self.data.iter().flat_map(|n| n.mats()) {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    out.push(m[(r, c)].re);
                    out.push(m[(r, c)].im);
                }
            }
        }
        out
    }

    pub fn with_params(&self, p: &[f64]) -> Solution {
        let mut s = self.clone();
        let mut k = 0;
        for node in &mut s.data {
            for m in node.mats_mut() {
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        m[(r, c)] = C64::new(p[k], p[k + 1]);
                        k += 2;
                    }
                }
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().flat_map(|n| n.mats()).map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Per-segment moment map blocks minus `λ`, per-x-point condition (a)
/// blocks, and the sum of their Frobenius norms.
#[derive(Clone, Debug)]
pub struct Residual {
    pub segments: Vec<CMat>,
    /// `(position, B⁺A − AB⁻ + ab)` for every x-point.
    pub conditions: Vec<(usize, CMat)>,
    pub total: f64,
}

impl Residual {
    pub fn squared(&self) -> f64 {
        self.segments.iter().chain(self.conditions.iter().map(|c| &c.1)).map(|m| m.norm_squared()).sum()
    }
}

/// `λ` on segment `i`, which is the first segment of a wavy line exactly when
/// node `i` is an arrow. `lambda` lists one value per arrow in position order;
/// an empty slice means zero.
fn lambda_on(d: &BowDiagram, lambda: &[C64], seg: usize) -> Result<Option<C64>> {
    if d.kind(seg) != NodeKind::Arrow || lambda.is_empty() {
        return Ok(None);
    }
    let idx = (0..seg).filter(|&p| d.kind(p) == NodeKind::Arrow).count();
    lambda
        .get(idx)
        .copied()
        .map(Some)
        .ok_or_else(|| MomentError::Shape(format!("{} deformation values for {} arrows", lambda.len(), d.n_arrows())))
}

fn check_lambda(d: &BowDiagram, lambda: &[C64]) -> Result<()> {
    if !lambda.is_empty() && lambda.len() != d.n_arrows() {
        return Err(MomentError::Shape(format!("{} deformation values for {} arrows", lambda.len(), d.n_arrows())));
    }
    Ok(())
}

/// Bilinear part evaluated on `(p, q)`, plus the linear part on `lin`, minus
/// `λ` when `with_lambda`.
fn blocks(
    p: &Solution,
    q: &Solution,
    lin: Option<&Solution>,
    lambda: &[C64],
    with_lambda: bool,
) -> Result<(Vec<CMat>, Vec<(usize, CMat)>)> {
    let d = &p.diagram;
    let k = d.len();
    let mut segs = Vec::with_capacity(k);
    for i in 0..k {
        let v = d.dims()[i] as usize;
        let (l, r) = (i, d.next_pos(i));
        let mut m = CMat::zeros(v, v);
        match (&p.data[l], &q.data[l]) {
            (NodeData::Arrow(pe), NodeData::Arrow(qe)) => m += &pe.c * &qe.d,
            _ => {
                if let Some(NodeData::X(t)) = lin.map(|s| &s.data[l]) {
                    m -= &t.b_plus;
                }
            }
        }
        match (&p.data[r], &q.data[r]) {
            (NodeData::Arrow(pe), NodeData::Arrow(qe)) => m -= &pe.d * &qe.c,
            _ => {
                if let Some(NodeData::X(t)) = lin.map(|s| &s.data[r]) {
                    m += &t.b_minus;
                }
            }
        }
        if with_lambda {
            if let Some(z) = lambda_on(d, lambda, i)? {
                for j in 0..v {
                    m[(j, j)] -= z;
                }
            }
        }
        segs.push(m);
    }
    let mut conds = Vec::new();
    for pos in 0..k {
        if let (NodeData::X(pt), NodeData::X(qt)) = (&p.data[pos], &q.data[pos]) {
            let m = &pt.b_plus * &qt.a_map - &pt.a_map * &qt.b_minus + &pt.a * &qt.b;
            conds.push((pos, m));
        }
    }
    Ok((segs, conds))
}

/// The moment map at every segment minus `λ`, together with condition (a).
pub fn moment_residual(m: &Solution, lambda: &[C64]) -> Result<Residual> {
    m.check_shapes()?;
    check_lambda(&m.diagram, lambda)?;
    let (segments, conditions) = blocks(m, m, Some(m), lambda, true)?;
    let total = segments.iter().map(|b| b.norm()).sum::<f64>() + conditions.iter().map(|c| c.1.norm()).sum::<f64>();
    Ok(Residual { segments, conditions, total })
}

/// Derivative of the residual at `m` in direction `dm`.
pub(crate) fn residual_derivative(m: &Solution, dm: &Solution) -> Result<(Vec<CMat>, Vec<(usize, CMat)>)> {
    let (mut s1, mut c1) = blocks(dm, m, Some(dm), &[], false)?;
    let (s2, c2) = blocks(m, dm, None, &[], false)?;
    for (a, b) in s1.iter_mut().zip(s2) {
        *a += b;
    }
    for (a, b) in c1.iter_mut().zip(c2) {
        a.1 += b.1;
    }
    Ok((s1, c1))
}

pub(crate) fn flatten(segs: &[CMat], conds: &[(usize, CMat)], out: &mut Vec<f64>) {
    out.clear();
    for m in segs.iter().chain(conds.iter().map(|c| &c.1)) {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.push(m[(r, c)].re);
                out.push(m[(r, c)].im);
            }
        }
    }
}

/// Parses `λ` from comma-separated reals or `re+imi` pairs written as `re:im`.
pub fn parse_lambda(text: &str) -> std::result::Result<Vec<C64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            match t.split_once(':') {
                Some((re, im)) => Ok(C64::new(
                    re.parse().map_err(|_| format!("bad real part {re:?}"))?,
                    im.parse().map_err(|_| format!("bad imaginary part {im:?}"))?,
                )),
                None => t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| format!("bad value {t:?}")),
            }
        })
        .collect()
}

/// Expands a single `λ` value to every arrow; other lengths pass through.
pub fn broadcast_lambda(d: &BowDiagram, lambda: Vec<C64>) -> Vec<C64> {
    if lambda.len() == 1 && d.n_arrows() != 1 {
        vec![lambda[0]; d.n_arrows()]
    } else {
        lambda
    }
}

