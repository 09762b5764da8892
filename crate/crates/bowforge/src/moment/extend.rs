use bowforge_core::hw::arc_segments;
use bowforge_core::{Move, NodeId, NodeKind};

use super::{lambda_on, CMat, MomentError, NodeData, Result, Solution, C64};

fn shifted(b: &CMat, c: C64) -> CMat {
    let mut out = b.clone();
    for i in 0..b.nrows() {
        out[(i, i)] -= c;
    }
    out
}

fn smallest_singular(m: &CMat) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Zero-pads `m` to `rows × cols`.
fn pad(m: &CMat, rows: usize, cols: usize) -> CMat {
    let mut out = CMat::zeros(rows, cols);
    out.view_mut((0, 0), m.shape()).copy_from(m);
    out
}

fn x_pair(m: &Solution, x1: NodeId, x2: NodeId) -> Result<(usize, usize)> {
    let d = &m.diagram;
    let (p1, p2) = (d.pos_of(x1)?, d.pos_of(x2)?);
    if d.kind(p1) != NodeKind::XPoint || d.kind(p2) != NodeKind::XPoint {
        return Err(MomentError::Precondition("x-point increment needs two x-points".into()));
    }
    if d.len() < 2 || d.next_pos(p1) != p2 {
        return Err(MomentError::Precondition("x-points are not consecutive".into()));
    }
    if d.cut() == Some(p1) {
        return Err(MomentError::Precondition("increment would cross the cut".into()));
    }
    Ok((p1, p2))
}

fn tri(m: &Solution, p: usize) -> &super::Triangle {
    m.data[p].triangle().expect("x-point")
}

/// First shift in `1, 2, 3, …` keeping `B_{x₁}⁻ − c`, `B_ζ − c` and `B_{x₂}⁺ − c`
/// away from singular by more than `1e-6`.
pub fn pick_shift(m: &Solution, x1: NodeId, x2: NodeId) -> Result<C64> {
    let (p1, p2) = x_pair(m, x1, x2)?;
    let (t1, t2) = (tri(m, p1), tri(m, p2));
    for k in 1..10_000 {
        let c = C64::new(k as f64, 0.0);
        let ok = [&t1.b_minus, &t1.b_plus, &t2.b_minus, &t2.b_plus]
            .iter()
            .all(|b| smallest_singular(&shifted(b, c)) > 1e-6);
        if ok {
            return Ok(c);
        }
    }
    Err(MomentError::SingularShift)
}

fn extend_x(m: &Solution, x1: NodeId, x2: NodeId, c: C64) -> Result<Solution> {
    let (p1, p2) = x_pair(m, x1, x2)?;
    let (t1, t2) = (tri(m, p1).clone(), tri(m, p2).clone());
    let s1 = shifted(&t1.b_minus, c);
    let s2 = shifted(&t2.b_plus, c);
    for b in [&s1, &shifted(&t1.b_plus, c), &shifted(&t2.b_minus, c), &s2] {
        if smallest_singular(b) <= 1e-12 {
            return Err(MomentError::SingularShift);
        }
    }
    let v = t1.b_plus.nrows();
    let inv1 = if s1.is_empty() { s1.clone() } else { s1.try_inverse().ok_or(MomentError::SingularShift)? };
    let inv2 = if s2.is_empty() { s2.clone() } else { s2.try_inverse().ok_or(MomentError::SingularShift)? };

    let mut n1 = t1.clone();
    n1.b_plus = pad(&t1.b_plus, v + 1, v + 1);
    n1.b_plus[(v, v)] = c;
    n1.a = pad(&t1.a, v + 1, 1);
    n1.a[(v, 0)] = C64::new(1.0, 0.0);
    let row = &t1.b * &inv1;
    n1.a_map = pad(&t1.a_map, v + 1, t1.a_map.ncols());
    n1.a_map.view_mut((v, 0), (1, row.ncols())).copy_from(&row);

    let mut n2 = t2.clone();
    n2.b_minus = pad(&t2.b_minus, v + 1, v + 1);
    n2.b_minus[(v, v)] = c;
    n2.b = pad(&t2.b, 1, v + 1);
    n2.b[(0, v)] = C64::new(1.0, 0.0);
    let col = -(&inv2 * &t2.a);
    n2.a_map = pad(&t2.a_map, t2.a_map.nrows(), v + 1);
    n2.a_map.view_mut((0, v), (col.nrows(), 1)).copy_from(&col);

    let mut dims = m.diagram.dims().to_vec();
    dims[p1] += 1;
    let mut out = m.clone();
    out.diagram = m.diagram.with_dims(dims)?;
    out.data[p1] = NodeData::X(n1);
    out.data[p2] = NodeData::X(n2);
    Ok(out)
}

/// Raises every segment of an arrow-to-arrow arc by one, extending the data
/// block-diagonally with `A = 1` and zeros elsewhere.
fn extend_arrows(m: &Solution, from: NodeId, to: NodeId, lambda: &[C64]) -> Result<Solution> {
    let d = &m.diagram;
    if d.kind_of(from)? != NodeKind::Arrow || d.kind_of(to)? != NodeKind::Arrow {
        return Err(MomentError::Precondition("arrow increment needs two arrows".into()));
    }
    let segs = arc_segments(d, from, to)?;
    if let Some(c) = d.cut() {
        if segs.contains(&c) {
            return Err(MomentError::Precondition("increment would cross the cut".into()));
        }
    }
    for &s in &segs {
        if let Some(z) = lambda_on(d, lambda, s)? {
            if z.norm() != 0.0 {
                return Err(MomentError::Precondition(
                    "arrow increments need a zero deformation on the raised wavy lines".into(),
                ));
            }
        }
    }
    let mut dims = d.dims().to_vec();
    for &s in &segs {
        dims[s] += 1;
    }
    let nd = d.with_dims(dims)?;
    let mut out = Solution { diagram: nd.clone(), data: m.data.clone(), seed: m.seed };
    for p in 0..d.len() {
        let (vl, vr) = (nd.dims()[nd.seg_before(p)] as usize, nd.dims()[p] as usize);
        let grew = segs.contains(&nd.seg_before(p)) && segs.contains(&p);
        out.data[p] = match &m.data[p] {
            NodeData::Arrow(e) => {
                NodeData::Arrow(super::ArrowMaps { c: pad(&e.c, vr, vl), d: pad(&e.d, vl, vr) })
            }
            NodeData::X(t) => {
                let mut a_map = pad(&t.a_map, vr, vl);
                if grew {
                    a_map[(vr - 1, vl - 1)] = C64::new(1.0, 0.0);
                }
                NodeData::X(super::Triangle {
                    a_map,
                    b_minus: pad(&t.b_minus, vl, vl),
                    b_plus: pad(&t.b_plus, vr, vr),
                    a: pad(&t.a, vr, 1),
                    b: pad(&t.b, 1, vl),
                })
            }
        };
    }
    Ok(out)
}

/// Extends a solution across an increment entry. `IncrementArrows` follows
/// the block-diagonal pattern and needs `λ = 0` on the raised wavy lines;
/// `IncrementX` must join two consecutive x-points and uses the shift `c`
/// for every unit (`None` picks the first admissible integer each time).
pub fn extend_increment(m: &Solution, entry: &Move, c: Option<C64>, lambda: &[C64]) -> Result<Solution> {
    m.check_shapes()?;
    match *entry {
        Move::IncrementArrows { from, to, amount } => {
            if amount < 0 {
                return Err(MomentError::Precondition("negative increment".into()));
            }
            let mut out = m.clone();
            for _ in 0..amount {
                out = extend_arrows(&out, from, to, lambda)?;
            }
            Ok(out)
        }
        Move::IncrementX { from, to, amount } => {
            if amount < 0 {
                return Err(MomentError::Precondition("negative increment".into()));
            }
            let mut out = m.clone();
            for _ in 0..amount {
                let shift = match c {
                    Some(c) => c,
                    None => pick_shift(&out, from, to)?,
                };
                out = extend_x(&out, from, to, shift)?;
            }
            Ok(out)
        }
        _ => Err(MomentError::Precondition("not an increment entry".into())),
    }
}
