use bowforge_core::brane::{coverage_on, synthesize, synthesize_finite, BraneLedger};
use bowforge_core::hw::neighbours;
use bowforge_core::{decide_supersymmetry, BowDiagram, Dir, Move, NodeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    extend_increment, moment_residual, refine, solve_numeric, stability_check, ArrowMaps, CMat, MomentError, NodeData,
    Result, Solution, SolveOptions, StabilityReport, Triangle, C64,
};

/// The `f = 0` family on `[ 0 o v₁ o 0 x v₋₁ x 0 ]`: `B₁⁺ = B₂⁻ = diag(1, …, v₋₁)`,
/// `a₁ = (1, …, 1)ᵀ`, `b₂ = (1, …, 1)` and every other map empty or zero.
pub fn closed_form_solution(v1: usize, vm1: usize) -> Result<Solution> {
    let d = BowDiagram::parse(&format!("[ 0 o {v1} o 0 x {vm1} x 0 ]"))?;
    let mut s = Solution::zeros(&d)?;
    let diag = CMat::from_fn(vm1, vm1, |i, j| if i == j { C64::new((i + 1) as f64, 0.0) } else { C64::new(0.0, 0.0) });
    let ones_col = CMat::from_element(vm1, 1, C64::new(1.0, 0.0));
    let ones_row = CMat::from_element(1, vm1, C64::new(1.0, 0.0));
    for p in 0..d.len() {
        if d.kind(p) != NodeKind::XPoint {
            continue;
        }
        let NodeData::X(t) = &mut s.data[p] else { unreachable!() };
        if d.dims()[p] as usize == vm1 && d.dims()[d.seg_before(p)] == 0 {
            t.b_plus = diag.clone();
            t.a = ones_col.clone();
        } else {
            t.b_minus = diag.clone();
            t.b = ones_row.clone();
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Every dimension is zero.
    Trivial,
    /// Increments and Hanany-Witten stages from the zero diagram.
    Staged,
    /// Hanany-Witten stages to the fixed branes of the input, then increments.
    Climb,
    /// Only one kind of 5-brane: a numerical solve on the input.
    Direct,
    /// The staged route failed and a numerical solve on the input took over.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct ConstructReport {
    pub solution: Solution,
    pub residual: f64,
    pub stability: StabilityReport,
    /// Stages re-solved numerically on the way back to the input diagram.
    pub refinements: usize,
    /// Explicit increment extensions applied.
    pub extensions: usize,
    pub route: Route,
}

const STAGED_ROUNDS: u64 = 6;

fn gauss(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    if scale == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * scale, im * scale)
}

fn pad_noise(m: &CMat, rows: usize, cols: usize, rng: &mut ChaCha8Rng, noise: (f64, f64)) -> CMat {
    CMat::from_fn(rows, cols, |r, c| {
        if r < m.nrows() && c < m.ncols() {
            m[(r, c)] + gauss(rng, noise.1)
        } else {
            gauss(rng, noise.0)
        }
    })
}

/// Carries data to `target` node by node, truncating or padding every matrix
/// to the new shapes. Padding entries are Gaussians of scale `noise.0`, kept
/// entries move by Gaussians of scale `noise.1`; `factor` scales both per
/// matrix.
fn embed(
    prev: &Solution,
    target: &BowDiagram,
    rng: &mut ChaCha8Rng,
    noise: (f64, f64),
    factor: &mut dyn FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<Solution> {
    let mut out = Solution::zeros(target)?;
    out.seed = prev.seed;
    for p in 0..target.len() {
        let src = prev.node(target.id(p))?;
        let shapes: Vec<(usize, usize)> = out.data[p].mats().iter().map(|m| m.shape()).collect();
        let mut fill = |m: &CMat, k: usize, rng: &mut ChaCha8Rng| {
            let f = factor(rng);
            pad_noise(m, shapes[k].0, shapes[k].1, rng, (noise.0 * f, noise.1 * f))
        };
        out.data[p] = match src {
            NodeData::X(t) => NodeData::X(Triangle {
                a_map: fill(&t.a_map, 0, rng),
                b_minus: fill(&t.b_minus, 1, rng),
                b_plus: fill(&t.b_plus, 2, rng),
                a: fill(&t.a, 3, rng),
                b: fill(&t.b, 4, rng),
            }),
            NodeData::Arrow(e) => NodeData::Arrow(ArrowMaps { c: fill(&e.c, 0, rng), d: fill(&e.d, 1, rng) }),
        };
    }
    Ok(out)
}

fn accepted(m: &Solution, opts: &SolveOptions) -> Result<Option<(f64, StabilityReport)>> {
    let res = moment_residual(m, &[])?.total;
    if res > opts.tol * (1.0 + m.norm().powi(2)) {
        return Ok(None);
    }
    let st = stability_check(m, opts.rank_tol);
    Ok(st.stable().then_some((res, st)))
}

/// Increment entries turning the fixed-brane part of a ledger back into the
/// full host, one per unfixed brane.
fn unfixed_entries(ledger: &BraneLedger) -> Result<Option<(BowDiagram, Vec<Move>)>> {
    let f = &ledger.host;
    let mut fixed = Vec::new();
    let mut entries = Vec::new();
    for b in &ledger.branes {
        if b.is_fixed(f)? {
            fixed.push(*b);
            continue;
        }
        if b.laps != 0 || b.start == b.end {
            return Ok(None);
        }
        let (from, to) = match b.dir {
            Dir::Acw => (b.start, b.end),
            Dir::Cw => (b.end, b.start),
        };
        let amount = b.mult as i64;
        if f.kind_of(from)? == NodeKind::Arrow {
            entries.push(Move::IncrementArrows { from, to, amount });
        } else {
            for s in b.arc(f)? {
                entries.push(Move::IncrementX { from: f.id(s), to: f.id(f.next_pos(s)), amount });
            }
        }
    }
    let base = f.with_dims(coverage_on(&fixed, f)?)?;
    Ok(Some((base, entries)))
}

/// Hanany-Witten moves taking `d` to the zero diagram, each one lowering a
/// single dimension. `None` when the greedy descent stalls.
fn annihilation_path(d: &BowDiagram) -> Result<Option<Vec<Move>>> {
    let mut cur = d.clone();
    let mut path = Vec::new();
    while cur.dims().iter().any(|&v| v != 0) {
        let mut best: Option<(i64, Move, BowDiagram)> = None;
        for (left, right) in neighbours(&cur) {
            let m = Move::Hw { left, right };
            let next = m.apply(&cur)?;
            let p = cur.pos_of(left)?;
            let (old, new) = (cur.dims()[p], next.dims()[p]);
            if new < old && new >= 0 && best.as_ref().map_or(true, |b| new < b.0) {
                best = Some((new, m, next));
            }
        }
        let Some((_, m, next)) = best else { return Ok(None) };
        path.push(m);
        cur = next;
    }
    Ok(Some(path))
}

/// One move followed by warm-started re-solves until a stable point turns up.
fn stage(cur: &Solution, m: &Move, rng: &mut ChaCha8Rng, opts: &SolveOptions) -> Result<Option<Solution>> {
    let next = m.apply(&cur.diagram)?;
    for attempt in 0..=opts.retries {
        let warm = match attempt {
            0 => embed(cur, &next, rng, (0.3, 0.0), &mut |_| 1.0)?,
            1 => embed(cur, &next, rng, (1.0, 0.1), &mut |_| 1.0)?,
            // start near a random coordinate stratum: some matrices almost vanish
            _ => embed(cur, &next, rng, (1.0, 0.1), &mut |r| if r.gen_bool(0.5) { 1e-3 } else { 1.0 })?,
        };
        let (r, _, _) = refine(warm, &[], opts)?;
        if accepted(&r, opts)?.is_some() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Replays `path` backwards from the zero diagram it ends at, re-solving at every stage.
fn climb(top: &BowDiagram, path: &[Move], rng: &mut ChaCha8Rng, opts: &SolveOptions) -> Result<Option<Solution>> {
    let zero = path.iter().try_fold(top.clone(), |d, m| m.apply(&d))?;
    let mut cur = Solution::zeros(&zero)?;
    for m in path.iter().rev() {
        let Some(next) = stage(&cur, &m.inverse(), rng, opts)? else { return Ok(None) };
        cur = next;
    }
    Ok(Some(cur))
}

/// The fixed-brane part of the input's own ledger, a descent from it to the
/// zero diagram, and the increments restoring the unfixed branes.
fn ledger_split(d: &BowDiagram) -> Result<Option<(BowDiagram, Vec<Move>, Vec<Move>)>> {
    let Some((base, entries)) = unfixed_entries(&synthesize(d)?)? else { return Ok(None) };
    for e in &entries {
        if let Move::IncrementX { from, to, .. } = *e {
            if d.kind_of(from)? != NodeKind::XPoint || d.kind_of(to)? != NodeKind::XPoint {
                return Ok(None);
            }
        }
    }
    let Some(path) = annihilation_path(&base)? else { return Ok(None) };
    Ok(Some((base, path, entries)))
}

fn staged(d: &BowDiagram, stream: u64, opts: &SolveOptions) -> Result<Option<(Solution, usize, usize)>> {
    let cert = decide_supersymmetry(d)?;
    let fin = cert.pipeline.replay(d)?;
    let view = fin.separated_view().ok_or(bowforge_core::Error::NotSeparated)?;
    let Some((base, entries)) = unfixed_entries(&synthesize_finite(&view)?)? else { return Ok(None) };
    let Some(path) = annihilation_path(&base)? else { return Ok(None) };
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let stage_opts = SolveOptions { max_iters: opts.max_iters.min(60), ..opts.clone() };
    let Some(mut cur) = climb(&base, &path, &mut rng, &stage_opts)? else { return Ok(None) };
    let mut refinements = path.len();
    for e in &entries {
        cur = extend_increment(&cur, e, None, &[])?;
    }
    if cur.diagram != fin {
        return Err(MomentError::Precondition("increments did not rebuild the finite form".into()));
    }
    for m in cert.pipeline.iter().rev() {
        let next = m.inverse().apply(&cur.diagram)?;
        let same_data = next.len() == cur.diagram.len()
            && (0..next.len()).all(|p| next.id(p) == cur.diagram.id(p) && next.dims()[p] == cur.diagram.dims()[p]);
        if same_data {
            cur.diagram = next;
            continue;
        }
        let Some(next) = stage(&cur, &m.inverse(), &mut rng, &stage_opts)? else { return Ok(None) };
        cur = next;
        refinements += 1;
    }
    let host = embed(&cur, d, &mut rng, (0.0, 0.0), &mut |_| 0.0)?;
    if host.diagram != *d {
        return Ok(None);
    }
    Ok(Some((host, refinements, entries.len())))
}

/// A point of the zero fibre for a supersymmetric diagram with `λ = 0`,
/// built by reversing the decision pipeline: a solution on the fixed-brane
/// part of the finite form, explicit increment extensions for the unfixed
/// branes, then a warm-started numerical re-solve at every Hanany-Witten
/// stage back to the input. A direct climb from the zero diagram and then a
/// cold solve on the input are the fallbacks.
pub fn construct_solution(d: &BowDiagram, seed: u64, opts: &SolveOptions) -> Result<ConstructReport> {
    let cert = decide_supersymmetry(d)?;
    if !cert.verdict {
        return Err(MomentError::NotSupersymmetric);
    }
    if d.dims().iter().all(|&v| v == 0) {
        let s = Solution::zeros(d)?;
        let stability = stability_check(&s, opts.rank_tol);
        return Ok(ConstructReport { solution: s, residual: 0.0, stability, refinements: 0, extensions: 0, route: Route::Trivial });
    }
    let mixed = d.n_arrows() > 0 && d.n_xpoints() > 0;
    if mixed {
        // a stage can get stuck next to the unstable part of the fibre; start over from the bottom
        for round in 0..STAGED_ROUNDS {
            let stream = (seed ^ 0x5eed).wrapping_add(round.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let Some((s, refinements, extensions)) = staged(d, stream, opts)? else { continue };
            let (mut s, _, _) = refine(s, &[], opts)?;
            if let Some((residual, stability)) = accepted(&s, opts)? {
                s.seed = Some(seed);
                return Ok(ConstructReport { solution: s, residual, stability, refinements, extensions, route: Route::Staged });
            }
        }
    }
    if mixed {
        if let Some((base, path, entries)) = ledger_split(d)? {
            let stage_opts = SolveOptions { max_iters: opts.max_iters.min(60), ..opts.clone() };
            for round in 0..STAGED_ROUNDS {
                let mut rng = ChaCha8Rng::seed_from_u64((seed ^ 0xc1b).wrapping_add(round.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
                let Some(mut s) = climb(&base, &path, &mut rng, &stage_opts)? else { continue };
                for e in &entries {
                    s = extend_increment(&s, e, None, &[])?;
                }
                let (mut s, _, _) = refine(s, &[], opts)?;
                if let Some((residual, stability)) = accepted(&s, opts)? {
                    s.seed = Some(seed);
                    let (refinements, extensions) = (path.len(), entries.len());
                    return Ok(ConstructReport { solution: s, residual, stability, refinements, extensions, route: Route::Climb });
                }
            }
        }
    }
    let r = solve_numeric(d, &[], seed, opts)?;
    Ok(ConstructReport {
        solution: r.solution,
        residual: r.residual,
        stability: r.stability,
        refinements: r.attempts,
        extensions: 0,
        route: if mixed { Route::Fallback } else { Route::Direct },
    })
}
