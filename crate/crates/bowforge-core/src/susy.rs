//! Supersymmetry inequalities and the decision procedure.

use alloc::vec::Vec;

use crate::brane::Dir;
use crate::diagram::{BowDiagram, SeparatedForm};
use crate::error::{self, Error};
use crate::hw::{self, finish, Halt, NegativeWitness, Outcome, Rewriter};
use crate::moves::{Move, MoveLog};
use crate::Result;

/// The bound `cD^t_{s,k}` (clockwise) or its anticlockwise mirror.
///
/// `t = 0` is accepted so the degenerate identities can be checked; it never
/// yields a new constraint.
pub fn susy_bound(s: &SeparatedForm, dir: Dir, t: u32, si: usize, ki: usize) -> Result<i64> {
    let (n, w) = (s.n(), s.w());
    if si > n || ki > w {
        return Err(Error::Precondition("bound index out of range".into()));
    }
    let (n_, w_, s_, k_, t_) = (n as i64, w as i64, si as i64, ki as i64, t as i64);
    let tm1 = t_ - 1;
    let tri = tm1 * (t_ - 2) / 2;
    let base = error::add(
        error::add(error::mul(s_, k_)?, error::mul(tm1, s_ * w_ + k_ * n_)?)?,
        error::mul(tri, w_ * n_)?,
    )?;
    let (vs, vk, va, vb) = match dir {
        Dir::Cw => (s.v(si), s.vx(ki), s.vx(w), s.v(0)),
        Dir::Acw => (s.v(n - si), s.vx(w - ki), s.v(0), s.vx(w)),
    };
    let tail = error::add(vs, vk)?;
    error::sub(error::add(error::add(base, tail)?, error::mul(tm1, va)?)?, error::mul(t_, vb)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    InequalityViolation { dir: Dir, t: u32, s: usize, k: usize, value: i64 },
    Negative(NegativeWitness),
    /// Every checked `(s, k, cD¹_{s,k})` of the finite check.
    FiniteCheckPassed { checked: Vec<(usize, usize, i64)> },
    TrivialNoNodes { min_dim: i64 },
}

impl Witness {
    /// The negative value a false verdict rests on.
    pub fn value(&self) -> Option<i64> {
        match self {
            Witness::InequalityViolation { value, .. } => Some(*value),
            Witness::Negative(w) => Some(w.value),
            Witness::TrivialNoNodes { min_dim } => Some(*min_dim),
            Witness::FiniteCheckPassed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: bool,
    pub witness: Witness,
    /// Source to finite separated form: separation, gap normalization,
    /// arrow-arc subtraction, cut and the final arrow pushes.
    pub pipeline: MoveLog,
    /// For a false verdict, HW moves from the source that produce the
    /// witness value as a dimension. Empty when the value is already a
    /// dimension of the source.
    pub realization: MoveLog,
}

/// Clockwise `t = 1` inequalities of a finite separated diagram.
pub fn check_finite_separated(s: &SeparatedForm) -> Result<(bool, Witness)> {
    if !s.finite || s.v(s.n()) != 0 {
        return Err(Error::Precondition("not a finite separated layout".into()));
    }
    let (n, w) = (s.n(), s.w());
    let v0 = s.v(0);
    let viol = |si: usize, ki: usize, value: i64| Witness::InequalityViolation {
        dir: Dir::Cw,
        t: 1,
        s: si,
        k: ki,
        value,
    };
    if v0 < 0 {
        return Ok((false, viol(0, 0, v0)));
    }
    for si in 1..=n {
        if s.v(si) < 0 {
            return Ok((false, viol(si, 0, s.v(si))));
        }
    }
    for ki in 1..=w {
        if s.vx(ki) < 0 {
            return Ok((false, viol(0, ki, s.vx(ki))));
        }
    }
    let first_zero = |len: usize, f: &dyn Fn(usize) -> i64| (1..=len).find(|&i| f(i) == 0).unwrap_or(len);
    let np = first_zero(n, &|i| s.v(i));
    let wp = first_zero(w, &|i| s.vx(i));
    let cap = usize::try_from(v0).unwrap_or(usize::MAX);
    let mut checked = Vec::new();
    for si in 1..=np.min(cap) {
        for ki in 1..=wp.min(cap) {
            let value = susy_bound(s, Dir::Cw, 1, si, ki)?;
            if value < 0 {
                return Ok((false, viol(si, ki, value)));
            }
            checked.push((si, ki, value));
        }
    }
    Ok((true, Witness::FiniteCheckPassed { checked }))
}

/// Lowers every arrow-arc dimension by `a`.
pub fn subtract_arrow_arc(s: &SeparatedForm, a: i64) -> Result<SeparatedForm> {
    if s.finite {
        return Err(Error::Precondition("arrow-arc subtraction needs an affine diagram".into()));
    }
    let min = s.v_arr.iter().copied().min().unwrap_or(0);
    if a > min {
        return Err(Error::Precondition("amount exceeds the arrow-arc minimum".into()));
    }
    let gap = s.gap();
    if gap < 0 || gap >= s.w() as i64 {
        return Err(Error::Precondition("gap not normalized".into()));
    }
    let mut out = s.clone();
    for v in out.v_arr.iter_mut() {
        *v = error::sub(*v, a)?;
    }
    let w = out.w();
    out.v_x[0] = out.v_arr[0];
    out.v_x[w] = out.v_arr[out.n()];
    Ok(out)
}

fn reduce_impl(s: &SeparatedForm, rw: &mut Rewriter) -> core::result::Result<SeparatedForm, Halt> {
    if s.finite {
        return Ok(s.clone());
    }
    let (n, w) = (s.n(), s.w());
    let sub = subtract_arrow_arc(s, s.v_arr.iter().copied().min().unwrap_or(0))?;
    let a = s.v(0) - sub.v(0);
    rw.apply(Move::SubtractArrowArc { from: s.xs[w - 1], to: s.xs[0], amount: a })?;
    let star = (0..=n).find(|&i| sub.v(i) == 0).expect("minimum attained");
    let after = if star == 0 {
        s.arrows[0]
    } else if star == n {
        s.xs[w - 1]
    } else {
        s.arrows[star]
    };
    rw.apply(Move::CutAt { after })?;
    for si in (star + 1..=n).rev() {
        let e = s.arrows[si - 1];
        for &x in s.xs.iter().rev() {
            rw.hw(x, e)?;
        }
    }
    Ok(rw.view()?)
}

/// Normalizes the gap, subtracts the arrow-arc minimum, cuts at the first
/// zero arrow-arc segment and pushes the remaining arrows through the
/// x-points. A finite input passes through.
pub fn reduce_to_finite(s: &SeparatedForm) -> Result<Outcome<(SeparatedForm, MoveLog)>> {
    if s.finite {
        return Ok(Outcome::Done((s.clone(), MoveLog::new())));
    }
    let (norm, log) = match hw::normalize_gap(s)? {
        Outcome::Done(x) => x,
        Outcome::Negative(w) => return Ok(Outcome::Negative(w)),
    };
    let mut rw = Rewriter::new(norm.to_diagram(), true);
    rw.log = log;
    finish(reduce_impl(&norm, &mut rw).map(|f| (f, rw.log.clone())))
}

/// First violated `t = 1` inequality of an affine separated form, in the
/// order cw before acw, then by `(s, k)`.
pub fn first_affine_violation(s: &SeparatedForm) -> Result<Option<(Dir, usize, usize, i64)>> {
    for dir in [Dir::Cw, Dir::Acw] {
        for si in 0..=s.n() {
            for ki in 0..=s.w() {
                let v = susy_bound(s, dir, 1, si, ki)?;
                if v < 0 {
                    return Ok(Some((dir, si, ki, v)));
                }
            }
        }
    }
    Ok(None)
}

fn negative_cert(w: NegativeWitness) -> Certificate {
    Certificate {
        verdict: false,
        realization: w.move_log.clone(),
        pipeline: w.move_log.clone(),
        witness: Witness::Negative(w),
    }
}

/// Decides supersymmetry and returns a replayable certificate.
pub fn decide_supersymmetry(d: &BowDiagram) -> Result<Certificate> {
    d.ensure_valid()?;
    let (n, w) = (d.n_arrows(), d.n_xpoints());
    if n == 0 || w == 0 {
        let min_dim = d.min_dim().unwrap_or(0);
        return Ok(Certificate {
            verdict: min_dim >= 0,
            witness: Witness::TrivialNoNodes { min_dim },
            pipeline: MoveLog::new(),
            realization: MoveLog::new(),
        });
    }
    if let Some((seg, &value)) = d.dims().iter().enumerate().find(|(_, v)| **v < 0) {
        return Ok(negative_cert(NegativeWitness { move_log: MoveLog::new(), segment: seg, value }));
    }
    let (sep, mut pipeline) = match hw::separate(d)? {
        Outcome::Done(x) => x,
        Outcome::Negative(w) => return Ok(negative_cert(w)),
    };
    let fin = if sep.finite {
        sep
    } else {
        let (norm, nlog) = match hw::normalize_gap(&sep)? {
            Outcome::Done(x) => x,
            Outcome::Negative(mut w) => {
                let mut full = pipeline.clone();
                full.extend(&w.move_log);
                w.move_log = full;
                return Ok(negative_cert(w));
            }
        };
        pipeline.extend(&nlog);
        if let Some((dir, si, ki, value)) = first_affine_violation(&norm)? {
            let mut realization = pipeline.clone();
            if si > 0 && ki > 0 {
                realization.extend(&hw::realize_bound(&norm, dir, 1, si, ki)?.log);
            }
            return Ok(Certificate {
                verdict: false,
                witness: Witness::InequalityViolation { dir, t: 1, s: si, k: ki, value },
                pipeline,
                realization,
            });
        }
        let mut rw = Rewriter::new(norm.to_diagram(), true);
        match reduce_impl(&norm, &mut rw) {
            Ok(f) => {
                pipeline.extend(&rw.log);
                f
            }
            Err(Halt::Err(e)) => return Err(e),
            Err(Halt::Neg(mut w)) => {
                let mut full = pipeline.clone();
                full.extend(&w.move_log);
                w.move_log = full;
                return Ok(negative_cert(w));
            }
        }
    };
    let (verdict, witness) = check_finite_separated(&fin)?;
    let mut realization = MoveLog::new();
    if let Witness::InequalityViolation { s: si, k: ki, .. } = witness {
        if si > 0 && ki > 0 {
            // only reachable on finite input, where the pipeline is pure HW
            realization = pipeline.clone();
            realization.extend(&hw::realize_bound(&fin, Dir::Cw, 1, si, ki)?.log);
        }
    }
    Ok(Certificate { verdict, witness, pipeline, realization })
}
