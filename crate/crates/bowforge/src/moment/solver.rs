use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bowforge_core::BowDiagram;

use super::{
    check_lambda, flatten, moment_residual, residual_derivative, stability_check, MomentError, Result, Solution,
    StabilityReport, C64,
};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Fresh seeds tried after the first one.
    pub retries: usize,
    /// Accept when the residual is at most `tol·(1 + ‖m‖²)`.
    pub tol: f64,
    pub rank_tol: f64,
    /// Standard deviation of the random initial entries.
    pub init_scale: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iters: 200, retries: 20, tol: 1e-8, rank_tol: 1e-6, init_scale: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: Solution,
    pub residual: f64,
    pub iterations: usize,
    pub attempts: usize,
    pub stability: StabilityReport,
}

fn residual_vec(m: &Solution, lambda: &[C64], out: &mut Vec<f64>) -> Result<()> {
    let r = moment_residual(m, lambda)?;
    flatten(&r.segments, &r.conditions, out);
    Ok(())
}

/// Jacobian of the flattened residual with respect to the flattened
/// parameters, one column per real parameter.
fn jacobian(m: &Solution, rows: usize) -> Result<DMatrix<f64>> {
    let np = m.n_params();
    let mut j = DMatrix::zeros(rows, np);
    let mut unit = vec![0.0; np];
    let mut col = Vec::with_capacity(rows);
    for k in 0..np {
        unit[k] = 1.0;
        let dm = m.with_params(&unit);
        unit[k] = 0.0;
        let (s, c) = residual_derivative(m, &dm)?;
        flatten(&s, &c, &mut col);
        for (i, v) in col.iter().enumerate() {
            j[(i, k)] = *v;
        }
    }
    Ok(j)
}

/// `½‖r‖²` and its gradient `Jᵀr` in the flattened real parameters.
pub fn objective_and_gradient(m: &Solution, lambda: &[C64]) -> Result<(f64, Vec<f64>)> {
    let mut r = Vec::new();
    residual_vec(m, lambda, &mut r)?;
    let j = jacobian(m, r.len())?;
    let rv = DVector::from_vec(r);
    let g = j.transpose() * &rv;
    Ok((0.5 * rv.norm_squared(), g.iter().copied().collect()))
}

fn accept_level(m: &Solution, tol: f64) -> f64 {
    tol * (1.0 + m.norm().powi(2))
}

/// Damped Gauss-Newton from `init`; stops once the residual is below the
/// acceptance level. Returns the final point, its residual and the number of
/// iterations.
pub fn refine(init: Solution, lambda: &[C64], opts: &SolveOptions) -> Result<(Solution, f64, usize)> {
    check_lambda(&init.diagram, lambda)?;
    let mut m = init;
    let mut r = Vec::new();
    residual_vec(&m, lambda, &mut r)?;
    let mut res = moment_residual(&m, lambda)?.total;
    if r.is_empty() || m.n_params() == 0 {
        return Ok((m, res, 0));
    }
    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut p = m.to_params();
    for it in 0..opts.max_iters {
        if res <= accept_level(&m, opts.tol) {
            return Ok((m, res, it));
        }
        let j = jacobian(&m, r.len())?;
        let rv = DVector::from_column_slice(&r);
        let g = j.transpose() * &rv;
        let (rows, cols) = j.shape();
        if mu < 0.0 {
            let diag_max = (0..cols).map(|k| j.column(k).norm_squared()).fold(0.0, f64::max);
            mu = 1e-3 * diag_max.max(1e-12);
        }
        let step = if rows < cols {
            let mut a = &j * j.transpose();
            for i in 0..rows {
                a[(i, i)] += mu;
            }
            a.cholesky().map(|ch| -(j.transpose() * ch.solve(&rv)))
        } else {
            let mut a = j.transpose() * &j;
            for i in 0..cols {
                a[(i, i)] += mu;
            }
            a.cholesky().map(|ch| -ch.solve(&g))
        };
        let Some(delta) = step else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let cand: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let cm = m.with_params(&cand);
        let mut cr = Vec::new();
        residual_vec(&cm, lambda, &mut cr)?;
        let f0 = 0.5 * rv.norm_squared();
        let f1 = 0.5 * cr.iter().map(|x| x * x).sum::<f64>();
        let predicted = 0.5 * delta.dot(&(delta.scale(mu) - &g));
        let rho = if predicted > 0.0 { (f0 - f1) / predicted } else { -1.0 };
        if rho > 0.0 {
            p = cand;
            m = cm;
            r = cr;
            res = moment_residual(&m, lambda)?.total;
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
        }
        if delta.norm() <= 1e-15 * (1.0 + DVector::from_column_slice(&p).norm()) || !mu.is_finite() {
            return Ok((m, res, it + 1));
        }
    }
    Ok((m, res, opts.max_iters))
}

/// Levenberg-Marquardt from random complex Gaussian starts. Seed `seed + i`
/// drives attempt `i`; the first accepted point wins.
pub fn solve_numeric(d: &BowDiagram, lambda: &[C64], seed: u64, opts: &SolveOptions) -> Result<SolveReport> {
    check_lambda(d, lambda)?;
    let mut best = f64::INFINITY;
    for attempt in 0..=opts.retries {
        let s = seed.wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut init = Solution::random(d, &mut rng, opts.init_scale)?;
        init.seed = Some(s);
        let (m, res, iterations) = refine(init, lambda, opts)?;
        best = best.min(res);
        if res <= accept_level(&m, opts.tol) {
            let stability = stability_check(&m, opts.rank_tol);
            if stability.stable() {
                return Ok(SolveReport { solution: m, residual: res, iterations, attempts: attempt + 1, stability });
            }
        }
    }
    Err(MomentError::NoConvergence { best_residual: best, attempts: opts.retries + 1 })
}
