mod common;

use std::time::{Duration, Instant};

use bowforge::moment::{
    construct_solution, closed_form_solution, moment_residual, objective_and_gradient, solve_numeric, stability_check,
    MomentError, Solution, SolveOptions, C64,
};
use bowforge_core::brane::{check_ledger_susy, synthesize};
use bowforge_core::hw::{apply_hw, apply_increment, enumerate_equivalent, neighbours};
use bowforge_core::weights::{gyd_membership, stratum_for_diagram, transpose_gyd};
use bowforge_core::{decide_supersymmetry, BowDiagram, Dir, Move, NodeKind, SeparatedForm, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn seed() -> u64 {
    std::env::var("BOWFORGE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

fn parse(s: &str) -> BowDiagram {
    BowDiagram::parse(s).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sweep() -> Vec<BowDiagram> {
    common::affine_sweep(4, 3)
}

/// `cD¹` by the local HW recurrence.
fn cd1_recurrence(s: &SeparatedForm, si: usize, ki: usize) -> i64 {
    let mut t = vec![vec![0i64; s.w() + 1]; s.n() + 1];
    for a in 0..=s.n() {
        for b in 0..=s.w() {
            t[a][b] = match (a, b) {
                (_, 0) => s.v(a),
                (0, _) => s.vx(b),
                _ => t[a][b - 1] + t[a - 1][b] - t[a - 1][b - 1] + 1,
            };
        }
    }
    t[si][ki]
}

fn criterion_1() -> Outcome {
    let d = parse("[ 0 o 2 x 0 ]");
    let t = Instant::now();
    let c = decide_supersymmetry(&d).map_err(|e| e.to_string())?;
    let el = t.elapsed();
    ensure(!c.verdict, || "verdict true".into())?;
    let value = match c.witness {
        Witness::InequalityViolation { value, .. } => value,
        ref w => return Err(format!("unexpected witness {w:?}")),
    };
    ensure(value == -1, || format!("witness value {value}"))?;
    ensure(c.realization.replay(&d).unwrap().min_dim() == Some(-1), || "realization does not reach -1".into())?;
    ensure(el < Duration::from_millis(10), || format!("decision took {el:?}"))?;
    Ok(format!("witness -1 in {el:?}"))
}

fn criterion_2() -> Outcome {
    let d = parse("[ 0 o 3 x 2 x 0 ]");
    let c = decide_supersymmetry(&d).map_err(|e| e.to_string())?;
    let want = Witness::InequalityViolation { dir: Dir::Cw, t: 1, s: 1, k: 2, value: -1 };
    ensure(!c.verdict && c.witness == want, || format!("got {:?}", c.witness))?;
    let s = d.separated_view().unwrap();
    // v_{-2} + v_0 + v_0 - v_{-1} with the empty ends at 0
    let by_hand = 2 + 0 + 0 - 3;
    let rec = cd1_recurrence(&s, 1, 2);
    ensure(rec == by_hand, || format!("recurrence gives {rec}"))?;
    Ok("cD(1;1,2) = 2+0+0-3 = -1".into())
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut n = 0;
    for v1 in 0..=6 {
        for v0 in 0..=6 {
            for vm1 in 0..=6 {
                let expect = [1 + v1 + vm1 - v0, 2 + v1 - v0, 2 + vm1 - v0, 4 - v0].iter().all(|&x| x >= 0);
                let d = parse(&format!("[ 0 o {v1} o {v0} x {vm1} x 0 ]"));
                let got = decide_supersymmetry(&d).map_err(|e| e.to_string())?.verdict;
                ensure(got == expect, || format!("({v1},{v0},{vm1}): got {got}"))?;
                n += 1;
            }
        }
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(1), || format!("took {el:?}"))?;
    Ok(format!("{n} triples agree in {el:?}"))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let (mut yes, mut no) = (0, 0);
    for d in sweep() {
        let nw = common::nw(&d);
        let c = decide_supersymmetry(&d).map_err(|e| e.to_string())?;
        if c.verdict {
            let m = enumerate_equivalent(&d, 2 * nw).unwrap().min_dim.unwrap_or(0);
            ensure(m >= 0, || format!("{d}: BFS reaches {m}"))?;
            yes += 1;
        } else {
            let m = enumerate_equivalent(&d, c.realization.hw_count()).unwrap().min_dim.unwrap_or(0);
            ensure(m < 0, || format!("{d}: BFS stays at {m}"))?;
            no += 1;
        }
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(60), || format!("took {el:?}"))?;
    Ok(format!("{yes} true, {no} false in {el:?}"))
}

fn increment_entries(d: &BowDiagram) -> Vec<Move> {
    let k = d.len();
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j || d.kind(i) != d.kind(j) {
                continue;
            }
            out.push(match d.kind(i) {
                NodeKind::Arrow => Move::IncrementArrows { from: d.id(i), to: d.id(j), amount: 1 },
                NodeKind::XPoint => Move::IncrementX { from: d.id(i), to: d.id(j), amount: 1 },
            });
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let (mut moves, mut incs) = (0, 0);
    for d in sweep() {
        let v = decide_supersymmetry(&d).unwrap().verdict;
        let dual = decide_supersymmetry(&d.s_dual()).unwrap().verdict;
        ensure(v == dual, || format!("{d}: S-dual disagrees"))?;
        for (l, r) in neighbours(&d) {
            let e = apply_hw(&d, l, r).unwrap();
            ensure(v == decide_supersymmetry(&e).unwrap().verdict, || format!("{d} -> {e}"))?;
            moves += 1;
        }
        if v {
            for m in increment_entries(&d) {
                let Ok(e) = apply_increment(&d, &m) else { continue };
                ensure(decide_supersymmetry(&e).unwrap().verdict, || format!("{d} + {m:?} -> {e}"))?;
                incs += 1;
            }
        }
    }
    Ok(format!("{moves} moves, {incs} increments, no discrepancy"))
}

fn criterion_6() -> Outcome {
    let mut n = 0;
    for d in sweep().into_iter().chain(common::finite_sweep(4, 3)) {
        if !decide_supersymmetry(&d).unwrap().verdict {
            continue;
        }
        let l = synthesize(&d).map_err(|e| format!("{d}: {e}"))?;
        ensure(l.coverage().unwrap() == d.dims(), || format!("{d}: coverage {:?}", l.coverage()))?;
        ensure(check_ledger_susy(&l).unwrap().is_none(), || format!("{d}: ledger not supersymmetric"))?;
        n += 1;
    }
    for u in 0..6 {
        for g in 1..6 {
            let d = parse(&format!("( {u} o {} x )", u + g));
            if !decide_supersymmetry(&d).unwrap().verdict {
                continue;
            }
            let l = synthesize(&d).map_err(|e| e.to_string())?;
            let laps: Vec<u32> = l
                .branes
                .iter()
                .filter(|b| b.is_fixed(&l.host).unwrap() && b.dir == Dir::Acw)
                .map(|b| b.laps)
                .collect();
            for p in 0..g as u32 {
                let c = laps.iter().filter(|&&q| q == p).count();
                ensure(c == 1, || format!("{d}: winding {p} appears {c} times"))?;
            }
        }
    }
    Ok(format!("{n} ledgers, windings 0..g-1 present once each"))
}

fn conjugate(p: &[i64], n: i64) -> Vec<i64> {
    (1..=n).map(|s| p.iter().filter(|&&x| x >= s).count() as i64).collect()
}

fn criterion_7() -> Outcome {
    let t = transpose_gyd(&[4, 1], 3).map_err(|e| e.to_string())?;
    ensure(t == [3, 1, 1], || format!("[4,1] -> {t:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    for _ in 0..1000 {
        let w = rng.gen_range(1..6usize);
        let n = rng.gen_range(1..6i64);
        let top = rng.gen_range(-8..8i64);
        let mut drops: Vec<i64> = (0..w).map(|_| rng.gen_range(0..=n)).collect();
        drops.sort();
        let g: Vec<i64> = drops.iter().map(|x| top - x).collect();
        let tg = transpose_gyd(&g, n).map_err(|e| e.to_string())?;
        ensure(gyd_membership(&tg, w as i64), || format!("{g:?} -> {tg:?} not a member"))?;
        let back = transpose_gyd(&tg, w as i64).map_err(|e| e.to_string())?;
        ensure(back == g, || format!("{g:?} -> {tg:?} -> {back:?}"))?;
        if g[w - 1] >= 0 && g[0] <= n {
            ensure(tg == conjugate(&g, n), || format!("{g:?}: not the conjugate"))?;
        }
    }
    let mut n = 0;
    for d in common::affine_sweep(5, 4).into_iter().chain(common::finite_sweep(5, 4)) {
        let k = stratum_for_diagram(&d).map_err(|e| e.to_string())?;
        ensure(k.is_some() == decide_supersymmetry(&d).unwrap().verdict, || format!("{d}: {k:?}"))?;
        n += 1;
    }
    Ok(format!("1000 transposes, {n} stratum checks"))
}

fn gradient_error(d: &BowDiagram, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Solution::random(d, &mut rng, 1.0).unwrap();
    let lambda: Vec<C64> =
        (0..d.n_arrows()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let (_, g) = objective_and_gradient(&m, &lambda).unwrap();
    let f = |p: &[f64]| 0.5 * moment_residual(&m.with_params(p), &lambda).unwrap().squared();
    let p0 = m.to_params();
    let h = 1e-5;
    let fd: Vec<f64> = (0..p0.len())
        .map(|k| {
            let (mut a, mut b) = (p0.clone(), p0.clone());
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect();
    let num: f64 = g.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = fd.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-12)
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    for v1 in 0..=6 {
        for vm1 in 0..=6 {
            let m = closed_form_solution(v1, vm1).map_err(|e| e.to_string())?;
            let r = moment_residual(&m, &[]).unwrap().total;
            ensure(r <= 1e-12, || format!("closed form ({v1},{vm1}) residual {r:e}"))?;
            let st = stability_check(&m, 1e-6);
            ensure(st.stable(), || format!("closed form ({v1},{vm1}) unstable: {st:?}"))?;
        }
    }
    let opts = SolveOptions::default();
    let base = seed();
    let mut n = 0;
    for d in sweep().into_iter().chain(common::finite_sweep(4, 3)) {
        if !decide_supersymmetry(&d).unwrap().verdict {
            continue;
        }
        let r = construct_solution(&d, base + n, &opts).map_err(|e| format!("{d}: {e}"))?;
        let bound = opts.tol * (1.0 + r.solution.norm().powi(2));
        ensure(r.residual <= bound, || format!("{d}: residual {:e}", r.residual))?;
        ensure(r.stability.stable(), || format!("{d}: unstable"))?;
        ensure(r.solution.diagram == d, || format!("{d}: wrong diagram"))?;
        n += 1;
    }
    for (i, s) in ["( 2 o 1 x 3 o 2 x )", "[ 0 o 2 o 1 x 3 x 0 ]", "( 3 x 2 x 1 o )", "( 2 o 1 o 2 o )"]
        .iter()
        .enumerate()
    {
        let e = gradient_error(&parse(s), base + i as u64);
        ensure(e <= 1e-5, || format!("{s}: gradient relative error {e:e}"))?;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(600), || format!("took {el:?}"))?;
    Ok(format!("{n} constructions in {el:?}"))
}

fn criterion_9() -> Outcome {
    let d = parse("[ 0 o 2 x 0 ]");
    let opts = SolveOptions { retries: 0, ..Default::default() };
    let base = seed();
    for s in base..base + 50 {
        match solve_numeric(&d, &[], s, &opts) {
            Err(MomentError::NoConvergence { .. }) => {}
            Ok(_) => return Err(format!("seed {s} accepted")),
            Err(e) => return Err(format!("seed {s}: {e}")),
        }
    }
    Ok("50 seeds, none accepted".into())
}

fn main() {
    let criteria: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = t.elapsed();
        match r {
            Ok(msg) => println!("criterion {}: PASS ({msg}; {:.2}s)", i + 1, el.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL ({msg}; {:.2}s)", i + 1, el.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
