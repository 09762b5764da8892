mod common;

use bowforge_core::weights::{
    balanced_form, dominance_ge, finite_candidates, finite_kappa_ok, greedy_finite_tkappa, gyd_membership,
    separated_triple, stratum_check, stratum_for_diagram, transpose_gyd, AffineWeight, StratumMode,
};
use bowforge_core::{decide_supersymmetry, hw, BowDiagram, NodeKind, SeparatedForm};
use proptest::prelude::*;

fn conjugate(p: &[i64], n: i64) -> Vec<i64> {
    (1..=n).map(|s| p.iter().filter(|&&x| x >= s).count() as i64).collect()
}

/// Materializes the Maya grid over a window of blocks, transposes each block
/// and reads the rows back off the transposed colouring.
fn maya_transpose(values: &[i64], n: i64) -> Vec<i64> {
    let w = values.len() as i64;
    let lo = (values.iter().min().unwrap() - 1).div_euclid(n) - 2;
    let hi = (values.iter().max().unwrap()).div_euclid(n) + 2;
    let grey = |b: i64, i: i64, s: i64| n * b + s <= values[(i - 1) as usize];
    (1..=n)
        .map(|s| {
            let mut top = None;
            for b in lo..=hi {
                for i in 1..=w {
                    if grey(b, i, s) {
                        top = Some(w * b + i);
                    }
                }
            }
            let t = top.expect("window too small");
            for b in lo..=hi {
                for i in 1..=w {
                    assert_eq!(grey(b, i, s), w * b + i <= t, "not a Maya row");
                }
            }
            t
        })
        .collect()
}

#[test]
fn gyd_examples() {
    assert!(gyd_membership(&[4, 1], 3));
    assert!(!gyd_membership(&[1, 4], 3));
    assert!(!gyd_membership(&[4, 0], 3));
    assert_eq!(transpose_gyd(&[4, 1], 3).unwrap(), vec![3, 1, 1]);
    assert_eq!(transpose_gyd(&[3, 1, 1], 2).unwrap(), vec![4, 1]);
    assert_eq!(transpose_gyd(&[0, 0, 0], 2).unwrap(), vec![0, 0]);
    assert!(transpose_gyd(&[1, 4], 3).is_err());
    assert_eq!(maya_transpose(&[4, 1], 3), vec![3, 1, 1]);
}

#[test]
fn triple_of_three_two() {
    let d = BowDiagram::parse("[ 0 o 3 x 2 x 0 ]").unwrap();
    let s = d.separated_view().unwrap();
    let t = separated_triple(&s);
    assert_eq!(t.tl, vec![3]);
    assert_eq!(t.mu, vec![1, 2]);
    assert_eq!(t.v, 0);
    let c = SeparatedForm::from_dims(false, vec![2, 2, 2], vec![2, 2]).unwrap();
    let t = separated_triple(&c);
    assert_eq!((t.tl, t.mu, t.v), (vec![0, 0], vec![0], 2));
}

#[test]
fn dominance_examples() {
    let w = |v: &[i64]| AffineWeight { values: v.to_vec(), level: 2, dpair: 0 };
    assert!(dominance_ge(&w(&[2, 0]), &w(&[1, 1])).unwrap());
    assert!(!dominance_ge(&w(&[1, 1]), &w(&[2, 0])).unwrap());
    assert!(dominance_ge(&w(&[1, 1]), &w(&[1, 1])).unwrap());
    let other_level = AffineWeight { values: vec![1, 1], level: 3, dpair: 0 };
    assert!(!dominance_ge(&other_level, &w(&[1, 1])).unwrap());
    assert!(dominance_ge(&w(&[1]), &w(&[1, 0])).is_err());
}

#[test]
fn balanced_forms() {
    // already balanced
    let s = SeparatedForm::from_dims(false, vec![3, 3], vec![3, 1, 3]).unwrap();
    let b = balanced_form(&s).unwrap().unwrap();
    assert_eq!(b.diagram, s.to_diagram());
    assert_eq!(b.lambda.values, vec![0, 0]);
    assert_eq!(b.mu.values, vec![2, -2]);
    assert_eq!(b.lambda.dpair, 3);
    // tλ outside the generalized Young diagrams
    let s = SeparatedForm::from_dims(false, vec![0, 1, 0], vec![0, 0]).unwrap();
    assert!(balanced_form(&s).unwrap().is_none());
}

#[test]
fn balanced_form_is_unique_and_matches_dominance() {
    for d in common::affine_sweep(4, 3) {
        let (s, _) = hw::separate_unchecked(&d).unwrap();
        if s.n() == 0 || s.w() == 0 {
            continue;
        }
        let Some(b) = balanced_form(&s).unwrap() else { continue };
        let dd = &b.diagram;
        for i in 0..dd.len() {
            if dd.kind(i) == NodeKind::Arrow {
                assert_eq!(dd.dims()[dd.seg_before(i)], dd.dims()[i], "{d}");
            }
        }
        // a normalized partner reaches the same balanced diagram
        let (norm, _) = hw::normalize_gap_unchecked(&s).unwrap();
        let b2 = balanced_form(&norm).unwrap().unwrap();
        assert_eq!(hw::canonical_encoding(&b.diagram), hw::canonical_encoding(&b2.diagram), "{d}");
        let nonneg = dd.min_dim().unwrap() >= 0;
        assert_eq!(nonneg, decide_supersymmetry(dd).unwrap().verdict, "{d}");
        assert_eq!(nonneg, dominance_ge(&b.lambda, &b.mu).unwrap(), "{d}: {b:?}");
    }
}

#[test]
fn zero_dims_give_zero_kappa() {
    let s = SeparatedForm::from_dims(true, vec![0, 0], vec![0, 0, 0]).unwrap();
    let k = stratum_check(&s, StratumMode::Finite).unwrap().unwrap();
    assert_eq!(k.values, vec![0, 0]);
    let s = SeparatedForm::from_dims(false, vec![0, 0], vec![0, 0, 0]).unwrap();
    let k = stratum_check(&s, StratumMode::Affine).unwrap().unwrap();
    assert_eq!(k.values, vec![0, 0]);
}

#[test]
fn greedy_kappa_is_minimal() {
    for d in common::finite_sweep(5, 3) {
        if common::nw(&d) == 0 || d.min_dim().unwrap() < 0 {
            continue;
        }
        let (s, _) = hw::separate_unchecked(&d).unwrap();
        let Some(g) = finite_kappa_ok(&s, &greedy_finite_tkappa(&s)).unwrap() else { continue };
        for tk in finite_candidates(s.n(), s.w() as i64, s.v(0)) {
            if let Some(k) = finite_kappa_ok(&s, &tk).unwrap() {
                let g = AffineWeight { dpair: 0, ..g.clone() };
                assert!(dominance_ge(&k, &g).unwrap(), "{d}: {k:?} vs {g:?}");
            }
        }
    }
}

#[test]
fn stratum_agrees_with_inequalities() {
    for d in common::affine_sweep(5, 4).into_iter().chain(common::finite_sweep(5, 4)) {
        let k = stratum_for_diagram(&d).unwrap();
        assert_eq!(k.is_some(), decide_supersymmetry(&d).unwrap().verdict, "{d}: {k:?}");
    }
}

fn arb_gyd() -> impl Strategy<Value = (Vec<i64>, i64)> {
    (1usize..6, 0i64..6, -8i64..8).prop_flat_map(|(w, n, top)| {
        (prop::collection::vec(0..=n, w), Just(n), Just(top))
    }).prop_map(|(mut drops, n, top)| {
        drops.sort();
        (drops.into_iter().map(|x| top - x).collect(), n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn transpose_involution((g, n) in arb_gyd()) {
        prop_assume!(n > 0);
        let t = transpose_gyd(&g, n).unwrap();
        prop_assert!(gyd_membership(&t, g.len() as i64));
        prop_assert_eq!(transpose_gyd(&t, g.len() as i64).unwrap(), g.clone());
        prop_assert_eq!(t.iter().sum::<i64>(), g.iter().sum::<i64>());
        prop_assert_eq!(maya_transpose(&g, n), t);
    }

    #[test]
    fn transpose_is_conjugate_on_partitions((p, n) in (1i64..8).prop_flat_map(|n| (prop::collection::vec(0..=n, 1..6), Just(n)))) {
        let mut p = p;
        p.sort_by(|a, b| b.cmp(a));
        prop_assert_eq!(transpose_gyd(&p, n).unwrap(), conjugate(&p, n));
    }

    #[test]
    fn dominance_is_a_partial_order(a in prop::collection::vec(-3i64..4, 3), b in prop::collection::vec(-3i64..4, 3), c in prop::collection::vec(-3i64..4, 3), da in -2i64..3, db in -2i64..3, dc in -2i64..3) {
        let mk = |v: &[i64], d: i64| {
            let mut v = v.to_vec();
            let s: i64 = v.iter().sum();
            v[2] -= s;
            AffineWeight { values: v, level: 1, dpair: d }
        };
        let (x, y, z) = (mk(&a, da), mk(&b, db), mk(&c, dc));
        prop_assert!(dominance_ge(&x, &x).unwrap());
        if dominance_ge(&x, &y).unwrap() && dominance_ge(&y, &x).unwrap() {
            prop_assert_eq!(&x, &y);
        }
        if dominance_ge(&x, &y).unwrap() && dominance_ge(&y, &z).unwrap() {
            prop_assert!(dominance_ge(&x, &z).unwrap());
        }
    }
}
