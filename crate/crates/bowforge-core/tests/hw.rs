mod common;

use bowforge_core::hw::{
    apply_hw, enumerate_equivalent, neighbours, normalize_gap, separate, Outcome,
};
use bowforge_core::susy::susy_bound;
use bowforge_core::{decide_supersymmetry, BowDiagram, Dir, Move, NodeKind, SeparatedForm};
use proptest::prelude::*;

#[test]
fn local_rule() {
    // ○ then × with (v⁻, v, v⁺) = (0, 3, 2)
    let d = BowDiagram::parse("[ 0 o 3 x 2 x 0 ]").unwrap();
    let e = apply_hw(&d, d.id(0), d.id(1)).unwrap();
    assert_eq!(e.dims()[0], 0);
    assert_eq!(e.kind(0), NodeKind::XPoint);
    let back = apply_hw(&e, d.id(1), d.id(0)).unwrap();
    assert_eq!(back, d);

    let d = BowDiagram::parse("[ 0 o 2 x 0 ]").unwrap();
    let e = apply_hw(&d, d.id(0), d.id(1)).unwrap();
    assert_eq!(e.dims()[0], -1);
}

#[test]
fn illegal_moves() {
    let d = BowDiagram::parse("[ 0 o 1 o 2 x 1 x 0 ]").unwrap();
    assert!(apply_hw(&d, d.id(0), d.id(1)).is_err());
    assert!(apply_hw(&d, d.id(0), d.id(2)).is_err());
    // the pair around the cut
    assert!(apply_hw(&d, d.id(3), d.id(0)).is_err());
}

#[test]
fn separation() {
    let d = BowDiagram::parse("( 3 x 1 x 2 o 0 o )").unwrap();
    let Outcome::Done((_, log)) = separate(&d).unwrap() else { panic!() };
    assert!(log.is_empty());

    let d = BowDiagram::parse("( 1 x 2 o 3 x 4 o )").unwrap();
    let Outcome::Done((s, log)) = separate(&d).unwrap() else { panic!() };
    assert!(!log.is_empty());
    let r = log.replay(&d).unwrap();
    assert!(r.separated_view().is_some());
    assert_eq!(r.separated_view().unwrap(), s);

    let d = BowDiagram::parse("[ 0 o 2 x 0 ]").unwrap();
    let Outcome::Done((_, log)) = separate(&d).unwrap() else { panic!() };
    assert!(log.is_empty());
}

#[test]
fn normalization_chain() {
    // n = w = 1, v_0 = 5, v_1 = 3: gap 2 goes to 0 in two passes
    let s = SeparatedForm::from_dims(false, vec![5, 3], vec![5, 3]).unwrap();
    let Outcome::Done((t, log)) = normalize_gap(&s).unwrap() else { panic!() };
    assert_eq!(t.gap(), 0);
    assert_eq!(log.len(), 2);
    // walking e_1 forward is x_1 moving clockwise, so pass t produces cD^t
    let mut cur = s.to_diagram();
    for (i, m) in log.iter().enumerate() {
        cur = m.apply(&cur).unwrap();
        let Move::Hw { right, .. } = m else { panic!() };
        let produced = cur.dims()[cur.seg_after(cur.pos_of(*right).unwrap())];
        assert_eq!(produced, susy_bound(&s, Dir::Cw, i as u32 + 1, 1, 1).unwrap());
    }

    let s = SeparatedForm::from_dims(false, vec![5, 2], vec![5, 2]).unwrap();
    assert!(matches!(normalize_gap(&s).unwrap(), Outcome::Negative(_)));

    let s = SeparatedForm::from_dims(false, vec![2, 3, 2], vec![2, 1, 2]).unwrap();
    let Outcome::Done((t, log)) = normalize_gap(&s).unwrap() else { panic!() };
    assert_eq!(t, s);
    assert!(log.is_empty());
}

#[test]
fn increments() {
    let d = BowDiagram::parse("( 1 o 2 x 3 x )").unwrap();
    let zero = Move::IncrementX { from: d.id(1), to: d.id(2), amount: 0 };
    assert_eq!(bowforge_core::hw::apply_increment(&d, &zero).unwrap(), d);
    // the arc through the arrow: from x_2 along the list to x_1
    let m = Move::IncrementX { from: d.id(2), to: d.id(1), amount: 2 };
    let e = bowforge_core::hw::apply_increment(&d, &m).unwrap();
    assert_eq!(e.dims(), &[4, 3, 3]);
    let bad = Move::IncrementX { from: d.id(0), to: d.id(1), amount: 1 };
    assert!(bowforge_core::hw::apply_increment(&d, &bad).is_err());
    let neg = Move::IncrementX { from: d.id(2), to: d.id(1), amount: -1 };
    assert!(bowforge_core::hw::apply_increment(&d, &neg).is_err());
}

#[test]
fn bfs_examples() {
    let d = BowDiagram::parse("[ 0 o 2 x 0 ]").unwrap();
    let s0 = enumerate_equivalent(&d, 0).unwrap();
    assert_eq!(s0.members.len(), 1);
    let s1 = enumerate_equivalent(&d, 1).unwrap();
    assert_eq!(s1.min_dim, Some(-1));
}

#[test]
fn bfs_oracle_small() {
    for d in common::affine_sweep(3, 3).into_iter().chain(common::finite_sweep(4, 2)) {
        let nw = common::nw(&d);
        if nw == 0 {
            continue;
        }
        let c = decide_supersymmetry(&d).unwrap();
        if c.verdict {
            assert!(enumerate_equivalent(&d, 2 * nw).unwrap().min_dim.unwrap() >= 0, "{d}");
        } else {
            let budget = c.realization.hw_count();
            assert!(enumerate_equivalent(&d, budget).unwrap().min_dim.unwrap() < 0, "{d}");
        }
    }
}

fn arb_separated() -> impl Strategy<Value = SeparatedForm> {
    (1usize..4, 1usize..4)
        .prop_flat_map(|(n, w)| (prop::collection::vec(0i64..5, n + 1), prop::collection::vec(0i64..5, w - 1)))
        .prop_map(|(va, mid)| {
            let mut vx = vec![va[0]];
            vx.extend(mid);
            vx.push(*va.last().unwrap());
            SeparatedForm::from_dims(false, va, vx).unwrap()
        })
}

proptest! {
    /// Net clockwise crossings of x through e over a random walk.
    #[test]
    fn count_property(s in arb_separated(), picks in prop::collection::vec(0usize..64, 0..40)) {
        let mut d = s.to_diagram();
        let (x1, xw) = (s.xs[0], *s.xs.last().unwrap());
        let (e1, en) = (s.arrows[0], *s.arrows.last().unwrap());
        let (mut c1n, mut cw1) = (0i64, 0i64);
        for p in picks {
            let moves = neighbours(&d);
            let (l, r) = moves[p % moves.len()];
            // clockwise for an x-point means against the list order
            let (x, e, cw) = if d.kind_of(r).unwrap() == NodeKind::XPoint { (r, l, 1) } else { (l, r, -1) };
            if x == x1 && e == en { c1n += cw; }
            if x == xw && e == e1 { cw1 += cw; }
            d = apply_hw(&d, l, r).unwrap();
        }
        prop_assert!(c1n >= 0 || cw1 <= 0);
    }

    #[test]
    fn move_then_inverse(s in arb_separated(), p in 0usize..64) {
        let d = s.to_diagram();
        let moves = neighbours(&d);
        let (l, r) = moves[p % moves.len()];
        let e = apply_hw(&d, l, r).unwrap();
        prop_assert_eq!(apply_hw(&e, r, l).unwrap(), d);
    }

    #[test]
    fn normalization_postcondition(s in arb_separated()) {
        let (t, log) = bowforge_core::hw::normalize_gap_unchecked(&s).unwrap();
        prop_assert!(t.gap() >= 0 && t.gap() < t.w() as i64);
        let r = log.replay(&s.to_diagram()).unwrap();
        prop_assert_eq!(r.separated_view().unwrap(), t);
    }
}
