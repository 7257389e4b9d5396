//! Worked examples through the public API, one test per operation.

use uhs_core::constructions::{
    ad_separation, cs_diagonal, d_antichain, d_compat_witness, greedy_table, partition_large_copies, AdFamily,
    AdParams, CantorColumns, FiberMap,
};
use uhs_core::copies::{back_and_forth_extend, back_step, check_copy, sample_copy, SetDescriptor, Status};
use uhs_core::rational::{cantor_pair, Quad, Rational};
use uhs_core::structures::{chain_code, encode, Label, Rel};
use uhs_core::types_orbits::{condition_valid, enumerate_orbit, enumerate_orbits, orbit_member, qf_type, sap_evidence, Condition};
use uhs_core::verify::{check_ad, check_antichain, check_large, check_partition, Report};
use uhs_core::{Kind, UhStructure};

fn build(spec: &str, n: usize) -> UhStructure {
    UhStructure::build(spec.parse().unwrap(), n).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn code(s: &UhStructure, r: Rational) -> usize {
    encode(s.kind(), &Label::Rational(r)).unwrap()
}

fn passes(r: &Report) -> bool {
    r.checks.iter().all(|c| c.status == Status::Pass)
}

#[test]
fn calkin_wilf_codes_order_q() {
    let s = build("Q", 4);
    assert_eq!(s.label(3), Label::Rational(q(1, 2)));
    assert_eq!(s.label(1), Label::Rational(q(1, 1)));
    assert_eq!(s.relation(3, 1), Rel::Lt);
}

#[test]
fn c_order_ignores_columns() {
    let s = build("C(2)", 40);
    let a = encode(s.kind(), &Label::Pair { column: 0, q: q(0, 1) }).unwrap();
    let b = encode(s.kind(), &Label::Pair { column: 1, q: q(1, 2) }).unwrap();
    assert_eq!(s.relation(a, b), Rel::Lt);
}

#[test]
fn b_columns_are_incomparable() {
    let s = build("B(2)", 6);
    for a in 0..6 {
        for b in 0..6 {
            let (Label::Pair { column: ca, .. }, Label::Pair { column: cb, .. }) = (s.label(a), s.label(b)) else {
                panic!("pairs expected")
            };
            if ca != cb {
                assert_eq!(s.relation(a, b), Rel::Inc);
            }
        }
    }
}

#[test]
fn d_chain_and_betweenness() {
    let s = build("D", 400);
    let z: Vec<usize> = (-3..=3).map(|m| s.chain_point(m).unwrap()).collect();
    assert!(z.windows(2).all(|w| s.lt(w[0], w[1])));
    let (a, b) = (chain_code(0), chain_code(1));
    let c = Condition::new(vec![a], vec![b], vec![]).unwrap();
    let p = (0..s.len()).find(|&p| c.realized_by(&s, p)).expect("realizer");
    assert!(s.lt(a, p) && s.lt(p, b));
    let ty = qf_type(&s, &[a, b], p).unwrap();
    assert_eq!((ty.below.clone(), ty.above.clone()), (vec![a], vec![b]));
}

#[test]
fn types_and_orbits() {
    let s = build("Q", 64);
    let (zero, one, half) = (code(&s, q(0, 1)), code(&s, q(1, 1)), code(&s, q(1, 2)));
    let ty = qf_type(&s, &[zero, one], half).unwrap();
    assert_eq!((ty.below, ty.above), (vec![zero], vec![one]));
    let two = code(&s, q(2, 1));
    let minus = code(&s, q(-1, 1));
    assert!(orbit_member(&s, &[zero], one, two).unwrap());
    assert!(!orbit_member(&s, &[zero], one, minus).unwrap());
    let positive: Vec<usize> = (1..64).filter(|&c| matches!(s.label(c), Label::Rational(r) if r > q(0, 1))).collect();
    assert_eq!(enumerate_orbit(&s, &[zero], one, 64).unwrap(), positive);

    let a = build("A_omega", 6);
    assert_eq!(enumerate_orbit(&a, &[0, 1], 2, 6).unwrap(), vec![2, 3, 4, 5]);
    assert!(qf_type(&a, &[0, 1], 1).is_err());

    let d = build("D", 200);
    assert!(orbit_member(&d, &[], 5, 17).unwrap());
    let over_z0: Vec<_> = enumerate_orbits(&d, 200).take(400).filter(|o| o.base() == [chain_code(0)]).collect();
    assert_eq!(over_z0.len(), 3);

    let p = build("Q_plus_point", 50);
    let looped = (0..50).find(|&x| p.has_loop(x)).unwrap();
    assert_eq!(enumerate_orbit(&p, &[], looped, 50).unwrap(), vec![looped]);
}

#[test]
fn conditions_validity() {
    let d = build("D", 300);
    let (a, b) = (chain_code(0), chain_code(1));
    assert!(condition_valid(&d, &Condition::new(vec![a], vec![b], vec![]).unwrap()).unwrap());
    let inc = (0..300).find(|&x| d.relation(a, x) == Rel::Inc && x != a).unwrap();
    assert!(!condition_valid(&d, &Condition::new(vec![a], vec![inc], vec![]).unwrap()).unwrap());
    let qs = build("Q", 50);
    let c = Condition::new(vec![], vec![], vec![3]).unwrap();
    assert!(condition_valid(&qs, &c).unwrap());
    assert!((0..50).all(|p| !c.realized_by(&qs, p)));
    assert!(Condition::new(vec![1], vec![1], vec![]).is_err());
}

#[test]
fn sap_evidence_separates_the_control() {
    assert!(passes(&sap_evidence(&build("Q", 500), 6, 500).unwrap()));
    assert!(passes(&sap_evidence(&build("D", 2000), 6, 2000).unwrap()));
    let r = sap_evidence(&build("Q_plus_point", 500), 6, 500).unwrap();
    assert!(r.checks.iter().any(|c| c.status == Status::Fail));
}

#[test]
fn copy_checks() {
    let a = build("A_omega", 300);
    let evens = SetDescriptor::named("evens").unwrap();
    assert_eq!(check_copy(&a, &evens, 2, 200, 300).unwrap().status, Status::Pass);

    let s = build("Q", 5000);
    let ints = SetDescriptor::named("integers").unwrap();
    let v = check_copy(&s, &ints, 2, 200, 5000).unwrap();
    assert_eq!(v.status, Status::Fail);
    let dy = SetDescriptor::named("dyadics").unwrap();
    assert_eq!(check_copy(&s, &dy, 2, 200, 5000).unwrap().status, Status::Pass);
}

#[test]
fn back_and_forth_on_q() {
    let s = build("Q", 2000);
    let dy = SetDescriptor::named("dyadics").unwrap();
    let e = back_and_forth_extend(&s, &dy, &[(0, 0)], 6, 2000).unwrap();
    assert!(e.failure.is_none());
    assert_eq!(e.pairs.len(), 7);

    let ints = SetDescriptor::named("integers").unwrap();
    let (zero, one) = (code(&s, q(0, 1)), code(&s, q(1, 1)));
    let half = code(&s, q(1, 2));
    let out = back_step(&s, &ints, &[(zero, zero), (one, one)], half, 2000).unwrap();
    assert_eq!(out, Err("no orbit representative in A".to_string()));
}

#[test]
fn sampler_examples() {
    let s = build("Q", 300);
    let one = sample_copy(&s, 1, 300).unwrap();
    let two = sample_copy(&s, 2, 300).unwrap();
    assert_ne!(one.enumerate(&s, 300).unwrap(), two.enumerate(&s, 300).unwrap());
    assert_eq!(check_copy(&s, &one, 2, 100, 300).unwrap().status, Status::Pass);
}

#[test]
fn greedy_evens_odds() {
    let s = build("A_omega", 20);
    let orbits = vec![SetDescriptor::named("evens").unwrap(), SetDescriptor::named("odds").unwrap()];
    let t = greedy_table(&s, orbits, 3, 20).unwrap();
    let got: Vec<Option<usize>> = [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2)].iter().map(|&(n, k)| t.get(n, k)).collect();
    assert_eq!(got, vec![Some(0), Some(2), Some(1), Some(4), Some(3)]);
}

#[test]
fn partition_checks() {
    let a = build("A_omega", 200);
    let p = partition_large_copies(&a, 2, 1, 200).unwrap();
    assert!(check_partition(&a, &p.pieces, p.cover_bound).unwrap().status == Status::Pass);

    let shared = vec![SetDescriptor::explicit([0, 1]), SetDescriptor::explicit([1, 2])];
    assert_eq!(check_partition(&a, &shared, 3).unwrap().status, Status::Fail);
    assert_eq!(check_partition(&a, &[SetDescriptor::everything()], 200).unwrap().status, Status::Pass);
}

#[test]
fn largeness() {
    let d = build("D", 2000);
    assert_eq!(check_large(&d, &SetDescriptor::everything(), 8, 3, 2000).unwrap().status, Status::Pass);
    let o5 = enumerate_orbits(&d, 2000).nth(5).unwrap().descriptor();
    assert_eq!(check_large(&d, &o5, 8, 3, 2000).unwrap().status, Status::Fail);
}

#[test]
fn almost_disjoint_examples() {
    let s = build("Q", 1);
    let mut fam = AdFamily::new(&s, 4, 1 << 20).unwrap();
    let r2 = Quad::sqrt2_multiple(1);
    let one_r2 = Quad::new(q(1, 1), q(1, 1));
    let member = |fam: &mut AdFamily, t: Quad| {
        fam.member(AdParams { target: t, n_d: 4, fiber: FiberMap::RoundRobin }, 24).unwrap()
    };
    let members: Vec<_> = [r2, one_r2, Quad::new(q(2, 1), q(-1, 1)), Quad::new(q(-1, 1), q(1, 1)), Quad::new(q(1, 2), q(1, 1))]
        .into_iter()
        .map(|t| member(&mut fam, t))
        .collect();
    assert!(passes(&check_ad(&members, 12, q(1, 12), 3)));

    let sep = ad_separation(&members, 0, 1).unwrap();
    assert_eq!(sep.rational, q(2, 1));

    let dup = vec![member(&mut fam, r2), member(&mut fam, r2)];
    let r = check_ad(&dup, 12, q(1, 12), 3);
    assert!(r.checks.iter().any(|c| c.status == Status::Fail));
}

#[test]
fn finite_intersection_in_a_omega() {
    let a = build("A_omega", 300);
    let odds_and_zero =
        SetDescriptor::Union(vec![SetDescriptor::named("odds").unwrap(), SetDescriptor::explicit([0])]);
    let r = check_antichain(&a, &[SetDescriptor::named("evens").unwrap(), odds_and_zero], 300).unwrap();
    assert!(passes(&r));
}

#[test]
fn diagonal_on_cantor_columns() {
    let d = cs_diagonal(&CantorColumns, 6).unwrap();
    let heads: Vec<u64> = (0..6).map(|n| cantor_pair(n, 0).unwrap()).collect();
    assert_eq!(d.indices, heads);
}

#[test]
fn windows_and_compatibility() {
    let s = build("D", 3000);
    let windows = d_antichain(&s, -2, 2).unwrap();
    assert!(passes(&check_antichain(&s, &windows, s.len()).unwrap()));
    let (zm, zm1) = (s.chain_point(0).unwrap(), s.chain_point(-1).unwrap());
    assert!(!windows[2].member(&s, zm).unwrap() && !windows[2].member(&s, zm1).unwrap());

    let c = d_compat_witness(&s, &windows[2], -2, 2, s.len()).unwrap().expect("pair in X_0");
    assert_eq!(c.m, 0);
    let copy = sample_copy(&s, 3, 300).unwrap();
    let w = d_compat_witness(&s, &copy, -4, 4, s.len()).unwrap().expect("witness");
    let bottom = s.chain_point(w.m - 1).unwrap();
    assert!(s.lt(w.x, w.y) && !s.le(w.x, bottom) && !s.le(w.y, bottom));
    assert_eq!(s.kind(), Kind::D);
}
