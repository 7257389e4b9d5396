use std::collections::BTreeSet;

use super::{Check, Report, Witness};
use crate::constructions::{
    ad_separation, bn_refinement, cn_refinement, d_antichain, d_compat_witness, interval_refinement, AdMember,
    DenseClass,
};
use crate::copies::{check_copy, descriptor_intersect, disjointness_reason, sample_copy, SetDescriptor, Status};
use crate::error::Result;
use crate::rational::Rational;
use crate::structures::{Kind, UhStructure};
use crate::types_orbits::{condition_valid, enumerate_orbits, Condition, ROLE_G, ROLE_L, ROLE_U};

fn structure_check(name: &str, s: &UhStructure) -> Check {
    Check::new(name).param("structure", s.spec().to_string()).bound("prefix", s.len())
}

/// Exhaustive strict partial order check of the materialized prefix.
pub fn check_poset(s: &UhStructure) -> Check {
    let mut c = structure_check("poset_axioms", s);
    if s.kind() == Kind::QPlusPoint {
        c.unknown(vec![Witness::PosetViolation { message: "the extra point is reflexive; excluded".into() }]);
        return c;
    }
    if let Err(message) = s.check_poset_axioms() {
        c.fail(Witness::PosetViolation { message });
    }
    c
}

/// Conditions over `codes` with at most `max_size` entries, by size then
/// code set then roles.
pub(crate) fn small_conditions(codes: &[usize], max_size: usize) -> Vec<Condition> {
    let mut out = Vec::new();
    let n = codes.len();
    for size in 0..=max_size.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let chosen: Vec<usize> = idx.iter().map(|&i| codes[i]).collect();
            let mut roles = vec![ROLE_L; size];
            loop {
                out.push(Condition::from_roles(&chosen, &roles));
                let mut p = size;
                while p > 0 && roles[p - 1] == ROLE_U {
                    roles[p - 1] = ROLE_L;
                    p -= 1;
                }
                if p == 0 {
                    break;
                }
                roles[p - 1] = if roles[p - 1] == ROLE_L { ROLE_G } else { ROLE_U };
            }
            // next combination
            let mut p = size;
            while p > 0 && idx[p - 1] == n - size + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    for c in &mut out {
        c.normalize();
    }
    out
}

/// Every valid condition over the first `first` codes of D with at most
/// `max_size` entries has a realizer in the prefix.
pub fn check_genericity(s: &UhStructure, first: usize, max_size: usize) -> Result<Check> {
    let mut check = structure_check("genericity", s).param("first", first).param("max_size", max_size);
    let d = s.random_poset().ok_or_else(|| crate::error::Error::Unsupported("genericity concerns D".into()))?;
    let codes: Vec<usize> = (0..first).collect();
    let mut fresh = 0;
    let mut earlier = 0;
    let mut unscheduled = 0;
    for c in small_conditions(&codes, max_size) {
        if !condition_valid(s, &c)? {
            continue;
        }
        let realizer = match d.fresh_realizer(&c) {
            Some(r) => {
                fresh += 1;
                Some(r)
            }
            None if d.canonical_passed(&c) => {
                earlier += 1;
                d.first_realizer(&c)
            }
            None => {
                unscheduled += 1;
                d.first_realizer(&c)
            }
        };
        match realizer {
            Some(r) => check.certify(Witness::Realized { condition: c, realizer: r, window: None }),
            None => check.fail(Witness::Unrealized { condition: c, window: None }),
        }
    }
    if unscheduled > 0 {
        check.unknown(Vec::new());
    }
    Ok(check.param("fresh_realizers", fresh).param("already_realized", earlier).param("unscheduled", unscheduled))
}

/// Windows `X_m` of D: pairwise disjoint on the prefix, and every valid
/// condition over members among the first `first` codes with at most
/// `max_size` entries is realized inside the same window.
pub fn check_windows(s: &UhStructure, lo: i64, hi: i64, first: usize, max_size: usize) -> Result<Report> {
    let windows = d_antichain(s, lo, hi)?;
    let mut report = Report::new();
    let mut disjoint = structure_check("windows_disjoint", s).param("m_range", (lo, hi));
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); windows.len()];
    for x in 0..s.len() {
        let mut owner = None;
        for (i, w) in windows.iter().enumerate() {
            if w.member(s, x)? {
                if let Some(j) = owner {
                    disjoint.fail(Witness::SharedCode { code: x, first: j, second: i });
                }
                owner = Some(i);
                members[i].push(x);
            }
        }
    }
    disjoint = disjoint.param("members", members.iter().map(Vec::len).collect::<Vec<_>>());
    report.push(disjoint);
    for (i, w) in windows.iter().enumerate() {
        let m = lo + i as i64;
        let local: Vec<usize> = members[i].iter().copied().filter(|&x| x < first).collect();
        let mut check = structure_check("window_realization", s)
            .param("m", m)
            .param("members_below_first", local.clone())
            .bound("first", first)
            .param("max_size", max_size);
        for c in small_conditions(&local, max_size) {
            if !condition_valid(s, &c)? {
                continue;
            }
            let found = members[i].iter().copied().find(|&p| c.realized_by(s, p));
            match found {
                Some(p) => check.certify(Witness::Realized { condition: c, realizer: p, window: Some(w.clone()) }),
                None => check.fail(Witness::Unrealized { condition: c, window: Some(w.clone()) }),
            }
        }
        report.push(check);
    }
    Ok(report)
}

/// Pairwise incompatibility certificates: descriptor-level disjointness,
/// an exactly finite intersection, or a closed-form copy failure of the
/// intersection.
pub fn check_antichain(s: &UhStructure, members: &[SetDescriptor], bound: usize) -> Result<Report> {
    let mut report = Report::new();
    let x_bound = bound.min(60);
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let (a, b) = (&members[i], &members[j]);
            let mut check = structure_check("incompatible", s).param("pair", (i, j)).bound("bound", bound);
            if let Some(reason) = disjointness_reason(s, a, b) {
                check.certify(Witness::Disjoint { first: i, second: j, a: a.clone(), b: b.clone(), reason });
                report.push(check);
                continue;
            }
            let both = descriptor_intersect(a, b);
            if let Some(codes) = both.exact_finite(s)? {
                check.certify(Witness::FiniteIntersection { first: i, second: j, a: a.clone(), b: b.clone(), codes });
                report.push(check);
                continue;
            }
            let verdict = check_copy(s, &both, 2, x_bound, bound)?;
            match (verdict.status, verdict.witness) {
                (Status::Fail, Some(Witness::CopyFailure { base, x, .. })) => {
                    check.certify(Witness::IntersectionNotCopy { first: i, second: j, a: a.clone(), b: b.clone(), base, x })
                }
                (_, w) => check.unknown(w.into_iter().collect()),
            }
            report.push(check);
        }
    }
    Ok(report)
}

/// `|A ∩ O_n ∩ [0, bound)| ≥ per_orbit_min` for the first `rows` orbits.
pub fn check_large(s: &UhStructure, a: &SetDescriptor, rows: usize, per_orbit_min: usize, bound: usize) -> Result<Check> {
    let mut check = structure_check("large", s)
        .param("set", a.summary())
        .param("rows", rows)
        .param("per_orbit_min", per_orbit_min)
        .bound("bound", bound);
    let points = a.enumerate(s, bound)?;
    for (n, o) in enumerate_orbits(s, bound).take(rows).enumerate() {
        let hits: Vec<usize> = points.iter().copied().filter(|&y| o.contains(s, y)).take(per_orbit_min).collect();
        if hits.len() >= per_orbit_min {
            check.certify(Witness::OrbitHits { piece: a.clone(), ty: o.ty, hits, needed: per_orbit_min });
        } else {
            check.fail(Witness::OrbitShortfall { orbit: n, ty: o.ty, found: hits.len(), needed: per_orbit_min });
        }
    }
    Ok(check)
}

/// Pieces pairwise disjoint and covering `[0, cover_bound)`.
pub fn check_partition(s: &UhStructure, pieces: &[SetDescriptor], cover_bound: usize) -> Result<Check> {
    let mut check = structure_check("partition", s).param("pieces", pieces.len()).bound("cover_bound", cover_bound);
    let sets: Vec<BTreeSet<usize>> =
        pieces.iter().map(|p| p.enumerate(s, cover_bound).map(BTreeSet::from_iter)).collect::<Result<_>>()?;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if let Some(&code) = sets[i].intersection(&sets[j]).next() {
                check.fail(Witness::SharedCode { code, first: i, second: j });
            }
        }
    }
    if let Some(code) = (0..cover_bound).find(|x| sets.iter().all(|p| !p.contains(x))) {
        check.fail(Witness::Uncovered { code });
    }
    if check.status == Status::Pass {
        check.certify(Witness::Cover { pieces: pieces.to_vec(), cover: cover_bound });
    }
    Ok(check)
}

/// Almost disjointness with separating certificates, convergence from index
/// `from` within `tolerance`, and at least `per_fiber` terms in each `D_n`.
pub fn check_ad(members: &[AdMember], from: usize, tolerance: Rational, per_fiber: usize) -> Report {
    let mut report = Report::new();
    for (i, m) in members.iter().enumerate() {
        let mut check = Check::new("ad_sequence").param("member", i).param("target", m.params.target.to_string());
        let values: Vec<Rational> = m.terms.iter().map(|t| t.value).collect();
        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let below = values.iter().all(|q| m.params.target.cmp_rational(q).is_gt());
        let close = values
            .iter()
            .skip(from)
            .all(|q| m.params.target.sub_rational(&tolerance).cmp_rational(q).is_lt());
        let w = Witness::AdTerms { member: i, target: m.params.target, values, codes: m.codes(), from, tolerance };
        if increasing && below && close {
            check.certify(w);
        } else {
            check.fail(w);
        }
        for fiber in 0..m.params.n_d {
            let values: Vec<Rational> = m.terms.iter().filter(|t| t.fiber == fiber).map(|t| t.value).collect();
            let ok = values.len() >= per_fiber && values.iter().all(|q| DenseClass { n: fiber }.contains(q));
            let w = Witness::FiberHits { member: i, fiber, values, needed: per_fiber };
            if ok {
                check.certify(w);
            } else {
                check.fail(w);
            }
        }
        report.push(check);
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let mut check = Check::new("ad_pair").param("pair", (i, j));
            if members[i].params.target == members[j].params.target {
                check.fail(Witness::IdenticalMembers { first: i, second: j });
                report.push(check);
                continue;
            }
            match ad_separation(members, i, j) {
                Some(sep) => {
                    let upper = &members[sep.upper];
                    let head: Vec<Rational> = upper.terms[..sep.after].iter().map(|t| t.value).collect();
                    let w = Witness::AdSeparated {
                        lower: sep.lower,
                        upper: sep.upper,
                        lower_target: members[sep.lower].params.target,
                        upper_target: upper.params.target,
                        rational: sep.rational,
                        after: sep.after,
                        lower_values: members[sep.lower].values(),
                        upper_values: upper.values(),
                    };
                    if sep.shared.iter().all(|c| head.contains(c)) {
                        check.certify(w);
                    } else {
                        check.fail(w);
                    }
                }
                None => check.unknown(Vec::new()),
            }
            report.push(check);
        }
    }
    report
}

/// Which antichain a maximality harness is looking at.
#[derive(Clone, Debug)]
pub enum Family {
    /// Intervals of ℚ.
    Intervals(Vec<SetDescriptor>),
    /// Lift to `B_n` of a family on ℚ.
    Bn { members: Vec<SetDescriptor>, base: Vec<SetDescriptor> },
    /// Lift to `C_n` of a family on ℚ.
    Cn { members: Vec<SetDescriptor>, base: Vec<SetDescriptor> },
    /// Windows `X_m` of D.
    Windows { lo: i64, hi: i64 },
}

/// For each seed, samples a copy and looks for a member with a common
/// refinement. Missing evidence is unknown, never a refutation.
pub fn check_maximality_evidence(
    s: &UhStructure,
    family: &Family,
    seeds: &[u64],
    sample_bound: usize,
    search_bound: usize,
) -> Result<Report> {
    let mut report = Report::new();
    for &seed in seeds {
        let copy = sample_copy(s, seed, sample_bound)?;
        let mut check = structure_check("maximality_evidence", s)
            .param("seed", seed)
            .bound("sample_bound", sample_bound)
            .bound("search_bound", search_bound);
        let missing = |reason: &str| Witness::NoEvidence { seed, reason: reason.into() };
        match family {
            Family::Intervals(members) => match interval_refinement(s, &copy, members, search_bound)? {
                Some(r) if r.between.is_some() => check.certify(Witness::Refinement {
                    seed,
                    member: r.member,
                    member_set: members[r.member].clone(),
                    copy: copy.clone(),
                    x: r.x,
                    y: r.y,
                    between: r.between,
                }),
                _ => check.unknown(vec![missing("no two comparable copy points with a third between in one member")]),
            },
            Family::Bn { members, .. } => match bn_refinement(s, &copy, members, search_bound)? {
                Some(None) => check.certify(Witness::AvoidsColumn { seed, copy: copy.clone(), column: 0 }),
                Some(Some(r)) if r.between.is_some() => check.certify(Witness::Refinement {
                    seed,
                    member: r.member,
                    member_set: members[r.member].clone(),
                    copy: copy.clone(),
                    x: r.x,
                    y: r.y,
                    between: r.between,
                }),
                _ => check.unknown(vec![missing("no refinement of column 0 inside one member")]),
            },
            Family::Cn { base, .. } => match cn_refinement(s, &copy, base, search_bound)? {
                Some(r) => check.certify(Witness::LiftRefinement {
                    seed,
                    member: r.member,
                    member_set: base[r.member].clone(),
                    copy: copy.clone(),
                    points: r.points,
                }),
                None => check.unknown(vec![missing("support of the copy meets no member in three points")]),
            },
            Family::Windows { lo, hi } => match d_compat_witness(s, &copy, *lo, *hi, search_bound)? {
                Some(w) if w.between.is_some() => {
                    let member_set = d_antichain(s, w.m, w.m)?.remove(0);
                    check.certify(Witness::Refinement {
                        seed,
                        member: (w.m - lo) as usize,
                        member_set,
                        copy: copy.clone(),
                        x: w.x,
                        y: w.y,
                        between: w.between,
                    })
                }
                _ => check.unknown(vec![missing("no comparable pair of the copy with a point between inside one window")]),
            },
        }
        report.push(check);
    }
    Ok(report)
}
