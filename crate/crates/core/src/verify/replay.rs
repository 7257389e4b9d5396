//! Revalidation of report witnesses from their own data and relation queries.

use std::collections::HashMap;

use super::{Check, Report, Witness};
use crate::constructions::{family_by_name, DenseClass};
use crate::copies::{descriptor_intersect, disjointness_reason, orbit_shape, Probe, SetDescriptor, Status};
use crate::rational::dec_q_big;
use crate::structures::{Label, StructureSpec, UhStructure};
use crate::types_orbits::{condition_valid, qf_type};

type Outcome = std::result::Result<(), String>;

fn need<'a>(s: Option<&'a UhStructure>) -> std::result::Result<&'a UhStructure, String> {
    s.ok_or_else(|| "witness needs a structure but the check names none".to_string())
}

fn member(s: &UhStructure, d: &SetDescriptor, x: usize) -> std::result::Result<bool, String> {
    d.member(s, x).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Revalidates one witness. Certificates must hold; counterexamples must
/// still be counterexamples.
pub fn replay_witness(s: Option<&UhStructure>, w: &Witness) -> Outcome {
    match w {
        Witness::CopyFailure { base, x, .. } => ensure(!base.contains(x), || format!("{x} lies in the base")),
        Witness::OrbitShortfall { .. } | Witness::PosetViolation { .. } | Witness::NoEvidence { .. } => Ok(()),
        Witness::IdenticalMembers { first, second } => ensure(first != second, || "a member paired with itself".into()),
        Witness::Realized { condition, realizer, window } => {
            let s = need(s)?;
            s.check_decided(*realizer).map_err(|e| e.to_string())?;
            ensure(condition.realized_by(s, *realizer), || format!("{realizer} does not realize {condition}"))?;
            match window {
                Some(wd) => ensure(member(s, wd, *realizer)?, || format!("{realizer} outside {}", wd.summary())),
                None => Ok(()),
            }
        }
        Witness::Unrealized { condition, window } => {
            let s = need(s)?;
            ensure(condition_valid(s, condition).map_err(|e| e.to_string())?, || format!("{condition} is invalid"))?;
            for p in 0..s.len() {
                if condition.realized_by(s, p) && window.as_ref().map_or(Ok(true), |wd| member(s, wd, p))? {
                    return Err(format!("{p} realizes {condition}"));
                }
            }
            Ok(())
        }
        Witness::SharedCode { .. } | Witness::Uncovered { .. } => Ok(()),
        Witness::Cover { pieces, cover } => {
            let s = need(s)?;
            let mut owner = vec![None; *cover];
            for (i, p) in pieces.iter().enumerate() {
                for x in p.enumerate(s, *cover).map_err(|e| e.to_string())? {
                    if let Some(j) = owner[x] {
                        return Err(format!("code {x} in pieces {j} and {i}"));
                    }
                    owner[x] = Some(i);
                }
            }
            match owner.iter().position(Option::is_none) {
                Some(x) => Err(format!("code {x} uncovered")),
                None => Ok(()),
            }
        }
        Witness::OrbitHits { piece, ty, hits, needed } => {
            let s = need(s)?;
            ensure(hits.len() >= *needed, || format!("{} hits, {needed} needed", hits.len()))?;
            let mut sorted = hits.clone();
            sorted.dedup();
            ensure(sorted.len() == hits.len(), || "repeated hit".into())?;
            for &h in hits {
                ensure(ty.realized_by(s, h), || format!("{h} is not in the orbit"))?;
                ensure(member(s, piece, h)?, || format!("{h} is not in the piece"))?;
            }
            Ok(())
        }
        Witness::Disjoint { a, b, .. } => {
            let s = need(s)?;
            ensure(disjointness_reason(s, a, b).is_some(), || "no disjointness argument".into())
        }
        Witness::FiniteIntersection { a, b, codes, .. } => {
            let s = need(s)?;
            let both = descriptor_intersect(a, b);
            let exact = both.exact_finite(s).map_err(|e| e.to_string())?;
            ensure(exact.as_ref() == Some(codes), || format!("intersection is {exact:?}"))
        }
        Witness::IntersectionNotCopy { a, b, base, x, .. } => {
            let s = need(s)?;
            let both = descriptor_intersect(a, b);
            for &f in base {
                ensure(member(s, &both, f)?, || format!("{f} is outside the intersection"))?;
            }
            let ty = qf_type(s, base, *x).map_err(|e| e.to_string())?;
            let probe = orbit_shape(s, &ty, *x).map(|shape| both.probe(s, &shape));
            ensure(probe == Some(Probe::Empty), || "orbit meets the intersection".into())
        }
        Witness::AdTerms { target, values, codes, from, tolerance, .. } => {
            ensure(codes.len() == values.len(), || "codes and values differ in length".into())?;
            for (c, q) in codes.iter().zip(values) {
                ensure(dec_q_big(c).as_ref() == Some(q), || format!("code {c} does not decode to {q}"))?;
            }
            ensure(values.windows(2).all(|w| w[0] < w[1]), || "terms not increasing".into())?;
            ensure(values.iter().all(|q| target.cmp_rational(q).is_gt()), || "a term is not below the target".into())?;
            let edge = target.sub_rational(tolerance);
            ensure(values.iter().skip(*from).all(|q| edge.cmp_rational(q).is_lt()), || {
                format!("a term from index {from} is farther than {tolerance}")
            })
        }
        Witness::AdSeparated { lower_target, upper_target, rational, after, lower_values, upper_values, .. } => {
            ensure(lower_target.cmp_rational(rational).is_lt(), || "rational not above the lower target".into())?;
            ensure(upper_target.cmp_rational(rational).is_gt(), || "rational not below the upper target".into())?;
            ensure(lower_values.iter().all(|q| lower_target.cmp_rational(q).is_gt()), || {
                "a lower term is not below its target".into()
            })?;
            ensure(*after <= upper_values.len() && upper_values[*after..].iter().all(|q| q > rational), || {
                format!("an upper term from index {after} is not above {rational}")
            })?;
            let head = &upper_values[..*after];
            ensure(upper_values.iter().filter(|q| lower_values.contains(q)).all(|q| head.contains(q)), || {
                "a shared term lies past the certificate".into()
            })
        }
        Witness::FiberHits { fiber, values, needed, .. } => {
            ensure(values.len() >= *needed, || format!("{} hits, {needed} needed", values.len()))?;
            let class = DenseClass { n: *fiber };
            ensure(values.iter().all(|q| class.contains(q)), || format!("a term outside D_{fiber}"))
        }
        Witness::Refinement { member_set, copy, x, y, between, .. } => {
            let s = need(s)?;
            for &p in [x, y].into_iter().chain(between.iter()) {
                ensure(member(s, copy, p)?, || format!("{p} is not in the copy"))?;
                ensure(member(s, member_set, p)?, || format!("{p} is not in the member"))?;
            }
            ensure(s.lt(*x, *y), || format!("{x} is not below {y}"))?;
            match between {
                Some(b) => ensure(s.lt(*x, *b) && s.lt(*b, *y), || format!("{b} is not between")),
                None => Ok(()),
            }
        }
        Witness::AvoidsColumn { copy, column, .. } => {
            let s = need(s)?;
            let codes = match copy {
                SetDescriptor::Programmatic(crate::copies::Programmatic::Recorded { codes, .. }) => codes.clone(),
                _ => return Err("copy is not a recorded list".into()),
            };
            ensure(codes.iter().all(|&c| !matches!(s.label(c), Label::Pair { column: k, .. } if k == *column)), || {
                format!("the copy meets column {column}")
            })
        }
        Witness::LiftRefinement { member_set, copy, points, .. } => {
            let s = need(s)?;
            let mut values = Vec::new();
            for &p in points {
                ensure(member(s, copy, p)?, || format!("{p} is not in the copy"))?;
                let Label::Pair { q, .. } = s.label(p) else { return Err(format!("{p} is not a pair")) };
                ensure(member_set.member_rational(&q).map_err(|e| e.to_string())?, || format!("{q} is not in the member"))?;
                values.push(q);
            }
            ensure(values.len() >= 3 && values.windows(2).all(|w| w[0] < w[1]), || "support points not increasing".into())
        }
        Witness::DiagonalIndex { family, m, n, index, a_m, a_n } => {
            let fam = family_by_name(family).ok_or_else(|| format!("unknown family {family}"))?;
            ensure(fam.component(*m, *index) == *a_m && fam.component(*n, *index) == *a_n, || {
                "components differ from the generator".into()
            })?;
            ensure(*a_n != 0, || "i_n is outside the support of a^n".into())?;
            ensure(!fam.factor(*index).meet_positive(*a_m, *a_n), || "common positive lower bound".into())
        }
    }
}

/// Revalidates every witness of every check. Structures are rebuilt from
/// each check's `structure` parameter and `prefix` bound.
pub fn replay(original: &Report) -> Report {
    let mut cache: HashMap<(String, u64), UhStructure> = HashMap::new();
    let mut out = Report::new();
    for (idx, c) in original.checks.iter().enumerate() {
        let mut check = Check::new(format!("replay:{}", c.name)).param("index", idx).param("witnesses", c.witnesses.len());
        let spec = c.params.get("structure").and_then(|v| v.as_str()).map(str::to_string);
        let prefix = c.bounds.get("prefix").copied().unwrap_or(0);
        let structure = match spec {
            Some(spec) => {
                let key = (spec.clone(), prefix);
                if !cache.contains_key(&key) {
                    match spec.parse::<StructureSpec>().and_then(|sp| UhStructure::build(sp, prefix as usize)) {
                        Ok(s) => {
                            cache.insert(key.clone(), s);
                        }
                        Err(e) => {
                            check.fail(Witness::PosetViolation { message: e.to_string() });
                            out.push(check);
                            continue;
                        }
                    }
                }
                cache.get(&key)
            }
            None => None,
        };
        for w in &c.witnesses {
            if let Err(message) = replay_witness(structure, w) {
                check.fail(Witness::PosetViolation { message });
                break;
            }
        }
        if c.status == Status::Pass && check.status == Status::Pass && c.witnesses.is_empty() {
            check = check.param("note", "pass without certificates; nothing to revalidate");
        }
        out.push(check);
    }
    out
}
