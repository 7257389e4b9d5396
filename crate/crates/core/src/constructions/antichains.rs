//! Antichains of copies: intervals of ℚ, their lifts to `B_n` and `C_n`,
//! and the windows `X_m` of D; with compatibility witnesses against copies.

use serde::{Deserialize, Serialize};

use crate::copies::{Columns, Programmatic, SetDescriptor};
use crate::error::{Error, Result};
use crate::rational::{rational_vec_serde, Endpoint, Rational};
use crate::structures::{Kind, Label, UhStructure, Width};

/// `I_n = ((2n−1)√2, (2n+1)√2)` for `n` in `lo..=hi`.
pub fn q_interval_antichain(lo: i64, hi: i64) -> Vec<SetDescriptor> {
    (lo..=hi)
        .map(|n| SetDescriptor::interval(Endpoint::sqrt2_multiple(2 * n - 1), Endpoint::sqrt2_multiple(2 * n + 1)))
        .collect()
}

/// `⟨A_j, ℚ, …, ℚ⟩` over `B_n`: column 0 restricted to `A_j`.
pub fn bn_antichain(base: &[SetDescriptor], n: Width) -> Result<Vec<SetDescriptor>> {
    let n = match n {
        Width::Finite(n) => n,
        Width::Omega => {
            return Err(Error::Refused(
                "B(w): its copy poset has no countable maximal antichain, since every countable antichain \
                 is extended by a diagonal element of the countable support product (see `diagonal`)"
                    .into(),
            ))
        }
    };
    Ok(base
        .iter()
        .map(|a| {
            let first = SetDescriptor::ColumnSelect { columns: Columns::Only(vec![0]), inner: Box::new(a.clone()) };
            if n == 1 {
                first
            } else {
                let rest = SetDescriptor::ColumnSelect {
                    columns: Columns::Except(vec![0]),
                    inner: Box::new(SetDescriptor::everything()),
                };
                SetDescriptor::Union(vec![first, rest])
            }
        })
        .collect())
}

/// `n × A_j` over `C_n`.
pub fn cn_lift_antichain(base: &[SetDescriptor]) -> Vec<SetDescriptor> {
    base.iter()
        .map(|a| SetDescriptor::ColumnSelect { columns: Columns::All, inner: Box::new(a.clone()) })
        .collect()
}

/// `supp(Z) = {q : (i, q) ∈ Z}` over codes below `bound`, ascending.
pub fn supp(s: &UhStructure, z: &SetDescriptor, bound: usize) -> Result<Vec<Rational>> {
    let mut out: Vec<Rational> = z
        .enumerate(s, bound)?
        .into_iter()
        .filter_map(|c| match s.label(c) {
            Label::Pair { q, .. } => Some(q),
            _ => None,
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// `X_m = {x : x < z_m, x ≰ z_{m−1}}` for `m` in `lo..=hi`.
pub fn d_antichain(s: &UhStructure, lo: i64, hi: i64) -> Result<Vec<SetDescriptor>> {
    (lo..=hi)
        .map(|m| {
            let top = s.chain_point(m)?;
            let bottom = s.chain_point(m - 1)?;
            Ok(SetDescriptor::Programmatic(Programmatic::Window { m, top, bottom }))
        })
        .collect()
}

/// A comparable pair `x < y` of a copy inside one member, with a point of
/// the copy strictly between them when the prefix has one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub member: usize,
    pub x: usize,
    pub y: usize,
    pub between: Option<usize>,
}

/// Least comparable pair of `points` (ascending codes), preferring pairs with
/// a point of `points` strictly between.
fn comparable_pair(s: &UhStructure, points: &[usize]) -> Option<(usize, usize, Option<usize>)> {
    let mut fallback = None;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let (x, y) = if s.lt(a, b) {
                (a, b)
            } else if s.lt(b, a) {
                (b, a)
            } else {
                continue;
            };
            if let Some(&m) = points.iter().find(|&&m| s.lt(x, m) && s.lt(m, y)) {
                return Some((x, y, Some(m)));
            }
            fallback.get_or_insert((x, y, None));
        }
    }
    fallback
}

/// For each member, the copy's points in it; the first member with a
/// refinement wins.
fn refine_in_members(
    s: &UhStructure,
    copy: &SetDescriptor,
    members: &[SetDescriptor],
    bound: usize,
    restrict: impl Fn(usize) -> bool,
) -> Result<Option<Refinement>> {
    let points: Vec<usize> = copy.enumerate(s, bound)?.into_iter().filter(|&c| restrict(c)).collect();
    let mut fallback = None;
    for (j, member) in members.iter().enumerate() {
        let mut inside = Vec::new();
        for &c in &points {
            if member.member(s, c)? {
                inside.push(c);
            }
        }
        if let Some((x, y, between)) = comparable_pair(s, &inside) {
            let r = Refinement { member: j, x, y, between };
            if between.is_some() {
                return Ok(Some(r));
            }
            fallback.get_or_insert(r);
        }
    }
    Ok(fallback)
}

/// Interval family on ℚ: two points of the copy in one `I_n`; the order
/// interval between them inside the copy is a common refinement.
pub fn interval_refinement(s: &UhStructure, copy: &SetDescriptor, members: &[SetDescriptor], bound: usize) -> Result<Option<Refinement>> {
    refine_in_members(s, copy, members, bound, |_| true)
}

/// Lift on `B_n`: only column 0 is restricted, so a refinement is needed
/// there alone. `None` inside `Some` means the copy avoids column 0 below
/// the bound and is already inside every member.
pub fn bn_refinement(s: &UhStructure, copy: &SetDescriptor, members: &[SetDescriptor], bound: usize) -> Result<Option<Option<Refinement>>> {
    let column0 = |c: usize| matches!(s.label(c), Label::Pair { column: 0, .. });
    if !copy.enumerate(s, bound)?.into_iter().any(column0) {
        return Ok(Some(None));
    }
    Ok(refine_in_members(s, copy, members, bound, column0)?.map(Some))
}

/// Lift on `C_n`: three rationals `q1 < q2 < q3` of `supp(Z) ∩ A_j`, each
/// with a point of the copy above it; `Y = ⋃_{q∈B} Z ∩ (n×{q})` over the
/// support between them refines both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftRefinement {
    pub member: usize,
    /// Codes of copy points over `q1 < q2 < q3`.
    pub points: Vec<usize>,
    #[serde(with = "rational_vec_serde")]
    pub support: Vec<Rational>,
}

pub fn cn_refinement(s: &UhStructure, copy: &SetDescriptor, base: &[SetDescriptor], bound: usize) -> Result<Option<LiftRefinement>> {
    let points = copy.enumerate(s, bound)?;
    for (j, a) in base.iter().enumerate() {
        let mut by_value: Vec<(Rational, usize)> = Vec::new();
        for &c in &points {
            if let Label::Pair { q, .. } = s.label(c) {
                if a.member_rational(&q)? && !by_value.iter().any(|(v, _)| *v == q) {
                    by_value.push((q, c));
                }
            }
        }
        if by_value.len() >= 3 {
            by_value.sort();
            let chosen = [by_value[0], by_value[1], by_value[2]];
            return Ok(Some(LiftRefinement {
                member: j,
                points: chosen.iter().map(|p| p.1).collect(),
                support: chosen.iter().map(|p| p.0).collect(),
            }));
        }
    }
    Ok(None)
}

/// Witness that a copy of D is compatible with some `X_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DCompat {
    pub m: i64,
    pub x: usize,
    pub y: usize,
    pub between: Option<usize>,
}

pub fn d_compat_witness(s: &UhStructure, copy: &SetDescriptor, lo: i64, hi: i64, bound: usize) -> Result<Option<DCompat>> {
    if s.kind() != Kind::D {
        return Err(Error::Unsupported("windows X_m live in D".into()));
    }
    let members = d_antichain(s, lo, hi)?;
    let bound = bound.min(s.len());
    Ok(refine_in_members(s, copy, &members, bound, |_| true)?.map(|r| DCompat {
        m: lo + r.member as i64,
        x: r.x,
        y: r.y,
        between: r.between,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::StructureSpec;

    #[test]
    fn interval_examples() {
        let iv = q_interval_antichain(0, 1);
        assert!(iv[0].member_rational(&Rational::from_integer(0)).unwrap());
        assert!(iv[0].member_rational(&Rational::from_integer(1)).unwrap());
        assert!(iv[1].member_rational(&Rational::from_integer(3)).unwrap());
        assert!(!iv[1].member_rational(&Rational::from_integer(1)).unwrap());
    }

    #[test]
    fn bn_members() {
        let s = UhStructure::build("B(2)".parse().unwrap(), 1).unwrap();
        let fam = bn_antichain(&q_interval_antichain(0, 0), Width::Finite(2)).unwrap();
        for c in 0..200 {
            let Label::Pair { column, q } = s.label(c) else { unreachable!() };
            let want = column == 1 || q * q < Rational::from_integer(2);
            assert_eq!(fam[0].member(&s, c).unwrap(), want, "code {c}");
        }
        assert!(matches!(bn_antichain(&[], Width::Omega), Err(Error::Refused(_))));
    }

    #[test]
    fn lift_support() {
        let s = UhStructure::build("C(3)".parse().unwrap(), 1).unwrap();
        let base = q_interval_antichain(0, 0);
        let fam = cn_lift_antichain(&base);
        let sup = supp(&s, &fam[0], 300).unwrap();
        assert!(sup.iter().all(|q| base[0].member_rational(q).unwrap()));
        assert!(sup.contains(&Rational::new(1, 2)));
    }

    #[test]
    fn windows_partition_and_example() {
        let s = UhStructure::build(StructureSpec::new(Kind::D), 400).unwrap();
        let xs = d_antichain(&s, -2, 2).unwrap();
        for x in 0..400 {
            let hits = xs.iter().filter(|d| d.member(&s, x).unwrap()).count();
            assert!(hits <= 1);
        }
        let z0 = s.chain_point(0).unwrap();
        let zm = s.chain_point(-1).unwrap();
        assert!(!xs[2].member(&s, z0).unwrap() && !xs[2].member(&s, zm).unwrap());
        let w = d_compat_witness(&s, &xs[2], 0, 0, 400).unwrap().unwrap();
        assert!(s.lt(w.x, w.y));
    }
}
