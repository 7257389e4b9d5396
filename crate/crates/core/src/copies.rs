//! Finitely presented subsets, the orbit-intersection copy criterion, the
//! back-and-forth engine and a seeded copy sampler.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{code_of_rational, dec_q, Endpoint, OpenInterval, Rational};
use crate::structures::{encode, Kind, Label, UhStructure, Width};
use crate::types_orbits::{enumerate_orbits, qf_type, QfType};

/// Columns of B_n / C_n selected by a descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "list", rename_all = "snake_case")]
pub enum Columns {
    All,
    Only(Vec<u64>),
    Except(Vec<u64>),
}

impl Columns {
    pub fn contains(&self, c: u64) -> bool {
        match self {
            Columns::All => true,
            Columns::Only(v) => v.contains(&c),
            Columns::Except(v) => !v.contains(&c),
        }
    }

    /// Columns selected by both.
    pub fn meet(&self, other: &Columns) -> Columns {
        match (self, other) {
            (Columns::All, c) | (c, Columns::All) => c.clone(),
            (Columns::Only(x), Columns::Only(y)) => Columns::Only(x.iter().copied().filter(|c| y.contains(c)).collect()),
            (Columns::Only(x), Columns::Except(y)) | (Columns::Except(y), Columns::Only(x)) => {
                Columns::Only(x.iter().copied().filter(|c| !y.contains(c)).collect())
            }
            (Columns::Except(x), Columns::Except(y)) => {
                let mut v: Vec<u64> = x.iter().chain(y).copied().collect();
                v.sort_unstable();
                v.dedup();
                Columns::Except(v)
            }
        }
    }

    /// Least column selected by both, among the columns of `width`.
    pub fn first_common(&self, other: &Columns, width: Width) -> Option<u64> {
        let limit = match width {
            Width::Finite(n) => n,
            Width::Omega => u64::MAX,
        };
        let candidates: Box<dyn Iterator<Item = u64>> = match (self, other) {
            (Columns::Only(v), _) | (_, Columns::Only(v)) => Box::new(v.clone().into_iter()),
            _ => Box::new(0..limit),
        };
        let mut sorted: Vec<u64> = Vec::new();
        for c in candidates.take(4096) {
            if c < limit && self.contains(c) && other.contains(c) {
                sorted.push(c);
                if !matches!((self, other), (Columns::Only(_), _) | (_, Columns::Only(_))) {
                    break;
                }
            }
        }
        sorted.into_iter().min()
    }
}

/// Named membership tests, each with a recorded or closed-form enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Programmatic {
    /// Even codes.
    Evens,
    /// Odd codes.
    Odds,
    /// Rationals that are integers.
    Integers,
    /// Rationals with a power-of-two denominator.
    Dyadics,
    /// A finite list of chosen codes, kept verbatim so that reloads are exact.
    Recorded { label: String, codes: Vec<usize> },
    /// `X_m = {x : x < z_m, x ≰ z_{m−1}}` in D; `top` and `bottom` are the
    /// codes of `z_m` and `z_{m−1}`.
    Window { m: i64, top: usize, bottom: usize },
}

/// A finitely presented subset of a structure's universe. JSON form:
/// `{"kind": ..., "args": ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum SetDescriptor {
    Explicit { codes: Vec<usize> },
    Cofinite { excluded: Vec<usize> },
    Orbit { ty: QfType },
    IntervalQ { lo: Endpoint, hi: Endpoint },
    ColumnSelect { columns: Columns, inner: Box<SetDescriptor> },
    Programmatic(Programmatic),
    Union(Vec<SetDescriptor>),
    Intersection(Vec<SetDescriptor>),
}

impl SetDescriptor {
    pub fn explicit(codes: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = codes.into_iter().collect();
        SetDescriptor::Explicit { codes: set.into_iter().collect() }
    }

    fn is_empty_explicit(&self) -> bool {
        matches!(self, SetDescriptor::Explicit { codes } if codes.is_empty())
    }

    pub fn everything() -> Self {
        SetDescriptor::Cofinite { excluded: Vec::new() }
    }

    pub fn interval(lo: Endpoint, hi: Endpoint) -> Self {
        SetDescriptor::IntervalQ { lo, hi }
    }

    pub fn recorded(label: impl Into<String>, codes: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = codes.into_iter().collect();
        SetDescriptor::Programmatic(Programmatic::Recorded { label: label.into(), codes: set.into_iter().collect() })
    }

    pub fn named(name: &str) -> Option<Self> {
        let p = match name {
            "evens" => Programmatic::Evens,
            "odds" => Programmatic::Odds,
            "integers" => Programmatic::Integers,
            "dyadics" => Programmatic::Dyadics,
            "all" => return Some(Self::everything()),
            _ => return None,
        };
        Some(SetDescriptor::Programmatic(p))
    }

    /// Short human-readable name used in error messages.
    pub fn summary(&self) -> String {
        match self {
            SetDescriptor::Explicit { codes } => format!("explicit({} codes)", codes.len()),
            SetDescriptor::Cofinite { excluded } => format!("cofinite(minus {excluded:?})"),
            SetDescriptor::Orbit { ty } => format!("orbit(over {:?})", ty.base),
            SetDescriptor::IntervalQ { lo, hi } => format!("interval({lo}, {hi})"),
            SetDescriptor::ColumnSelect { columns, inner } => format!("columns({columns:?}, {})", inner.summary()),
            SetDescriptor::Programmatic(p) => match p {
                Programmatic::Recorded { label, codes } => format!("{label}({} codes)", codes.len()),
                Programmatic::Window { m, .. } => format!("X_{m}"),
                other => format!("{other:?}").to_lowercase(),
            },
            SetDescriptor::Union(v) => format!("union of {}", v.len()),
            SetDescriptor::Intersection(v) => format!("intersection of {}", v.len()),
        }
    }

    fn undecidable(&self, code: usize) -> Error {
        Error::Undecidable { descriptor: self.summary(), code }
    }

    /// Exact membership.
    pub fn member(&self, s: &UhStructure, x: usize) -> Result<bool> {
        if !s.is_decided(x) {
            return match self {
                SetDescriptor::Explicit { codes } => Ok(codes.binary_search(&x).is_ok()),
                SetDescriptor::Cofinite { excluded } => Ok(!excluded.contains(&x)),
                SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => Ok(codes.binary_search(&x).is_ok()),
                SetDescriptor::Programmatic(Programmatic::Evens) => Ok(x % 2 == 0),
                SetDescriptor::Programmatic(Programmatic::Odds) => Ok(x % 2 == 1),
                _ => Err(self.undecidable(x)),
            };
        }
        Ok(match self {
            SetDescriptor::Explicit { codes } => codes.binary_search(&x).is_ok(),
            SetDescriptor::Cofinite { excluded } => !excluded.contains(&x),
            SetDescriptor::Orbit { ty } => ty.realized_by(s, x),
            SetDescriptor::IntervalQ { .. } => match s.label(x) {
                Label::Rational(q) => self.member_rational(&q)?,
                Label::ReflexivePoint => false,
                _ => return Err(Error::Unsupported(format!("{} needs a rational structure", self.summary()))),
            },
            SetDescriptor::ColumnSelect { columns, inner } => match s.label(x) {
                Label::Pair { column, q } => columns.contains(column) && inner.member_rational(&q)?,
                _ => return Err(Error::Unsupported(format!("{} needs a column structure", self.summary()))),
            },
            SetDescriptor::Programmatic(p) => match p {
                Programmatic::Evens => x % 2 == 0,
                Programmatic::Odds => x % 2 == 1,
                Programmatic::Integers | Programmatic::Dyadics => match s.label(x) {
                    Label::Rational(q) => self.member_rational(&q)?,
                    _ => false,
                },
                Programmatic::Recorded { codes, .. } => codes.binary_search(&x).is_ok(),
                Programmatic::Window { top, bottom, .. } => {
                    s.check_decided(*top)?;
                    s.check_decided(*bottom)?;
                    x != *bottom && s.lt(x, *top) && !s.lt(x, *bottom)
                }
            },
            SetDescriptor::Union(v) => {
                for d in v {
                    if d.member(s, x)? {
                        return Ok(true);
                    }
                }
                false
            }
            SetDescriptor::Intersection(v) => {
                for d in v {
                    if !d.member(s, x)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    /// Membership of a rational, for descriptors living on ℚ (the inner part
    /// of a column selection). Code-valued descriptors use the codes of ℚ.
    pub fn member_rational(&self, q: &Rational) -> Result<bool> {
        let code = || code_of_rational(q).map(|c| c as usize);
        Ok(match self {
            SetDescriptor::IntervalQ { lo, hi } => OpenInterval::new(*lo, *hi).contains(q),
            SetDescriptor::Programmatic(Programmatic::Integers) => q.is_integer(),
            SetDescriptor::Programmatic(Programmatic::Dyadics) => q.denom().count_ones() == 1,
            SetDescriptor::Explicit { codes } | SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => {
                code().is_some_and(|c| codes.binary_search(&c).is_ok())
            }
            SetDescriptor::Cofinite { excluded } => code().is_none_or(|c| !excluded.contains(&c)),
            SetDescriptor::Programmatic(Programmatic::Evens) => code().is_some_and(|c| c % 2 == 0),
            SetDescriptor::Programmatic(Programmatic::Odds) => code().is_some_and(|c| c % 2 == 1),
            SetDescriptor::Union(v) => {
                for d in v {
                    if d.member_rational(q)? {
                        return Ok(true);
                    }
                }
                false
            }
            SetDescriptor::Intersection(v) => {
                for d in v {
                    if !d.member_rational(q)? {
                        return Ok(false);
                    }
                }
                true
            }
            other => return Err(Error::Unsupported(format!("{} is not a subset of Q", other.summary()))),
        })
    }

    /// `{x < bound : member(x)}`, ascending.
    pub fn enumerate(&self, s: &UhStructure, bound: usize) -> Result<Vec<usize>> {
        match self {
            SetDescriptor::Explicit { codes } | SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => {
                Ok(codes.iter().copied().take_while(|&c| c < bound).collect())
            }
            _ => {
                let mut out = Vec::new();
                for x in 0..bound {
                    if self.member(s, x)? {
                        out.push(x);
                    }
                }
                Ok(out)
            }
        }
    }

    /// The code list of a descriptor that is finite as written, when it is.
    pub fn exact_finite(&self, s: &UhStructure) -> Result<Option<Vec<usize>>> {
        Ok(match self {
            SetDescriptor::Explicit { codes } | SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => {
                Some(codes.clone())
            }
            SetDescriptor::IntervalQ { lo, hi } if OpenInterval::new(*lo, *hi).is_empty() => Some(Vec::new()),
            SetDescriptor::Union(v) => {
                let mut all = BTreeSet::new();
                for d in v {
                    match d.exact_finite(s)? {
                        Some(c) => all.extend(c),
                        None => return Ok(None),
                    }
                }
                Some(all.into_iter().collect())
            }
            SetDescriptor::Intersection(v) => {
                if provably_disjoint_family(s, v) {
                    return Ok(Some(Vec::new()));
                }
                let mut finite = None;
                for d in v {
                    if let Some(c) = d.exact_finite(s)? {
                        finite = Some(c);
                        break;
                    }
                }
                match finite {
                    None => None,
                    Some(codes) => {
                        let mut kept = Vec::new();
                        for c in codes {
                            let mut all = true;
                            for d in v {
                                if !d.member(s, c)? {
                                    all = false;
                                    break;
                                }
                            }
                            if all {
                                kept.push(c);
                            }
                        }
                        Some(kept)
                    }
                }
            }
            _ => None,
        })
    }
}

/// Two members of the list are disjoint by a descriptor-level argument.
fn provably_disjoint_family(s: &UhStructure, v: &[SetDescriptor]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[i + 1..].iter().any(|b| disjointness_reason(s, a, b).is_some()))
}

/// A descriptor-level proof that `a ∩ b = ∅`, as prose.
pub fn disjointness_reason(s: &UhStructure, a: &SetDescriptor, b: &SetDescriptor) -> Option<String> {
    use Programmatic::{Evens, Odds, Window};
    use SetDescriptor::{ColumnSelect, IntervalQ, Union};
    use SetDescriptor::Programmatic as P;
    match (a, b) {
        (IntervalQ { lo: l1, hi: h1 }, IntervalQ { lo: l2, hi: h2 }) => {
            if h1.cmp_endpoint(l2) != std::cmp::Ordering::Greater {
                Some(format!("{h1} <= {l2}"))
            } else if h2.cmp_endpoint(l1) != std::cmp::Ordering::Greater {
                Some(format!("{h2} <= {l1}"))
            } else {
                None
            }
        }
        (P(Evens), P(Odds)) | (P(Odds), P(Evens)) => {
            Some("parity".to_string())
        }
        (ColumnSelect { columns: c1, inner: i1 }, ColumnSelect { columns: c2, inner: i2 }) => {
            let column_disjoint = match (c1, c2) {
                (Columns::Only(x), Columns::Only(y)) => x.iter().all(|c| !y.contains(c)),
                (Columns::Only(x), Columns::Except(y)) | (Columns::Except(y), Columns::Only(x)) => {
                    x.iter().all(|c| y.contains(c))
                }
                _ => false,
            };
            if column_disjoint {
                return Some("disjoint column sets".to_string());
            }
            disjointness_reason(s, i1, i2).map(|r| format!("rational parts disjoint: {r}"))
        }
        (P(Window { m: m1, top: t1, .. }), P(Window { m: m2, bottom: b2, .. })) if m1 < m2 => {
            // x < z_{m1} ≤ z_{m2−1} would contradict x ≰ z_{m2−1}
            (t1 == b2 || s.is_decided(*t1) && s.is_decided(*b2) && s.lt(*t1, *b2))
                .then(|| format!("z_{m1} <= z_{}", m2 - 1))
        }
        (P(Window { m: m1, .. }), P(Window { m: m2, .. })) if m1 > m2 => {
            disjointness_reason(s, b, a)
        }
        (Union(v), other) | (other, Union(v)) => {
            let reasons: Option<Vec<String>> = v.iter().map(|d| disjointness_reason(s, d, other)).collect();
            reasons.map(|r| format!("each part: [{}]", r.join("; ")))
        }
        _ => None,
    }
}

/// Intersection with nested unions distributed and nested intersections
/// flattened; intervals are merged.
pub fn descriptor_intersect(a: &SetDescriptor, b: &SetDescriptor) -> SetDescriptor {
    match (a, b) {
        (SetDescriptor::Union(v), other) | (other, SetDescriptor::Union(v)) => {
            let mut parts: Vec<SetDescriptor> =
                v.iter().map(|d| descriptor_intersect(d, other)).filter(|d| !d.is_empty_explicit()).collect();
            match parts.len() {
                0 => SetDescriptor::Explicit { codes: Vec::new() },
                1 => parts.pop().expect("one part"),
                _ => SetDescriptor::Union(parts),
            }
        }
        (SetDescriptor::Cofinite { excluded }, other) | (other, SetDescriptor::Cofinite { excluded })
            if excluded.is_empty() =>
        {
            other.clone()
        }
        (
            SetDescriptor::ColumnSelect { columns: c1, inner: i1 },
            SetDescriptor::ColumnSelect { columns: c2, inner: i2 },
        ) => {
            let columns = c1.meet(c2);
            let inner = descriptor_intersect(i1, i2);
            if matches!(&columns, Columns::Only(v) if v.is_empty()) || inner.is_empty_explicit() {
                SetDescriptor::Explicit { codes: Vec::new() }
            } else {
                SetDescriptor::ColumnSelect { columns, inner: Box::new(inner) }
            }
        }
        (SetDescriptor::IntervalQ { lo: l1, hi: h1 }, SetDescriptor::IntervalQ { lo: l2, hi: h2 }) => {
            let iv = OpenInterval::new(*l1, *h1).intersect(&OpenInterval::new(*l2, *h2));
            if iv.is_empty() {
                SetDescriptor::Explicit { codes: Vec::new() }
            } else {
                SetDescriptor::IntervalQ { lo: iv.lo, hi: iv.hi }
            }
        }
        _ => {
            let mut parts = Vec::new();
            for d in [a, b] {
                match d {
                    SetDescriptor::Intersection(v) => parts.extend(v.iter().cloned()),
                    other => parts.push(other.clone()),
                }
            }
            SetDescriptor::Intersection(parts)
        }
    }
}

pub fn descriptor_member(s: &UhStructure, a: &SetDescriptor, x: usize) -> Result<bool> {
    a.member(s, x)
}

pub fn descriptor_enumerate(s: &UhStructure, a: &SetDescriptor, bound: usize) -> Result<Vec<usize>> {
    a.enumerate(s, bound)
}

// ---------------------------------------------------------------------------
// Closed-form orbit shapes

/// The orbit of an element over a finite set, in closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Every code except the listed ones (A_ω).
    Codes { excluded: Vec<usize> },
    /// Rationals of an open interval, in the given columns if the structure
    /// has columns.
    Line { columns: Option<Columns>, iv: OpenInterval },
    /// A single rational value across the given columns (C_n).
    Points { columns: Columns, q: Rational },
    Single(usize),
}

/// Closed form of the orbit of `x` over `ty.base`; `None` for D.
pub fn orbit_shape(s: &UhStructure, ty: &QfType, x: usize) -> Option<Shape> {
    let rat = |c: usize| match s.label(c) {
        Label::Rational(q) => Some(q),
        Label::Pair { q, .. } => Some(q),
        _ => None,
    };
    let gap = |below: &[usize], above: &[usize]| {
        let lo = below.iter().filter_map(|&c| rat(c)).max();
        let hi = above.iter().filter_map(|&c| rat(c)).min();
        OpenInterval::new(lo.map_or(Endpoint::NegInf, Endpoint::rational), hi.map_or(Endpoint::PosInf, Endpoint::rational))
    };
    match s.kind() {
        Kind::AOmega => Some(Shape::Codes { excluded: ty.base.clone() }),
        Kind::Q => Some(Shape::Line { columns: None, iv: gap(&ty.below, &ty.above) }),
        Kind::QPlusPoint if ty.looped => Some(Shape::Single(x)),
        Kind::QPlusPoint => Some(Shape::Line { columns: None, iv: gap(&ty.below, &ty.above) }),
        Kind::B(_) => {
            let Label::Pair { column, .. } = s.label(x) else { return None };
            if ty.below.is_empty() && ty.above.is_empty() {
                let used: BTreeSet<u64> =
                    ty.base.iter().filter_map(|&f| match s.label(f) { Label::Pair { column, .. } => Some(column), _ => None }).collect();
                Some(Shape::Line { columns: Some(Columns::Except(used.into_iter().collect())), iv: OpenInterval::ALL })
            } else {
                Some(Shape::Line { columns: Some(Columns::Only(vec![column])), iv: gap(&ty.below, &ty.above) })
            }
        }
        Kind::C(_) => {
            let Label::Pair { q, .. } = s.label(x) else { return None };
            if ty.incomparable.is_empty() {
                Some(Shape::Line { columns: Some(Columns::All), iv: gap(&ty.below, &ty.above) })
            } else {
                let used: BTreeSet<u64> = ty
                    .incomparable
                    .iter()
                    .filter_map(|&f| match s.label(f) { Label::Pair { column, .. } => Some(column), _ => None })
                    .collect();
                Some(Shape::Points { columns: Columns::Except(used.into_iter().collect()), q })
            }
        }
        Kind::D => None,
    }
}

/// Result of looking for a member of a descriptor inside an orbit shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Witness(usize),
    Empty,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum QProbe {
    Witness(Rational),
    Empty,
    Unknown,
}

fn width_of(s: &UhStructure) -> Width {
    s.kind().width().unwrap_or(Width::Finite(1))
}

fn code_for(s: &UhStructure, column: Option<u64>, q: Rational) -> Option<usize> {
    let label = match (s.kind(), column) {
        (Kind::B(_) | Kind::C(_), Some(column)) => Label::Pair { column, q },
        _ => Label::Rational(q),
    };
    encode(s.kind(), &label)
}

fn shape_contains(s: &UhStructure, shape: &Shape, code: usize) -> bool {
    match shape {
        Shape::Codes { excluded } => !excluded.contains(&code),
        Shape::Single(x) => *x == code,
        Shape::Line { columns, iv } => match (s.label(code), columns) {
            (Label::Rational(q), None) => iv.contains(&q),
            (Label::Pair { column, q }, Some(cols)) => cols.contains(column) && iv.contains(&q),
            _ => false,
        },
        Shape::Points { columns, q } => match s.label(code) {
            Label::Pair { column, q: p } => columns.contains(column) && p == *q,
            _ => false,
        },
    }
}

/// A few members of the shape, simplest first.
fn shape_candidates(s: &UhStructure, shape: &Shape, limit: usize) -> Vec<usize> {
    match shape {
        Shape::Codes { excluded } => (0..).filter(|c| !excluded.contains(c)).take(limit).collect(),
        Shape::Single(x) => vec![*x],
        Shape::Points { columns, q } => {
            let width = width_of(s);
            let mut out = Vec::new();
            let mut col = 0u64;
            while out.len() < limit && col < 4096 {
                if let Width::Finite(n) = width {
                    if col >= n {
                        break;
                    }
                }
                if columns.contains(col) {
                    if let Some(c) = code_for(s, Some(col), *q) {
                        out.push(c);
                    }
                }
                col += 1;
            }
            out
        }
        Shape::Line { columns, iv } => {
            let column = match columns {
                None => None,
                Some(cols) => match cols.first_common(&Columns::All, width_of(s)) {
                    Some(c) => Some(c),
                    None => return Vec::new(),
                },
            };
            let mut out = Vec::new();
            let mut queue = std::collections::VecDeque::from([*iv]);
            while let Some(piece) = queue.pop_front() {
                if out.len() >= limit {
                    break;
                }
                let Some(q) = piece.simplest() else { continue };
                if let Some(c) = code_for(s, column, q) {
                    out.push(c);
                }
                queue.push_back(OpenInterval::new(piece.lo, Endpoint::rational(q)));
                queue.push_back(OpenInterval::new(Endpoint::rational(q), piece.hi));
            }
            out
        }
    }
}

fn is_rational_level(d: &SetDescriptor) -> bool {
    match d {
        SetDescriptor::IntervalQ { .. } => true,
        SetDescriptor::Programmatic(Programmatic::Integers | Programmatic::Dyadics) => true,
        SetDescriptor::Union(v) | SetDescriptor::Intersection(v) => v.iter().all(is_rational_level),
        _ => false,
    }
}

impl SetDescriptor {
    /// Looks for a member of this descriptor inside `shape`, deciding
    /// emptiness exactly where the presentation allows.
    pub fn probe(&self, s: &UhStructure, shape: &Shape) -> Probe {
        let fallback = || {
            for c in shape_candidates(s, shape, 48) {
                if self.member(s, c).unwrap_or(false) {
                    return Probe::Witness(c);
                }
            }
            Probe::Unknown
        };
        match self {
            SetDescriptor::Explicit { codes } | SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => {
                codes.iter().find(|&&c| shape_contains(s, shape, c)).map_or(Probe::Empty, |&c| Probe::Witness(c))
            }
            SetDescriptor::Union(v) => {
                let mut all_empty = true;
                for d in v {
                    match d.probe(s, shape) {
                        Probe::Witness(c) => return Probe::Witness(c),
                        Probe::Unknown => all_empty = false,
                        Probe::Empty => {}
                    }
                }
                if all_empty {
                    Probe::Empty
                } else {
                    Probe::Unknown
                }
            }
            SetDescriptor::Intersection(v) => {
                if v.iter().any(|d| d.probe(s, shape) == Probe::Empty) {
                    return Probe::Empty;
                }
                if let (Shape::Line { columns: None, iv }, true) = (shape, is_rational_level(self)) {
                    return match self.probe_q(iv) {
                        QProbe::Witness(q) => code_for(s, None, q).map_or(Probe::Unknown, Probe::Witness),
                        QProbe::Empty => Probe::Empty,
                        QProbe::Unknown => fallback(),
                    };
                }
                fallback()
            }
            SetDescriptor::Cofinite { excluded } => match shape {
                Shape::Single(x) if excluded.contains(x) => Probe::Empty,
                _ => shape_candidates(s, shape, excluded.len() + 1)
                    .into_iter()
                    .find(|c| !excluded.contains(c))
                    .map_or(Probe::Unknown, Probe::Witness),
            },
            SetDescriptor::Programmatic(Programmatic::Evens | Programmatic::Odds) => match shape {
                Shape::Codes { .. } | Shape::Single(_) => {
                    let parity = usize::from(matches!(self, SetDescriptor::Programmatic(Programmatic::Odds)));
                    match shape {
                        Shape::Single(x) => {
                            if x % 2 == parity {
                                Probe::Witness(*x)
                            } else {
                                Probe::Empty
                            }
                        }
                        _ => fallback(),
                    }
                }
                _ => fallback(),
            },
            SetDescriptor::IntervalQ { .. } | SetDescriptor::Programmatic(Programmatic::Integers | Programmatic::Dyadics) => {
                match shape {
                    Shape::Line { columns: None, iv } => match self.probe_q(iv) {
                        QProbe::Witness(q) => code_for(s, None, q).map_or(Probe::Unknown, Probe::Witness),
                        QProbe::Empty => Probe::Empty,
                        QProbe::Unknown => fallback(),
                    },
                    Shape::Single(x) => {
                        if self.member(s, *x).unwrap_or(false) {
                            Probe::Witness(*x)
                        } else {
                            Probe::Empty
                        }
                    }
                    _ => fallback(),
                }
            }
            SetDescriptor::ColumnSelect { columns, inner } => match shape {
                Shape::Line { columns: Some(region), iv } => {
                    let Some(col) = region.first_common(columns, width_of(s)) else { return Probe::Empty };
                    match inner.probe_q(iv) {
                        QProbe::Witness(q) => code_for(s, Some(col), q).map_or(Probe::Unknown, Probe::Witness),
                        QProbe::Empty => Probe::Empty,
                        QProbe::Unknown => fallback(),
                    }
                }
                Shape::Points { columns: region, q } => {
                    let Some(col) = region.first_common(columns, width_of(s)) else { return Probe::Empty };
                    match inner.member_rational(q) {
                        Ok(true) => code_for(s, Some(col), *q).map_or(Probe::Unknown, Probe::Witness),
                        Ok(false) => Probe::Empty,
                        Err(_) => Probe::Unknown,
                    }
                }
                _ => fallback(),
            },
            _ => fallback(),
        }
    }

    fn probe_q(&self, iv: &OpenInterval) -> QProbe {
        if iv.is_empty() {
            return QProbe::Empty;
        }
        match self {
            SetDescriptor::IntervalQ { lo, hi } => {
                iv.intersect(&OpenInterval::new(*lo, *hi)).simplest().map_or(QProbe::Empty, QProbe::Witness)
            }
            SetDescriptor::Programmatic(Programmatic::Integers) => integer_in(iv).map_or(QProbe::Empty, QProbe::Witness),
            SetDescriptor::Programmatic(Programmatic::Dyadics) => dyadic_in(iv).map_or(QProbe::Unknown, QProbe::Witness),
            SetDescriptor::Explicit { codes } | SetDescriptor::Programmatic(Programmatic::Recorded { codes, .. }) => codes
                .iter()
                .map(|&c| dec_q(c as u64))
                .find(|q| iv.contains(q))
                .map_or(QProbe::Empty, QProbe::Witness),
            SetDescriptor::Cofinite { excluded } => {
                let bad: Vec<Rational> = excluded.iter().map(|&c| dec_q(c as u64)).collect();
                simplest_avoiding(iv, &bad).map_or(QProbe::Unknown, QProbe::Witness)
            }
            SetDescriptor::Union(v) => {
                let mut all_empty = true;
                for d in v {
                    match d.probe_q(iv) {
                        QProbe::Witness(q) => return QProbe::Witness(q),
                        QProbe::Unknown => all_empty = false,
                        QProbe::Empty => {}
                    }
                }
                if all_empty {
                    QProbe::Empty
                } else {
                    QProbe::Unknown
                }
            }
            SetDescriptor::Intersection(v) => {
                let mut narrowed = *iv;
                let mut rest = Vec::new();
                for d in v {
                    match d {
                        SetDescriptor::IntervalQ { lo, hi } => narrowed = narrowed.intersect(&OpenInterval::new(*lo, *hi)),
                        other => rest.push(other),
                    }
                }
                if narrowed.is_empty() {
                    return QProbe::Empty;
                }
                match rest.as_slice() {
                    [] => narrowed.simplest().map_or(QProbe::Empty, QProbe::Witness),
                    [one] => one.probe_q(&narrowed),
                    _ => QProbe::Unknown,
                }
            }
            _ => QProbe::Unknown,
        }
    }
}

/// The integer of least absolute value in the interval.
fn integer_in(iv: &OpenInterval) -> Option<Rational> {
    let zero = Rational::zero();
    if iv.contains(&zero) {
        return Some(zero);
    }
    let candidate = match (&iv.lo, &iv.hi) {
        (Endpoint::Finite { value }, _) if value.cmp_rational(&zero) != std::cmp::Ordering::Less => value.floor() + 1,
        (_, Endpoint::Finite { value }) => {
            let f = value.floor();
            if value.cmp_rational(&Rational::from_integer(f)) == std::cmp::Ordering::Equal {
                f - 1
            } else {
                f
            }
        }
        _ => return None,
    };
    let q = Rational::from_integer(candidate);
    iv.contains(&q).then_some(q)
}

/// A dyadic rational in the interval with the least denominator.
fn dyadic_in(iv: &OpenInterval) -> Option<Rational> {
    if let Some(q) = integer_in(iv) {
        return Some(q);
    }
    let Endpoint::Finite { value: lo } = iv.lo else {
        return integer_in(iv);
    };
    for e in 1..60 {
        let scale = 1i64 << e;
        let q = Rational::new(lo.scale(scale).floor() + 1, scale);
        if iv.contains(&q) {
            return Some(q);
        }
    }
    None
}

/// The simplest rational of the interval outside `bad`, searching
/// breadth-first through the pieces cut off by excluded points.
fn simplest_avoiding(iv: &OpenInterval, bad: &[Rational]) -> Option<Rational> {
    let mut queue = std::collections::VecDeque::from([*iv]);
    let mut tries = 0;
    while let Some(piece) = queue.pop_front() {
        tries += 1;
        if tries > 4 * bad.len() + 4 {
            return None;
        }
        let Some(q) = piece.simplest() else { continue };
        if !bad.contains(&q) {
            return Some(q);
        }
        queue.push_back(OpenInterval::new(piece.lo, Endpoint::rational(q)));
        queue.push_back(OpenInterval::new(Endpoint::rational(q), piece.hi));
    }
    None
}

// ---------------------------------------------------------------------------
// The copy criterion

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    UnknownAtBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyBounds {
    pub f_max: usize,
    pub x_bound: usize,
    pub search_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<crate::verify::Witness>,
    pub bounds: CopyBounds,
    /// Criterion instances settled by a closed-form representative beyond the
    /// search bound.
    pub closed_form_hits: usize,
}

/// Subsets of `items` of size at most `k`: by size, then lexicographically.
fn small_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for set in &layer {
            let start = set.last().map_or(0, |&l| items.iter().position(|&x| x == l).unwrap() + 1);
            for &x in &items[start..] {
                let mut v = set.clone();
                v.push(x);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Checks that every orbit over every `F ⊆ A ∩ [0, x_bound)` with
/// `|F| ≤ f_max` that contains some `x < x_bound` meets `A`.
pub fn check_copy(s: &UhStructure, a: &SetDescriptor, f_max: usize, x_bound: usize, search_bound: usize) -> Result<Verdict> {
    if !s.spec().is_labelled() {
        for b in [x_bound, search_bound] {
            if b > s.len() {
                return Err(a.undecidable(b - 1));
            }
        }
    }
    let in_a = a.enumerate(s, search_bound.max(x_bound))?;
    let params: Vec<usize> = in_a.iter().copied().take_while(|&c| c < x_bound).collect();
    let search: Vec<usize> = in_a.iter().copied().take_while(|&c| c < search_bound).collect();
    let bounds = CopyBounds { f_max, x_bound, search_bound };
    let mut closed_form_hits = 0;
    let mut unknown = None;
    for base in small_subsets(&params, f_max) {
        let mut present: HashMap<(Vec<u8>, bool), usize> = HashMap::new();
        for &y in &search {
            if base.binary_search(&y).is_ok() {
                continue;
            }
            let t = qf_type(s, &base, y)?;
            present.entry((t.roles(), t.looped)).or_insert(y);
        }
        let mut settled: HashMap<(Vec<u8>, bool), bool> = HashMap::new();
        for x in 0..x_bound {
            if base.binary_search(&x).is_ok() {
                continue;
            }
            let t = qf_type(s, &base, x)?;
            let key = (t.roles(), t.looped);
            if present.contains_key(&key) || settled.get(&key) == Some(&true) {
                continue;
            }
            let probe = orbit_shape(s, &t, x).map_or(Probe::Unknown, |shape| a.probe(s, &shape));
            match probe {
                Probe::Witness(w) if t.realized_by(s, w) && a.member(s, w)? => {
                    closed_form_hits += 1;
                    settled.insert(key, true);
                }
                Probe::Empty => {
                    let witness = crate::verify::Witness::CopyFailure {
                        base: base.clone(),
                        x,
                        reason: "orbit has empty intersection with the set (closed form)".into(),
                    };
                    return Ok(Verdict { status: Status::Fail, witness: Some(witness), bounds, closed_form_hits });
                }
                _ => {
                    settled.insert(key, false);
                    if unknown.is_none() {
                        unknown = Some(crate::verify::Witness::CopyFailure {
                            base: base.clone(),
                            x,
                            reason: "no representative found below the search bound".into(),
                        });
                    }
                }
            }
        }
    }
    let status = if unknown.is_some() { Status::UnknownAtBound } else { Status::Pass };
    Ok(Verdict { status, witness: unknown, bounds, closed_form_hits })
}

// ---------------------------------------------------------------------------
// Back and forth

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Forth,
    Back,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFailure {
    pub step: usize,
    pub kind: StepKind,
    pub element: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    /// Pairs `(a, x)` with `a ∈ A` and `x` in the structure.
    pub pairs: Vec<(usize, usize)>,
    pub failure: Option<StepFailure>,
}

/// First pair of pairs whose relations disagree, if any.
pub fn partial_iso_violation(s: &UhStructure, pairs: &[(usize, usize)]) -> Option<((usize, usize), (usize, usize))> {
    for (i, &p) in pairs.iter().enumerate() {
        if s.has_loop(p.0) != s.has_loop(p.1) {
            return Some((p, p));
        }
        for &q in &pairs[i + 1..] {
            let same_dom = p.0 == q.0;
            let same_ran = p.1 == q.1;
            if same_dom != same_ran || s.relation(p.0, q.0) != s.relation(p.1, q.1) {
                return Some((p, q));
            }
        }
    }
    None
}

/// Forth step: maps the least member of `A` outside the domain.
pub fn forth_step(s: &UhStructure, a: &SetDescriptor, pairs: &[(usize, usize)], bound: usize) -> Result<std::result::Result<(usize, usize), (usize, String)>> {
    let dom: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    let ran: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
    let mut next = None;
    for c in 0..bound {
        if !dom.contains(&c) && a.member(s, c)? {
            next = Some(c);
            break;
        }
    }
    let Some(elem) = next else {
        return Ok(Err((bound, "A has no further member below the bound".into())));
    };
    let image = (0..bound).find(|&y| {
        !ran.contains(&y) && s.has_loop(y) == s.has_loop(elem) && pairs.iter().all(|&(d, x)| s.relation(d, elem) == s.relation(x, y))
    });
    Ok(match image {
        Some(y) => Ok((elem, y)),
        None => Err((elem, "no one-point extension witness below the bound".into())),
    })
}

/// Back step for `x`: finds `x'` realizing the pulled-back type over the
/// domain, then a representative of that orbit inside `A`.
pub fn back_step(s: &UhStructure, a: &SetDescriptor, pairs: &[(usize, usize)], x: usize, bound: usize) -> Result<std::result::Result<(usize, usize), String>> {
    let dom: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let pulled = (0..bound).find(|&y| {
        !dom.contains(&y) && s.has_loop(y) == s.has_loop(x) && pairs.iter().all(|&(d, img)| s.relation(d, y) == s.relation(img, x))
    });
    let Some(pulled) = pulled else {
        return Ok(Err("no one-point extension witness below the bound".into()));
    };
    let target = qf_type(s, &dom, pulled)?;
    for c in 0..bound {
        if dom.contains(&c) || !a.member(s, c)? {
            continue;
        }
        if target.realized_by(s, c) {
            return Ok(Ok((c, x)));
        }
    }
    Ok(Err("no orbit representative in A".into()))
}

/// Alternates forth and back steps, starting with forth.
pub fn back_and_forth_extend(s: &UhStructure, a: &SetDescriptor, pairs: &[(usize, usize)], steps: usize, bound: usize) -> Result<Extension> {
    if let Some((first, second)) = partial_iso_violation(s, pairs) {
        return Err(Error::NotPartialIso { first, second });
    }
    for &(d, _) in pairs {
        if !a.member(s, d)? {
            return Err(Error::NotPartialIso { first: (d, d), second: (d, d) });
        }
    }
    let mut map = pairs.to_vec();
    for step in 0..steps {
        let kind = if step % 2 == 0 { StepKind::Forth } else { StepKind::Back };
        let outcome = match kind {
            StepKind::Forth => forth_step(s, a, &map, bound)?,
            StepKind::Back => {
                let ran: BTreeSet<usize> = map.iter().map(|p| p.1).collect();
                match (0..bound).find(|x| !ran.contains(x)) {
                    Some(x) => back_step(s, a, &map, x, bound)?.map_err(|r| (x, r)),
                    None => Err((bound, "structure exhausted below the bound".into())),
                }
            }
        };
        match outcome {
            Ok(pair) => map.push(pair),
            Err((element, reason)) => {
                return Ok(Extension { pairs: map, failure: Some(StepFailure { step, kind, element, reason }) });
            }
        }
    }
    debug_assert!(partial_iso_violation(s, &map).is_none());
    Ok(Extension { pairs: map, failure: None })
}

// ---------------------------------------------------------------------------
// Sampler

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Representatives are chosen below this code.
    pub bound: usize,
    /// Orbits over parameter sets below `cover` with a realizer below `cover`
    /// are hit.
    pub cover: usize,
    pub f_max: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, bound: usize) -> Self {
        SamplerConfig { seed, bound, cover: bound.div_ceil(3).min(128), f_max: 2 }
    }
}

pub fn sample_copy(s: &UhStructure, seed: u64, bound: usize) -> Result<SetDescriptor> {
    sample_copy_with(s, &SamplerConfig::new(seed, bound))
}

/// Greedy seeded selection: for each parameter set `F ⊆ [0, cover)` with
/// `|F| ≤ f_max` and each type over `F` realized below `cover`, adds a random
/// representative below `bound` unless the selection already meets the orbit.
pub fn sample_copy_with(s: &UhStructure, cfg: &SamplerConfig) -> Result<SetDescriptor> {
    let bound = if s.spec().is_labelled() { cfg.bound } else { cfg.bound.min(s.len()) };
    let cover = cfg.cover.min(bound);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chosen: BTreeSet<usize> = BTreeSet::new();
    let universe: Vec<usize> = (0..cover).collect();
    for base in small_subsets(&universe, cfg.f_max) {
        let mut hit: HashMap<(Vec<u8>, bool), bool> = HashMap::new();
        for &y in &chosen {
            if base.binary_search(&y).is_err() {
                let t = qf_type(s, &base, y)?;
                hit.insert((t.roles(), t.looped), true);
            }
        }
        for x in 0..cover {
            if base.binary_search(&x).is_ok() {
                continue;
            }
            let t = qf_type(s, &base, x)?;
            let key = (t.roles(), t.looped);
            if hit.contains_key(&key) {
                continue;
            }
            let members: Vec<usize> = (0..bound).filter(|&y| t.realized_by(s, y)).collect();
            let pick = *members.choose(&mut rng).ok_or_else(|| Error::NoRepresentative(format!("{:?} over {:?}", t.roles(), base)))?;
            chosen.insert(pick);
            hit.insert(key, true);
        }
    }
    let label = format!("sample seed={} bound={} cover={}", cfg.seed, cfg.bound, cover);
    Ok(SetDescriptor::recorded(label, chosen))
}

/// Orbits of `s` as descriptors, first `rows` of the canonical enumeration.
pub fn first_orbits(s: &UhStructure, rows: usize, bound: usize) -> Vec<SetDescriptor> {
    enumerate_orbits(s, bound).take(rows).map(|o| o.descriptor()).collect()
}
