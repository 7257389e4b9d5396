//! Quantifier-free types over finite parameter sets, orbits, and conditions.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::copies::{check_copy, SetDescriptor, Status};
use crate::error::{Error, Result};
use crate::structures::{Rel, UhStructure};
use crate::verify::{Check, Report, Witness};

/// A condition ⟨L,G,U⟩: a realizer lies above every code in `lower`, below
/// every code in `upper` and is incomparable to every code in `incomparable`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub incomparable: Vec<usize>,
}

/// Role of a code inside a condition, in canonical order.
pub const ROLE_L: u8 = 0;
pub const ROLE_G: u8 = 1;
pub const ROLE_U: u8 = 2;

impl Condition {
    pub fn new(lower: Vec<usize>, upper: Vec<usize>, incomparable: Vec<usize>) -> Result<Self> {
        let mut c = Condition { lower, upper, incomparable };
        c.normalize();
        let mut seen = HashSet::new();
        for x in c.codes_unsorted() {
            if !seen.insert(x) {
                return Err(Error::OverlappingCondition(x));
            }
        }
        Ok(c)
    }

    pub fn from_roles(codes: &[usize], roles: &[u8]) -> Self {
        let mut c = Condition::default();
        for (&x, &r) in codes.iter().zip(roles) {
            match r {
                ROLE_L => c.lower.push(x),
                ROLE_G => c.upper.push(x),
                _ => c.incomparable.push(x),
            }
        }
        c
    }

    pub fn normalize(&mut self) {
        self.lower.sort_unstable();
        self.upper.sort_unstable();
        self.incomparable.sort_unstable();
    }

    pub fn size(&self) -> usize {
        self.lower.len() + self.upper.len() + self.incomparable.len()
    }

    fn codes_unsorted(&self) -> impl Iterator<Item = usize> + '_ {
        self.lower.iter().chain(&self.upper).chain(&self.incomparable).copied()
    }

    /// Sorted codes with their roles.
    pub fn roles(&self) -> (Vec<usize>, Vec<u8>) {
        let mut pairs: Vec<(usize, u8)> = self
            .lower
            .iter()
            .map(|&x| (x, ROLE_L))
            .chain(self.upper.iter().map(|&x| (x, ROLE_G)))
            .chain(self.incomparable.iter().map(|&x| (x, ROLE_U)))
            .collect();
        pairs.sort_unstable();
        pairs.into_iter().unzip()
    }

    /// Sort key of the canonical enumeration: max code (the empty condition
    /// first), size, code set, role vector.
    pub fn canonical_key(&self) -> (usize, usize, Vec<usize>, Vec<u8>) {
        let (codes, roles) = self.roles();
        let top = codes.last().map_or(0, |&m| m + 1);
        (top, codes.len(), codes, roles)
    }

    pub fn max_code(&self) -> Option<usize> {
        self.codes_unsorted().max()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.codes_unsorted().any(|c| c == x)
    }

    /// Whether `p` realizes the condition in `s`.
    pub fn realized_by(&self, s: &UhStructure, p: usize) -> bool {
        !self.contains(p)
            && self.lower.iter().all(|&l| s.relation(l, p) == Rel::Lt)
            && self.upper.iter().all(|&g| s.relation(p, g) == Rel::Lt)
            && self.incomparable.iter().all(|&u| s.relation(u, p) == Rel::Inc)
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{:?},{:?},{:?}>", self.lower, self.upper, self.incomparable)
    }
}

/// (C1)–(C3) in `s`.
pub fn condition_valid(s: &UhStructure, c: &Condition) -> Result<bool> {
    let checked = Condition::new(c.lower.clone(), c.upper.clone(), c.incomparable.clone())?;
    for x in checked.codes_unsorted() {
        s.check_decided(x)?;
    }
    let c1 = c.lower.iter().all(|&l| c.upper.iter().all(|&g| s.lt(l, g)));
    let c2 = c.incomparable.iter().all(|&u| c.lower.iter().all(|&l| !s.lt(u, l)));
    let c3 = c.upper.iter().all(|&g| c.incomparable.iter().all(|&u| !s.lt(g, u)));
    Ok(c1 && c2 && c3)
}

/// Realizers of `c` below `bound`, by direct relation queries.
pub fn realizers(s: &UhStructure, c: &Condition, bound: usize) -> Vec<usize> {
    (0..bound).filter(|&p| c.realized_by(s, p)).collect()
}

/// The quantifier-free type of a subject over `base`: which parameters lie
/// below it, above it, or are incomparable to it, and whether the subject
/// carries a reflexive loop.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QfType {
    pub base: Vec<usize>,
    pub below: Vec<usize>,
    pub above: Vec<usize>,
    pub incomparable: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub looped: bool,
}

impl QfType {
    /// Role of each base code relative to the subject, in base order.
    pub fn roles(&self) -> Vec<u8> {
        self.base
            .iter()
            .map(|f| {
                if self.below.binary_search(f).is_ok() {
                    ROLE_L
                } else if self.above.binary_search(f).is_ok() {
                    ROLE_G
                } else {
                    ROLE_U
                }
            })
            .collect()
    }

    pub fn as_condition(&self) -> Condition {
        Condition { lower: self.below.clone(), upper: self.above.clone(), incomparable: self.incomparable.clone() }
    }

    /// Whether `y` has this type.
    pub fn realized_by(&self, s: &UhStructure, y: usize) -> bool {
        self.base.binary_search(&y).is_err() && s.has_loop(y) == self.looped && self.as_condition().realized_by(s, y)
    }
}

fn sorted_base(base: &[usize]) -> Vec<usize> {
    let mut f = base.to_vec();
    f.sort_unstable();
    f.dedup();
    f
}

pub fn qf_type(s: &UhStructure, base: &[usize], x: usize) -> Result<QfType> {
    let base = sorted_base(base);
    if base.binary_search(&x).is_ok() {
        return Err(Error::InParameterSet(x));
    }
    s.check_decided(x)?;
    let mut t = QfType { looped: s.has_loop(x), ..QfType::default() };
    for &f in &base {
        s.check_decided(f)?;
        match s.relation(f, x) {
            Rel::Lt => t.below.push(f),
            Rel::Gt => t.above.push(f),
            _ => t.incomparable.push(f),
        }
    }
    t.base = base;
    Ok(t)
}

pub fn orbit_member(s: &UhStructure, base: &[usize], x: usize, y: usize) -> Result<bool> {
    Ok(qf_type(s, base, x)? == qf_type(s, base, y)?)
}

/// All `y < bound` in the orbit of `x` over `base`, ascending.
pub fn enumerate_orbit(s: &UhStructure, base: &[usize], x: usize, bound: usize) -> Result<Vec<usize>> {
    let t = qf_type(s, base, x)?;
    for y in 0..bound {
        s.check_decided(y)?;
    }
    Ok((0..bound).filter(|&y| t.realized_by(s, y)).collect())
}

/// An orbit `O_n`: a parameter set with a realized type over it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orbit {
    pub ty: QfType,
    pub first_realizer: usize,
}

impl Orbit {
    pub fn base(&self) -> &[usize] {
        &self.ty.base
    }

    pub fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Orbit { ty: self.ty.clone() }
    }

    pub fn contains(&self, s: &UhStructure, y: usize) -> bool {
        self.ty.realized_by(s, y)
    }
}

/// Lazy canonical enumeration of the orbits whose data lies below `bound`:
/// by max code of the parameters and first realizer, then parameter count,
/// then parameters and roles lexicographically.
pub struct OrbitIter<'a> {
    s: &'a UhStructure,
    bound: usize,
    key: usize,
    batch: std::vec::IntoIter<Orbit>,
}

pub fn enumerate_orbits(s: &UhStructure, bound: usize) -> OrbitIter<'_> {
    let bound = if s.spec().is_labelled() { bound } else { bound.min(s.len()) };
    OrbitIter { s, bound, key: 0, batch: Vec::new().into_iter() }
}

impl Iterator for OrbitIter<'_> {
    type Item = Orbit;

    fn next(&mut self) -> Option<Orbit> {
        loop {
            if let Some(o) = self.batch.next() {
                return Some(o);
            }
            if self.key >= self.bound {
                return None;
            }
            let batch = orbits_with_key(self.s, self.key);
            self.key += 1;
            self.batch = batch.into_iter();
        }
    }
}

fn orbits_with_key(s: &UhStructure, k: usize) -> Vec<Orbit> {
    let mut found: BTreeMap<(usize, Vec<usize>, Vec<u8>, bool), Orbit> = BTreeMap::new();
    let mut record = |ty: QfType, first_realizer: usize| {
        let key = (ty.base.len(), ty.base.clone(), ty.roles(), ty.looped);
        found.entry(key).or_insert(Orbit { ty, first_realizer });
    };
    let subsets = 1u64 << k;
    // parameters below k, realizer exactly k
    for mask in 0..subsets {
        let base: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let ty = qf_type(s, &base, k).expect("k is outside the base");
        let earlier = (0..k).any(|x| base.binary_search(&x).is_err() && ty.realized_by(s, x));
        if !earlier {
            record(ty, k);
        }
    }
    // parameters with max k, realizer below k
    for mask in 0..subsets {
        let mut base: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        base.push(k);
        let mut seen: HashSet<QfType> = HashSet::new();
        for x in (0..k).filter(|x| base.binary_search(x).is_err()) {
            let ty = qf_type(s, &base, x).expect("x is outside the base");
            if seen.insert(ty.clone()) {
                record(ty, x);
            }
        }
    }
    found.into_values().collect()
}

/// Evidence that every orbit is infinite and `X∖F` is a copy for small `F`.
pub fn sap_evidence(s: &UhStructure, k: usize, bound: usize) -> Result<Report> {
    let mut report = Report::new();
    let need = k.max(8);
    let orbits: Vec<Orbit> = enumerate_orbits(s, bound).take(k).collect();
    for (n, o) in orbits.iter().enumerate() {
        let count = (0..bound).filter(|&y| o.contains(s, y)).take(need).count();
        let mut check = Check::new("orbit_size")
            .param("structure", s.spec().to_string())
            .param("orbit", n)
            .param("needed", need)
            .bound("bound", bound);
        if count >= need {
            check.pass();
        } else {
            check.fail(Witness::OrbitShortfall { orbit: n, ty: o.ty.clone(), found: count, needed: need });
        }
        report.push(check);
    }
    let mut bases: Vec<Vec<usize>> = orbits.iter().map(|o| o.ty.base.clone()).filter(|b| b.len() <= 2).collect();
    bases.sort();
    bases.dedup();
    let x_bound = 40.min(bound);
    for base in bases {
        let complement = SetDescriptor::Cofinite { excluded: base.clone() };
        let verdict = check_copy(s, &complement, 2, x_bound, bound)?;
        let mut check = Check::new("cofinite_copy")
            .param("structure", s.spec().to_string())
            .param("removed", base)
            .bound("x_bound", x_bound)
            .bound("search_bound", bound);
        match verdict.status {
            Status::Pass => check.pass(),
            Status::Fail => check.fail_many(verdict.witness.into_iter().collect()),
            Status::UnknownAtBound => check.unknown(verdict.witness.into_iter().collect()),
        }
        report.push(check);
    }
    Ok(report)
}
