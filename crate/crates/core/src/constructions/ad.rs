//! Almost disjoint family of sequences converging to reals `a + b√2`.
//!
//! The rows `D_n` of a greedy table over ℚ are relabelled onto dense
//! classes `E_n` (rationals whose reduced denominator has odd part `2n+1`):
//! the `j`-th entry of row `n` becomes the `j`-th element of `E_n`. A member
//! picks its `k`-th term from `D_{f(k)}` inside the band
//! `(x − 1/(k+1), x − 1/(k+2))`, least index first.

use serde::{Deserialize, Serialize};

use super::greedy::GreedyTable;
use crate::copies::{orbit_shape, Shape};
use crate::error::{Error, Result};
use crate::rational::{
    code_of_rational_big, dec_q, gcd, odd_part, quad_serde, rational_serde, rational_vec_serde, ruler, Endpoint, OpenInterval,
    Quad, Rational,
};
use crate::structures::{Kind, UhStructure};
use crate::types_orbits::enumerate_orbits;

/// Deepest dyadic level searched for a band element.
const MAX_LEVEL: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberMap {
    /// `k mod n_D`.
    RoundRobin,
    /// 2-adic valuation of `k+1`, capped at `n_D − 1`.
    Ruler,
}

impl FiberMap {
    pub fn fiber(self, k: usize, n_d: usize) -> usize {
        match self {
            FiberMap::RoundRobin => k % n_d,
            FiberMap::Ruler => (ruler(k as u64 + 1) as usize).min(n_d - 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdParams {
    #[serde(with = "quad_serde")]
    pub target: Quad,
    pub n_d: usize,
    pub fiber: FiberMap,
}

/// The class `E_n`, enumerated level by level: level `e` holds `p/d` with
/// `d = (2n+1)·2^e`, `gcd(p, d) = 1` and `|p/d| ≤ 2 + e`, ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseClass {
    pub n: usize,
}

impl DenseClass {
    fn odd(&self) -> i64 {
        2 * self.n as i64 + 1
    }

    pub fn radius(e: u32) -> i64 {
        2 + e as i64
    }

    fn denominator(&self, e: u32) -> i64 {
        self.odd() << e
    }

    fn primes(&self, e: u32) -> Vec<i64> {
        let mut ps = Vec::new();
        let mut m = self.odd();
        let mut p = 3;
        while p * p <= m {
            if m % p == 0 {
                ps.push(p);
                while m % p == 0 {
                    m /= p;
                }
            }
            p += 2;
        }
        if m > 1 {
            ps.push(m);
        }
        if e > 0 {
            ps.push(2);
        }
        ps
    }

    /// Numerators in `[lo, hi]` coprime to the level's denominator.
    fn count_coprime(&self, e: u32, lo: i64, hi: i64) -> i64 {
        if hi < lo {
            return 0;
        }
        let ps = self.primes(e);
        let mut total = 0;
        for mask in 0u32..(1 << ps.len()) {
            let d: i64 = (0..ps.len()).filter(|i| mask >> i & 1 == 1).map(|i| ps[i]).product();
            let c = hi.div_euclid(d) - (lo - 1).div_euclid(d);
            if mask.count_ones() % 2 == 0 {
                total += c;
            } else {
                total -= c;
            }
        }
        total
    }

    fn span(&self, e: u32) -> i64 {
        Self::radius(e) * self.denominator(e)
    }

    pub fn level_len(&self, e: u32) -> u64 {
        let r = self.span(e);
        self.count_coprime(e, -r, r) as u64
    }

    pub fn contains(&self, q: &Rational) -> bool {
        odd_part(*q.denom()) == self.odd() && {
            let e = q.denom().trailing_zeros();
            *q.numer() >= -self.span(e) && *q.numer() <= self.span(e)
        }
    }

    /// Position of `q` in the enumeration, if it is a member.
    pub fn index_of(&self, q: &Rational) -> Option<u64> {
        if !self.contains(q) {
            return None;
        }
        let e = q.denom().trailing_zeros();
        let offset: u64 = (0..e).map(|l| self.level_len(l)).sum();
        Some(offset + self.count_coprime(e, -self.span(e), *q.numer() - 1) as u64)
    }

    /// The `j`-th element.
    pub fn element(&self, j: u64) -> Rational {
        let mut j = j;
        let mut e = 0;
        while j >= self.level_len(e) {
            j -= self.level_len(e);
            e += 1;
        }
        let r = self.span(e);
        // least p with count_coprime(-r, p) > j
        let (mut lo, mut hi) = (-r, r);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.count_coprime(e, -r, mid) as u64 > j {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Rational::new(lo, self.denominator(e))
    }

    /// The member of least index inside the open interval `(lo, hi)`.
    pub fn first_in(&self, lo: &Quad, hi: &Quad) -> Option<Rational> {
        for e in 0..MAX_LEVEL {
            let d = self.denominator(e);
            let r = self.span(e);
            let mut p = (lo.scale(d).floor() + 1).max(-r);
            while p <= r {
                let q = Rational::new(p, d);
                if hi.cmp_rational(&q) != std::cmp::Ordering::Greater {
                    break;
                }
                if gcd(p, d) == 1 {
                    return Some(q);
                }
                p += 1;
            }
        }
        None
    }
}

/// One term of a member sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdTerm {
    pub fiber: usize,
    /// Position in `D_fiber`.
    pub index: u64,
    #[serde(with = "rational_serde")]
    pub value: Rational,
    /// Code of `value` in ℚ, in decimal; it rarely fits in 64 bits.
    pub code: String,
    /// The table entry `m[fiber][fiber + index]` relabelled to `value`.
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdMember {
    pub params: AdParams,
    pub terms: Vec<AdTerm>,
}

impl AdMember {
    pub fn codes(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.code.clone()).collect()
    }

    pub fn values(&self) -> Vec<Rational> {
        self.terms.iter().map(|t| t.value).collect()
    }
}

/// The greedy table over ℚ backing the classes `D_n`.
pub struct AdFamily {
    pub n_d: usize,
    pub table: GreedyTable,
    shapes: Vec<(Vec<usize>, Shape)>,
}

impl AdFamily {
    /// Table over the first `n_d` orbits of ℚ, entries searched below `bound`.
    pub fn new(s: &UhStructure, n_d: usize, bound: usize) -> Result<Self> {
        if s.kind() != Kind::Q {
            return Err(Error::Unsupported("the almost disjoint family lives on Q".into()));
        }
        if n_d == 0 {
            return Err(Error::Unsupported("n_D must be at least 1".into()));
        }
        let orbits: Vec<_> = enumerate_orbits(s, bound).take(n_d).collect();
        let shapes = orbits
            .iter()
            .map(|o| (o.ty.base.clone(), orbit_shape(s, &o.ty, o.first_realizer).expect("Q orbits have closed forms")))
            .collect();
        let table = GreedyTable::new(orbits.iter().map(|o| o.descriptor()).collect(), bound);
        let fam = AdFamily { n_d, table, shapes };
        for n in 0..n_d {
            fam.check_dense(n)?;
        }
        Ok(fam)
    }

    /// Each of the eight half-unit intervals of `(−2, 2)` holds an element
    /// of `D_n` from its first three levels.
    fn check_dense(&self, n: usize) -> Result<()> {
        let class = DenseClass { n };
        for t in -4..4 {
            let lo = Quad::rational(Rational::new(t, 2));
            let hi = Quad::rational(Rational::new(t + 1, 2));
            match class.first_in(&lo, &hi) {
                Some(q) if q.denom().trailing_zeros() <= 2 => {}
                _ => return Err(Error::Unsupported(format!("D_{n} is not dense at bound"))),
            }
        }
        Ok(())
    }

    /// Makes row `n` at least `len` entries long.
    fn ensure_row(&mut self, n: usize, len: u64) -> Result<()> {
        let horizon = n + len as usize;
        if self.table.horizon >= horizon {
            return Ok(());
        }
        let shapes = &self.shapes;
        self.table.extend_with(horizon, |row, x| {
            let (base, shape) = &shapes[row];
            Ok(base.binary_search(&x).is_err()
                && match shape {
                    Shape::Line { iv, .. } => iv.contains(&dec_q(x as u64)),
                    _ => true,
                })
        })
    }

    /// First `length` terms of the member with the given parameters.
    pub fn member(&mut self, params: AdParams, length: usize) -> Result<AdMember> {
        let x = params.target;
        let mut terms: Vec<AdTerm> = Vec::with_capacity(length);
        for k in 0..length {
            let fiber = params.fiber.fiber(k, self.n_d);
            let class = DenseClass { n: fiber };
            let lo = x.sub_rational(&Rational::new(1, k as i64 + 1));
            let hi = x.sub_rational(&Rational::new(1, k as i64 + 2));
            let value = class.first_in(&lo, &hi).ok_or(Error::EmptyWindow { k })?;
            let index = class.index_of(&value).expect("band element is a member");
            self.ensure_row(fiber, index + 1).map_err(|_| Error::EmptyWindow { k })?;
            let source = self.table.row(fiber)[index as usize];
            let code = code_of_rational_big(&value);
            terms.push(AdTerm { fiber, index, value, code, source });
        }
        Ok(AdMember { params, terms })
    }
}

pub fn ad_member(s: &UhStructure, params: AdParams, length: usize, bound: usize) -> Result<AdMember> {
    AdFamily::new(s, params.n_d, bound)?.member(params, length)
}

/// Separation of two members with distinct targets: every term of the upper
/// member from index `after` on exceeds `rational`, which exceeds the lower
/// target and so every term of the lower member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub lower: usize,
    pub upper: usize,
    #[serde(with = "rational_serde")]
    pub rational: Rational,
    pub after: usize,
    /// Values present in both prefixes.
    #[serde(with = "rational_vec_serde")]
    pub shared: Vec<Rational>,
}

pub fn ad_separation(members: &[AdMember], i: usize, j: usize) -> Option<Separation> {
    let (lower, upper) = match members[i].params.target.cmp(&members[j].params.target) {
        std::cmp::Ordering::Less => (i, j),
        std::cmp::Ordering::Greater => (j, i),
        std::cmp::Ordering::Equal => return None,
    };
    let rational = OpenInterval::new(
        Endpoint::quad(members[lower].params.target),
        Endpoint::quad(members[upper].params.target),
    )
    .simplest()?;
    let terms = &members[upper].terms;
    let after = terms.iter().position(|t| t.value > rational).unwrap_or(terms.len());
    let lower_values = members[lower].values();
    let shared = members[upper].values().into_iter().filter(|q| lower_values.contains(q)).collect();
    Some(Separation { lower, upper, rational, after, shared })
}
