//! Exact arithmetic used throughout: the signed Calkin–Wilf enumeration of the
//! rationals, Cantor pairing, and numbers of the form `a + b·√2`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i64>;

/// `cw(k)`: the k-th term of the Calkin–Wilf sequence, `cw(0) = 1`.
///
/// Reads the binary digits of `k + 1` below the leading one: a zero steps to
/// the left child `a/(a+b)`, a one to the right child `(a+b)/b`.
pub fn calkin_wilf(k: u64) -> Rational {
    let node = k + 1;
    let depth = 63 - node.leading_zeros();
    let (mut a, mut b) = (1i64, 1i64);
    for bit in (0..depth).rev() {
        if node >> bit & 1 == 0 {
            b += a;
        } else {
            a += b;
        }
    }
    Rational::new_raw(a, b)
}

/// Inverse of [`calkin_wilf`] on positive rationals. `None` when the index
/// does not fit in 64 bits.
pub fn calkin_wilf_index(q: &Rational) -> Option<u64> {
    if !q.is_positive() {
        return None;
    }
    let (mut a, mut b) = (*q.numer(), *q.denom());
    // bits collected from the leaf upwards, as runs of equal bits
    let mut runs: Vec<(u64, bool)> = Vec::new();
    while a != b {
        if a < b {
            let steps = (b - 1) / a;
            b -= steps * a;
            runs.push((steps as u64, false));
        } else {
            let steps = (a - 1) / b;
            a -= steps * b;
            runs.push((steps as u64, true));
        }
    }
    let mut node: u64 = 1;
    for &(len, bit) in runs.iter().rev() {
        for _ in 0..len {
            node = node.checked_mul(2)?.checked_add(bit as u64)?;
        }
    }
    Some(node - 1)
}

/// Signed enumeration: `0, cw(0), −cw(0), cw(1), −cw(1), …`.
pub fn dec_q(code: u64) -> Rational {
    if code == 0 {
        return Rational::zero();
    }
    let k = (code - 1) / 2;
    let q = calkin_wilf(k);
    if code % 2 == 1 {
        q
    } else {
        -q
    }
}

/// Inverse of [`dec_q`].
pub fn code_of_rational(q: &Rational) -> Option<u64> {
    match q.numer().signum() {
        0 => Some(0),
        1 => calkin_wilf_index(q)?.checked_mul(2)?.checked_add(1),
        _ => calkin_wilf_index(&-q)?.checked_mul(2)?.checked_add(2),
    }
}

/// [`code_of_rational`] without the 64-bit limit, in decimal. Codes grow
/// exponentially with the Stern–Brocot depth, so rationals with large
/// partial quotients need this form.
pub fn code_of_rational_big(q: &Rational) -> String {
    let sign = q.numer().signum();
    if sign == 0 {
        return "0".into();
    }
    let (mut a, mut b) = (q.numer().abs(), *q.denom());
    let mut runs: Vec<(i64, bool)> = Vec::new();
    while a != b {
        if a < b {
            let steps = (b - 1) / a;
            b -= steps * a;
            runs.push((steps, false));
        } else {
            let steps = (a - 1) / b;
            a -= steps * b;
            runs.push((steps, true));
        }
    }
    let mut node = BigUint::one();
    for &(len, bit) in runs.iter().rev() {
        let len = len as usize;
        node <<= len;
        if bit {
            node += (BigUint::one() << len) - 1u32;
        }
    }
    let k = node - 1u32;
    let code = k * 2u32 + if sign > 0 { 1u32 } else { 2u32 };
    code.to_str_radix(10)
}

/// Inverse of [`code_of_rational_big`]; `None` for malformed input or a
/// value outside 64-bit rationals.
pub fn dec_q_big(code: &str) -> Option<Rational> {
    let code = BigUint::parse_bytes(code.as_bytes(), 10)?;
    if code.is_zero() {
        return Some(Rational::zero());
    }
    let positive = code.bit(0);
    let node: BigUint = (code - 1u32) / 2u32 + 1u32;
    let depth = node.bits() - 1;
    let (mut a, mut b) = (1i64, 1i64);
    for bit in (0..depth).rev() {
        if node.bit(bit) {
            a = a.checked_add(b)?;
        } else {
            b = b.checked_add(a)?;
        }
    }
    let q = Rational::new_raw(a, b);
    Some(if positive { q } else { -q })
}

/// `π(a, b) = (a+b)(a+b+1)/2 + b`.
pub fn cantor_pair(a: u64, b: u64) -> Option<u64> {
    let s = a.checked_add(b)?;
    let tri = (s as u128) * (s as u128 + 1) / 2;
    u64::try_from(tri + b as u128).ok()
}

pub fn cantor_unpair(i: u64) -> (u64, u64) {
    let w = (((8 * i as u128 + 1).isqrt() - 1) / 2) as u64;
    let t = (w as u128 * (w as u128 + 1) / 2) as u64;
    let b = i - t;
    (w - b, b)
}

/// A real number `a + b·√2` with rational coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quad {
    pub a: Rational,
    pub b: Rational,
}

impl Quad {
    pub fn rational(a: Rational) -> Self {
        Quad { a, b: Rational::zero() }
    }

    pub fn sqrt2_multiple(k: i64) -> Self {
        Quad { a: Rational::zero(), b: Rational::from_integer(k) }
    }

    pub fn new(a: Rational, b: Rational) -> Self {
        Quad { a, b }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b)
    }

    pub fn sub_rational(&self, q: &Rational) -> Quad {
        Quad { a: self.a - q, b: self.b }
    }

    /// Compares this number with `q` exactly.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        // sign(q − a − b√2)
        sign_of(&(q - self.a), &-self.b).reverse()
    }

    pub fn scale(&self, k: i64) -> Quad {
        Quad { a: self.a * k, b: self.b * k }
    }

    /// Exact floor.
    pub fn floor(&self) -> i64 {
        let mut f = self.approx().floor() as i64;
        while self.cmp_rational(&Rational::from_integer(f)) == Ordering::Less {
            f -= 1;
        }
        while self.cmp_rational(&Rational::from_integer(f + 1)) != Ordering::Less {
            f += 1;
        }
        f
    }

    /// Floating approximation, for display only.
    pub fn approx(&self) -> f64 {
        ratio_f64(&self.a) + ratio_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        sign_of(&(self.a - other.a), &(self.b - other.b))
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => write!(f, "{}+{}*sqrt2", self.a, self.b),
        }
    }
}

pub fn ratio_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Sign of `x + y·√2`, by sign analysis and then squaring.
fn sign_of(x: &Rational, y: &Rational) -> Ordering {
    let sx = x.numer().signum();
    let sy = y.numer().signum();
    if sy == 0 {
        return sx.cmp(&0);
    }
    if sx == 0 {
        return sy.cmp(&0);
    }
    if sx == sy {
        return sx.cmp(&0);
    }
    // opposite signs: compare x² with 2y²
    let by_square = cmp_square_twice(x, y);
    if sx > 0 {
        by_square
    } else {
        by_square.reverse()
    }
}

/// Compares `x²` with `2·y²`.
fn cmp_square_twice(x: &Rational, y: &Rational) -> Ordering {
    let (p1, q1) = (*x.numer() as i128, *x.denom() as i128);
    let (p2, q2) = (*y.numer() as i128, *y.denom() as i128);
    let fast = (|| {
        let lhs = p1.checked_mul(p1)?.checked_mul(q2)?.checked_mul(q2)?;
        let rhs = p2.checked_mul(p2)?.checked_mul(q1)?.checked_mul(q1)?.checked_mul(2)?;
        Some(lhs.cmp(&rhs))
    })();
    fast.unwrap_or_else(|| {
        let (p1, q1, p2, q2) = (BigInt::from(p1), BigInt::from(q1), BigInt::from(p2), BigInt::from(q2));
        let lhs = &p1 * &p1 * &q2 * &q2;
        let rhs = &p2 * &p2 * &q1 * &q1 * 2;
        lhs.cmp(&rhs)
    })
}

/// An endpoint of an open interval on the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Endpoint {
    NegInf,
    PosInf,
    Finite {
        #[serde(with = "quad_serde")]
        value: Quad,
    },
}

impl Endpoint {
    pub fn rational(q: Rational) -> Self {
        Endpoint::Finite { value: Quad::rational(q) }
    }

    pub fn sqrt2_multiple(k: i64) -> Self {
        Endpoint::Finite { value: Quad::sqrt2_multiple(k) }
    }

    pub fn quad(value: Quad) -> Self {
        Endpoint::Finite { value }
    }

    /// Order on extended endpoints.
    pub fn cmp_endpoint(&self, other: &Endpoint) -> Ordering {
        use Endpoint::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite { value: a }, Finite { value: b }) => a.cmp(b),
        }
    }

    /// Compares this endpoint with `q`.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        match self {
            Endpoint::NegInf => Ordering::Less,
            Endpoint::PosInf => Ordering::Greater,
            Endpoint::Finite { value } => value.cmp_rational(q),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("+inf"),
            Endpoint::Finite { value } => write!(f, "{value}"),
        }
    }
}

/// Open interval `(lo, hi)` of the line; empty when `lo ≥ hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl OpenInterval {
    pub const ALL: OpenInterval = OpenInterval { lo: Endpoint::NegInf, hi: Endpoint::PosInf };

    pub fn new(lo: Endpoint, hi: Endpoint) -> Self {
        OpenInterval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.cmp_endpoint(&self.hi) != Ordering::Less
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo.cmp_rational(q) == Ordering::Less && self.hi.cmp_rational(q) == Ordering::Greater
    }

    pub fn intersect(&self, other: &OpenInterval) -> OpenInterval {
        let lo = if self.lo.cmp_endpoint(&other.lo) == Ordering::Less { other.lo } else { self.lo };
        let hi = if self.hi.cmp_endpoint(&other.hi) == Ordering::Greater { other.hi } else { self.hi };
        OpenInterval { lo, hi }
    }

    /// The rational of least Stern–Brocot depth inside the interval, which is
    /// also the one with the least code under [`dec_q`] among those of least
    /// depth. `None` if the interval is empty.
    pub fn simplest(&self) -> Option<Rational> {
        if self.is_empty() {
            return None;
        }
        let zero = Rational::zero();
        if self.contains(&zero) {
            return Some(zero);
        }
        if self.hi.cmp_rational(&zero) != Ordering::Greater {
            // interval lies in the negatives
            let mirrored = OpenInterval { lo: negate(&self.hi), hi: negate(&self.lo) };
            return mirrored.simplest_positive().map(|q| -q);
        }
        self.simplest_positive()
    }

    fn simplest_positive(&self) -> Option<Rational> {
        // Stern–Brocot descent with runs taken in bulk.
        let (mut ln, mut ld) = (0i64, 1i64);
        let (mut rn, mut rd) = (1i64, 0i64);
        loop {
            let (mn, md) = (ln.checked_add(rn)?, ld.checked_add(rd)?);
            let m = Rational::new(mn, md);
            if self.lo.cmp_rational(&m) != Ordering::Less {
                // mediant at or below lo: move left bound right by as many steps as allowed
                let k = max_steps(|k| match step(ln, ld, k, rn, rd) {
                    Some(q) => self.lo.cmp_rational(&q) != Ordering::Less,
                    None => false,
                });
                ln += k * rn;
                ld += k * rd;
            } else if self.hi.cmp_rational(&m) != Ordering::Greater {
                let k = max_steps(|k| match step(rn, rd, k, ln, ld) {
                    Some(q) => self.hi.cmp_rational(&q) != Ordering::Greater,
                    None => false,
                });
                rn += k * ln;
                rd += k * ld;
            } else {
                return Some(m);
            }
        }
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

fn negate(e: &Endpoint) -> Endpoint {
    match e {
        Endpoint::NegInf => Endpoint::PosInf,
        Endpoint::PosInf => Endpoint::NegInf,
        Endpoint::Finite { value } => Endpoint::Finite { value: Quad { a: -value.a, b: -value.b } },
    }
}

/// `(n + k·n') / (d + k·d')`, or `None` on overflow.
fn step(n: i64, d: i64, k: i64, n2: i64, d2: i64) -> Option<Rational> {
    let num = n.checked_add(k.checked_mul(n2)?)?;
    let den = d.checked_add(k.checked_mul(d2)?)?;
    Some(Rational::new(num, den))
}

/// Largest `k ≥ 1` with `ok(k)`, given `ok(1)`; `ok` must be monotone.
fn max_steps(ok: impl Fn(i64) -> bool) -> i64 {
    let mut hi = 2i64;
    while hi < (1 << 40) && ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The simplest rational strictly between two distinct reals.
pub fn separating_rational(lo: &Quad, hi: &Quad) -> Option<Rational> {
    OpenInterval::new(Endpoint::quad(*lo), Endpoint::quad(*hi)).simplest()
}

/// Parses `p`, `p/q`, `-p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let q = Rational::from_str(s).ok()?;
    if q.denom().is_zero() {
        return None;
    }
    Some(q.reduced())
}

/// Parses `a`, `k*sqrt2`, `a+b*sqrt2`, `a-b*sqrt2` with rational `a`, `b`.
pub fn parse_quad(s: &str) -> Option<Quad> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(stripped) = s.strip_suffix("sqrt2") else {
        return parse_rational(&s).map(Quad::rational);
    };
    let body = stripped.strip_suffix('*').unwrap_or(stripped);
    // split at the last sign that is not leading
    let split = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i).last();
    let (a, b) = match split {
        Some(i) => (parse_rational(&body[..i])?, coefficient(&body[i..])?),
        None => (Rational::zero(), coefficient(body)?),
    };
    Some(Quad::new(a, b))
}

fn coefficient(s: &str) -> Option<Rational> {
    match s {
        "" | "+" => Some(Rational::one()),
        "-" => Some(-Rational::one()),
        _ => parse_rational(s.strip_prefix('+').unwrap_or(s)),
    }
}

pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

pub mod rational_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| q.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|t| parse_rational(t).ok_or_else(|| serde::de::Error::custom(format!("bad rational {t:?}"))))
            .collect()
    }
}

pub mod quad_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Quad, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Quad, D::Error> {
        let s = String::deserialize(d)?;
        parse_quad(&s).ok_or_else(|| serde::de::Error::custom(format!("bad number {s:?}")))
    }
}

/// `v₂(k + 1)`, the ruler function.
pub fn ruler(k: u64) -> u32 {
    (k + 1).trailing_zeros()
}

/// Odd part of a positive integer.
pub fn odd_part(n: i64) -> i64 {
    let n = n.abs();
    n >> n.trailing_zeros()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn calkin_wilf_prefix() {
        let expected = [r(1, 1), r(1, 2), r(2, 1), r(1, 3), r(3, 2), r(2, 3), r(3, 1), r(1, 4)];
        for (k, q) in expected.iter().enumerate() {
            assert_eq!(calkin_wilf(k as u64), *q);
        }
    }

    #[test]
    fn calkin_wilf_roundtrip() {
        for k in 0..5000u64 {
            assert_eq!(calkin_wilf_index(&calkin_wilf(k)), Some(k));
        }
        assert_eq!(calkin_wilf_index(&r(27, 1)), Some((1 << 27) - 2));
    }

    #[test]
    fn signed_decode() {
        assert_eq!(dec_q(0), r(0, 1));
        assert_eq!(dec_q(1), r(1, 1));
        assert_eq!(dec_q(2), r(-1, 1));
        assert_eq!(dec_q(3), r(1, 2));
        for code in 0..3000 {
            assert_eq!(code_of_rational(&dec_q(code)), Some(code));
        }
    }

    #[test]
    fn pairing() {
        for i in 0..2000 {
            let (a, b) = cantor_unpair(i);
            assert_eq!(cantor_pair(a, b), Some(i));
        }
        assert_eq!(cantor_pair(3, 0), Some(6));
    }

    #[test]
    fn sqrt2_comparisons() {
        let s2 = Quad::sqrt2_multiple(1);
        assert_eq!(s2.cmp_rational(&r(1, 1)), Ordering::Greater);
        assert_eq!(s2.cmp_rational(&r(3, 2)), Ordering::Less);
        assert_eq!(Quad::sqrt2_multiple(-1).cmp_rational(&r(-1, 1)), Ordering::Less);
        assert_eq!(Quad::sqrt2_multiple(3).cmp_rational(&r(3, 1)), Ordering::Greater);
        let x = Quad::new(r(1, 1), r(-1, 1)); // 1 − √2 < 0
        assert_eq!(x.signum(), Ordering::Less);
    }

    #[test]
    fn simplest_rationals() {
        let iv = OpenInterval::new(Endpoint::sqrt2_multiple(19), Endpoint::sqrt2_multiple(21));
        assert_eq!(iv.simplest(), Some(r(27, 1)));
        let iv = OpenInterval::new(Endpoint::rational(r(0, 1)), Endpoint::rational(r(1, 1)));
        assert_eq!(iv.simplest(), Some(r(1, 2)));
        let iv = OpenInterval::new(Endpoint::NegInf, Endpoint::sqrt2_multiple(-3));
        assert_eq!(iv.simplest(), Some(r(-5, 1)));
        assert_eq!(separating_rational(&Quad::sqrt2_multiple(1), &Quad::new(r(1, 1), r(1, 1))), Some(r(2, 1)));
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_quad("3*sqrt2"), Some(Quad::sqrt2_multiple(3)));
        assert_eq!(parse_quad("1/2-1/3*sqrt2"), Some(Quad::new(r(1, 2), r(-1, 3))));
        assert_eq!(parse_quad("-sqrt2"), Some(Quad::sqrt2_multiple(-1)));
        assert_eq!(parse_quad("-7/3"), Some(Quad::rational(r(-7, 3))));
        let q = Quad::new(r(-1, 2), r(5, 7));
        assert_eq!(parse_quad(&q.to_string()), Some(q));
    }
}
