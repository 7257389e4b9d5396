//! Lazy generators for the countable ultrahomogeneous partial orders and the
//! relation oracle over their codes.

mod bits;
mod prefix;
mod random;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{cantor_pair, cantor_unpair, code_of_rational, dec_q, Rational};

pub use bits::BitRow;
pub use prefix::{load_prefix, save_prefix, save_prefix_string};
pub use random::{chain_code, zig, Lane, RandomPoset, Realization, WindowTask, LANE_A_PERIOD, WINDOW_STRIDE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Width {
    Finite(u64),
    Omega,
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Width::Finite(n) => write!(f, "{n}"),
            Width::Omega => f.write_str("w"),
        }
    }
}

impl FromStr for Width {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w" | "omega" | "ω" => Ok(Width::Omega),
            _ => match s.parse::<u64>() {
                Ok(0) => Err(Error::InvalidSpec("n must be at least 1".into())),
                Ok(n) => Ok(Width::Finite(n)),
                Err(_) => Err(Error::InvalidSpec(format!("bad width {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    AOmega,
    B(Width),
    C(Width),
    Q,
    QPlusPoint,
    D,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::AOmega => "A_omega",
            Kind::B(_) => "B",
            Kind::C(_) => "C",
            Kind::Q => "Q",
            Kind::QPlusPoint => "Q_plus_point",
            Kind::D => "D",
        }
    }

    pub fn width(&self) -> Option<Width> {
        match self {
            Kind::B(w) | Kind::C(w) => Some(*w),
            _ => None,
        }
    }

    /// Builds a kind from its name and optional width.
    pub fn from_parts(name: &str, width: Option<Width>) -> Result<Kind> {
        let kind = match (name, width) {
            ("A_omega", None) => Kind::AOmega,
            ("Q", None) => Kind::Q,
            ("Q_plus_point", None) => Kind::QPlusPoint,
            ("D", None) => Kind::D,
            ("B", Some(w)) => Kind::B(w),
            ("C", Some(w)) => Kind::C(w),
            ("B" | "C", None) => return Err(Error::InvalidSpec(format!("{name} needs a width n"))),
            ("A_omega" | "Q" | "Q_plus_point" | "D", Some(_)) => {
                return Err(Error::InvalidSpec(format!("{name} takes no width")))
            }
            _ => return Err(Error::InvalidSpec(format!("unknown kind {name:?}"))),
        };
        if let Some(Width::Finite(0)) = kind.width() {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        Ok(kind)
    }
}

/// Which structure to generate. Renders as `D`, `B(3)`, `C(w)`, ….
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StructureSpec {
    pub kind: Kind,
    pub seed: u64,
}

impl StructureSpec {
    pub fn new(kind: Kind) -> Self {
        StructureSpec { kind, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind.width() {
            Some(Width::Finite(0)) => Err(Error::InvalidSpec("n must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn is_labelled(&self) -> bool {
        self.kind != Kind::D
    }
}

impl fmt::Display for StructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.width() {
            Some(w) => write!(f, "{}({w})", self.kind.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for StructureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, width) = match s.split_once('(') {
            Some((name, rest)) => {
                let w = rest.strip_suffix(')').ok_or_else(|| Error::InvalidSpec(format!("bad spec {s:?}")))?;
                (name, Some(w.parse()?))
            }
            None => (s, None),
        };
        Ok(StructureSpec::new(Kind::from_parts(name, width)?))
    }
}

impl Serialize for StructureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StructureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Relation of the first argument to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rel {
    Lt,
    Gt,
    Inc,
    Eq,
}

impl Rel {
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Gt => Rel::Lt,
            r => r,
        }
    }

    fn of_ordering(o: std::cmp::Ordering) -> Rel {
        match o {
            std::cmp::Ordering::Less => Rel::Lt,
            std::cmp::Ordering::Greater => Rel::Gt,
            std::cmp::Ordering::Equal => Rel::Inc,
        }
    }
}

/// Semantic label of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Nat(u64),
    Rational(Rational),
    Pair { column: u64, q: Rational },
    ChainPoint(i64),
    Generic(u64),
    ReflexivePoint,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Nat(n) => write!(f, "nat {n}"),
            Label::Rational(q) => write!(f, "q {q}"),
            Label::Pair { column, q } => write!(f, "pair {column} {q}"),
            Label::ChainPoint(m) => write!(f, "chain {m}"),
            Label::Generic(t) => write!(f, "generic {t}"),
            Label::ReflexivePoint => f.write_str("reflexive"),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(' ').collect();
        let bad = || format!("bad label {s:?}");
        let rat = |t: &str| crate::rational::parse_rational(t).filter(|q| q.to_string() == t).ok_or_else(bad);
        match parts.as_slice() {
            ["nat", n] => n.parse().map(Label::Nat).map_err(|_| bad()),
            ["q", q] => rat(q).map(Label::Rational),
            ["pair", c, q] => Ok(Label::Pair { column: c.parse().map_err(|_| bad())?, q: rat(q)? }),
            ["chain", m] => m.parse().map(Label::ChainPoint).map_err(|_| bad()),
            ["generic", t] => t.parse().map(Label::Generic).map_err(|_| bad()),
            ["reflexive"] => Ok(Label::ReflexivePoint),
            _ => Err(bad()),
        }
    }
}

/// Label of `code` in a label-defined structure.
pub fn decode(kind: Kind, code: usize) -> Label {
    let code = code as u64;
    match kind {
        Kind::AOmega => Label::Nat(code),
        Kind::Q => Label::Rational(dec_q(code)),
        Kind::QPlusPoint if code == 0 => Label::ReflexivePoint,
        Kind::QPlusPoint => Label::Rational(dec_q(code - 1)),
        Kind::B(w) | Kind::C(w) => {
            let (column, qc) = match w {
                Width::Finite(n) => (code % n, code / n),
                Width::Omega => cantor_unpair(code),
            };
            Label::Pair { column, q: dec_q(qc) }
        }
        Kind::D => {
            if code % 2 == 0 {
                Label::ChainPoint(zig(code / 2))
            } else {
                Label::Generic(code / 2)
            }
        }
    }
}

/// Inverse of [`decode`]; `None` if the label does not occur or its code
/// overflows.
pub fn encode(kind: Kind, label: &Label) -> Option<usize> {
    let code = match (kind, label) {
        (Kind::AOmega, Label::Nat(n)) => *n,
        (Kind::Q, Label::Rational(q)) => code_of_rational(q)?,
        (Kind::QPlusPoint, Label::ReflexivePoint) => 0,
        (Kind::QPlusPoint, Label::Rational(q)) => code_of_rational(q)?.checked_add(1)?,
        (Kind::B(w) | Kind::C(w), Label::Pair { column, q }) => {
            let qc = code_of_rational(q)?;
            match w {
                Width::Finite(n) if *column < n => qc.checked_mul(n)?.checked_add(*column)?,
                Width::Finite(_) => return None,
                Width::Omega => cantor_pair(*column, qc)?,
            }
        }
        (Kind::D, Label::ChainPoint(m)) => chain_code(*m) as u64,
        (Kind::D, Label::Generic(t)) => t.checked_mul(2)?.checked_add(1)?,
        _ => return None,
    };
    usize::try_from(code).ok()
}

fn label_relation(kind: Kind, a: &Label, b: &Label) -> Rel {
    match (a, b) {
        (Label::Rational(p), Label::Rational(q)) => Rel::of_ordering(p.cmp(q)),
        (Label::Pair { column: c1, q: p }, Label::Pair { column: c2, q }) => match kind {
            Kind::B(_) if c1 != c2 => Rel::Inc,
            _ => Rel::of_ordering(p.cmp(q)),
        },
        _ => Rel::Inc,
    }
}

/// A lazily materialized countable structure.
#[derive(Clone, Debug)]
pub struct UhStructure {
    spec: StructureSpec,
    labels: Vec<Label>,
    random: Option<RandomPoset>,
}

pub fn make_structure(spec: StructureSpec) -> Result<UhStructure> {
    spec.validate()?;
    Ok(UhStructure {
        spec,
        labels: Vec::new(),
        random: (spec.kind == Kind::D).then(RandomPoset::new),
    })
}

impl UhStructure {
    /// Shorthand for `make_structure` followed by `materialize`.
    pub fn build(spec: StructureSpec, n: usize) -> Result<UhStructure> {
        let mut s = make_structure(spec)?;
        s.materialize(n);
        Ok(s)
    }

    pub fn spec(&self) -> StructureSpec {
        self.spec
    }

    pub fn kind(&self) -> Kind {
        self.spec.kind
    }

    /// Number of materialized elements.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn materialize(&mut self, n: usize) {
        if let Some(d) = self.random.as_mut() {
            d.grow_to(n);
        }
        let kind = self.spec.kind;
        for code in self.labels.len()..n {
            self.labels.push(decode(kind, code));
        }
    }

    /// Whether relations involving `code` can be answered. Label-defined
    /// structures answer for every code; D only inside its prefix.
    pub fn is_decided(&self, code: usize) -> bool {
        code < self.len() || self.spec.is_labelled()
    }

    pub fn check_decided(&self, code: usize) -> Result<()> {
        if self.is_decided(code) {
            Ok(())
        } else {
            Err(Error::NotMaterialized { code, materialized: self.len() })
        }
    }

    pub fn label(&self, code: usize) -> Label {
        match self.labels.get(code) {
            Some(l) => *l,
            None => {
                assert!(self.spec.is_labelled(), "code {code} of D is not materialized");
                decode(self.spec.kind, code)
            }
        }
    }

    pub fn code_of(&self, label: &Label) -> Option<usize> {
        encode(self.spec.kind, label)
    }

    /// Relation of `a` to `b`. Panics on unmaterialized codes of D.
    pub fn relation(&self, a: usize, b: usize) -> Rel {
        if a == b {
            return Rel::Eq;
        }
        match &self.random {
            Some(d) => d.relation(a, b),
            None => label_relation(self.spec.kind, &self.label(a), &self.label(b)),
        }
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.relation(a, b) == Rel::Lt
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.lt(a, b)
    }

    /// The reflexive loop of the extra point in `Q_plus_point`.
    pub fn has_loop(&self, x: usize) -> bool {
        self.spec.kind == Kind::QPlusPoint && x == 0
    }

    pub fn random_poset(&self) -> Option<&RandomPoset> {
        self.random.as_ref()
    }

    /// Code of chain point `z_m` of D, if materialized.
    pub fn chain_point(&self, m: i64) -> Result<usize> {
        if self.spec.kind != Kind::D {
            return Err(Error::Unsupported(format!("{} has no planted chain", self.spec)));
        }
        let c = chain_code(m);
        if c < self.len() {
            Ok(c)
        } else {
            Err(Error::MissingChainPoint(m))
        }
    }

    /// Exhaustive strict-order check of the prefix; returns the first violation.
    pub fn check_poset_axioms(&self) -> std::result::Result<(), String> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                let r = self.relation(a, b);
                if a == b {
                    continue;
                }
                if r == Rel::Eq {
                    return Err(format!("distinct codes {a}, {b} compare equal"));
                }
                if self.relation(b, a) != r.flip() {
                    return Err(format!("antisymmetry violated at ({a},{b})"));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !self.lt(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.lt(b, c) && !self.lt(a, c) {
                        return Err(format!("transitivity violated at ({a},{c})"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn spec_roundtrip() {
        for s in ["A_omega", "B(3)", "B(w)", "C(2)", "C(w)", "Q", "Q_plus_point", "D"] {
            assert_eq!(s.parse::<StructureSpec>().unwrap().to_string(), s);
        }
        assert!("B(0)".parse::<StructureSpec>().is_err());
        assert!("B".parse::<StructureSpec>().is_err());
        assert!("E".parse::<StructureSpec>().is_err());
    }

    #[test]
    fn rational_relation() {
        let s = UhStructure::build(StructureSpec::new(Kind::Q), 10).unwrap();
        assert_eq!(s.label(3), Label::Rational(q(1, 2)));
        assert_eq!(s.relation(3, 1), Rel::Lt);
    }

    #[test]
    fn column_orders() {
        let c2 = UhStructure::build(StructureSpec::new(Kind::C(Width::Finite(2))), 10).unwrap();
        let a = c2.code_of(&Label::Pair { column: 0, q: q(0, 1) }).unwrap();
        let b = c2.code_of(&Label::Pair { column: 1, q: q(1, 2) }).unwrap();
        assert_eq!(c2.relation(a, b), Rel::Lt);
        let b2 = UhStructure::build(StructureSpec::new(Kind::B(Width::Finite(2))), 6).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                if x % 2 != y % 2 {
                    assert_eq!(b2.relation(x, y), Rel::Inc);
                }
            }
        }
    }

    #[test]
    fn labels_roundtrip() {
        let kinds = [
            Kind::AOmega,
            Kind::Q,
            Kind::QPlusPoint,
            Kind::B(Width::Finite(3)),
            Kind::C(Width::Omega),
            Kind::D,
        ];
        for kind in kinds {
            for code in 0..500 {
                let l = decode(kind, code);
                assert_eq!(encode(kind, &l), Some(code));
                assert_eq!(l.to_string().parse::<Label>(), Ok(l));
            }
        }
    }

    #[test]
    fn empty_relation() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 20).unwrap();
        assert!((0..20).all(|i| (0..20).all(|j| i == j || s.relation(i, j) == Rel::Inc)));
    }
}
