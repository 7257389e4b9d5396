//! Diagonalization against a countable antichain of the countable support
//! product of finite pointed posets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{cantor_pair, cantor_unpair};

/// A finite poset on `0..size` whose minimum is `0`; `le[a][b]` is `a ≤ b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePoset {
    pub le: Vec<Vec<bool>>,
}

impl FinitePoset {
    pub fn chain(size: usize) -> Self {
        FinitePoset { le: (0..size).map(|a| (0..size).map(|b| a <= b).collect()).collect() }
    }

    pub fn size(&self) -> usize {
        self.le.len()
    }

    pub fn is_valid(&self) -> bool {
        let n = self.size();
        n >= 2 && (0..n).all(|b| self.le[0][b]) && (0..n).all(|a| self.le[a][a])
    }

    /// `∃ b ≠ 0: b ≤ x ∧ b ≤ y`.
    pub fn meet_positive(&self, x: u8, y: u8) -> bool {
        (1..self.size()).any(|b| self.le[b][x as usize] && self.le[b][y as usize])
    }
}

/// A countable family `a^0, a^1, …` of elements of the product, given by
/// component values.
pub trait ProductFamily {
    fn name(&self) -> String;
    fn factor(&self, i: u64) -> FinitePoset;
    /// Value of `a^n` at index `i`; `0` is the factor's minimum.
    fn component(&self, n: usize, i: u64) -> u8;
}

/// `a^n` = indicator of the Cantor column `{⟨n, k⟩ : k ∈ ω}`.
pub struct CantorColumns;

impl ProductFamily for CantorColumns {
    fn name(&self) -> String {
        "cantor_columns".into()
    }
    fn factor(&self, _: u64) -> FinitePoset {
        FinitePoset::chain(2)
    }
    fn component(&self, n: usize, i: u64) -> u8 {
        u8::from(cantor_unpair(i).0 == n as u64)
    }
}

/// `a^n` = Cantor column `n` together with the indices `0..=n`.
pub struct ColumnsWithOverlap;

impl ProductFamily for ColumnsWithOverlap {
    fn name(&self) -> String {
        "columns_with_overlap".into()
    }
    fn factor(&self, _: u64) -> FinitePoset {
        FinitePoset::chain(2)
    }
    fn component(&self, n: usize, i: u64) -> u8 {
        u8::from(cantor_unpair(i).0 == n as u64 || i <= n as u64)
    }
}

/// Nodes of the binary tree indexed breadth-first (`s ↦ 2^|s| − 1 + s`);
/// `a^n` = the nodes on the branch `0^n 1^ω`.
pub struct TreeBranches;

impl TreeBranches {
    /// The branch node at depth `d`.
    pub fn node(n: usize, d: u32) -> u64 {
        let ones = d.saturating_sub(n as u32);
        (1u64 << d) - 1 + ((1u64 << ones) - 1)
    }
}

impl ProductFamily for TreeBranches {
    fn name(&self) -> String {
        "tree_branches".into()
    }
    fn factor(&self, _: u64) -> FinitePoset {
        FinitePoset::chain(2)
    }
    fn component(&self, n: usize, i: u64) -> u8 {
        let d = 63 - (i + 1).leading_zeros();
        u8::from(TreeBranches::node(n, d) == i)
    }
}

pub fn family_by_name(name: &str) -> Option<Box<dyn ProductFamily>> {
    match name {
        "cantor_columns" => Some(Box::new(CantorColumns)),
        "columns_with_overlap" => Some(Box::new(ColumnsWithOverlap)),
        "tree_branches" => Some(Box::new(TreeBranches)),
        _ => None,
    }
}

pub const FAMILIES: [&str; 3] = ["cantor_columns", "columns_with_overlap", "tree_branches"];

/// At index `i_n` the components of `a^m` and `a^n` have no common positive
/// lower bound, so `c` (which agrees with `a^n` there) and `a^m` do not meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalCert {
    pub m: usize,
    pub n: usize,
    pub index: u64,
    pub a_m: u8,
    pub a_n: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagonal {
    pub family: String,
    pub indices: Vec<u64>,
    /// `c` on `0..=max(indices)`.
    pub values: Vec<u8>,
    pub certificates: Vec<DiagonalCert>,
}

/// Scan limit for each `i_n`.
pub const SCAN_LIMIT: u64 = 1 << 22;

/// `i_n = min(supp(a^n) ∖ ({i_0..i_{n−1}} ∪ K_{0,n} ∪ … ∪ K_{n−1,n}))` with
/// `K_{m,n}` the indices where `a^m` and `a^n` have a common positive lower
/// bound; `c_{i_n} = a^n_{i_n}` and `c` is `0` elsewhere.
pub fn cs_diagonal(family: &dyn ProductFamily, depth: usize) -> Result<Diagonal> {
    let mut indices: Vec<u64> = Vec::with_capacity(depth);
    for n in 0..depth {
        let mut found = None;
        for i in 0..SCAN_LIMIT {
            let v = family.component(n, i);
            if v == 0 || indices.contains(&i) {
                continue;
            }
            let f = family.factor(i);
            if (0..n).any(|m| f.meet_positive(family.component(m, i), v)) {
                continue;
            }
            found = Some(i);
            break;
        }
        indices.push(found.ok_or(Error::SupportTooSparse { n })?);
    }
    let top = indices.iter().copied().max().map_or(0, |t| t + 1);
    let mut values = vec![0u8; top as usize];
    for (n, &i) in indices.iter().enumerate() {
        values[i as usize] = family.component(n, i);
    }
    let mut certificates = Vec::new();
    for (n, &i) in indices.iter().enumerate() {
        for m in 0..n {
            certificates.push(DiagonalCert { m, n, index: i, a_m: family.component(m, i), a_n: family.component(n, i) });
        }
    }
    Ok(Diagonal { family: family.name(), indices, values, certificates })
}

/// `⟨n, 0⟩` under the pinned pairing.
pub fn column_head(n: u64) -> u64 {
    cantor_pair(n, 0).expect("small column")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_columns_hit_heads() {
        let d = cs_diagonal(&CantorColumns, 12).unwrap();
        let heads: Vec<u64> = (0..12).map(column_head).collect();
        assert_eq!(d.indices, heads);
        for (i, &v) in d.values.iter().enumerate() {
            assert_eq!(v == 1, heads.contains(&(i as u64)));
        }
    }

    #[test]
    fn tree_branch_nodes() {
        // branch 0^1 1^ω: root, 0, 01, 011, ...
        assert_eq!(TreeBranches::node(1, 0), 0);
        assert_eq!(TreeBranches::node(1, 1), 1);
        assert_eq!(TreeBranches::node(1, 2), 4);
        assert_eq!(TreeBranches::node(1, 3), 10);
        let d = cs_diagonal(&TreeBranches, 12).unwrap();
        assert!(d.certificates.iter().all(|c| !FinitePoset::chain(2).meet_positive(c.a_m, c.a_n)));
    }

    #[test]
    fn overlap_family_avoids_overlap() {
        let d = cs_diagonal(&ColumnsWithOverlap, 12).unwrap();
        for (n, &i) in d.indices.iter().enumerate() {
            assert_eq!(ColumnsWithOverlap.component(n, i), 1);
            assert!((0..n).all(|m| ColumnsWithOverlap.component(m, i) == 0));
        }
    }
}
