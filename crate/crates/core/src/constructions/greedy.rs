//! The triangular table `m[n][k]` and the partition into large copies.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::copies::SetDescriptor;
use crate::error::{Error, Result};
use crate::structures::UhStructure;
use crate::types_orbits::enumerate_orbits;

/// `m[n][k]` for `n < rows`, `n ≤ k < horizon`: the least member of `O_n`
/// not used by an earlier column, or by an earlier row of the same column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyTable {
    pub rows: usize,
    pub horizon: usize,
    /// Search limit for orbit members.
    pub bound: usize,
    pub orbits: Vec<SetDescriptor>,
    /// `entries[n][j] = m[n][n + j]`.
    pub entries: Vec<Vec<usize>>,
    #[serde(skip)]
    used: HashSet<usize>,
    #[serde(skip)]
    cursor: Vec<usize>,
}

impl GreedyTable {
    pub fn new(orbits: Vec<SetDescriptor>, bound: usize) -> Self {
        let rows = orbits.len();
        GreedyTable {
            rows,
            horizon: 0,
            bound,
            orbits,
            entries: vec![Vec::new(); rows],
            used: HashSet::new(),
            cursor: vec![0; rows],
        }
    }

    pub fn get(&self, n: usize, k: usize) -> Option<usize> {
        k.checked_sub(n).and_then(|j| self.entries.get(n)?.get(j)).copied()
    }

    /// Row `n` in column order.
    pub fn row(&self, n: usize) -> &[usize] {
        &self.entries[n]
    }

    /// Appends columns until `horizon` is reached.
    pub fn extend_to(&mut self, s: &UhStructure, horizon: usize) -> Result<()> {
        let orbits = self.orbits.clone();
        self.extend_with(horizon, |n, x| orbits[n].member(s, x))
    }

    /// As [`extend_to`](Self::extend_to) with a caller-supplied membership
    /// test for the orbits.
    pub fn extend_with(&mut self, horizon: usize, mut member: impl FnMut(usize, usize) -> Result<bool>) -> Result<()> {
        while self.horizon < horizon {
            let k = self.horizon;
            for n in 0..self.rows.min(k + 1) {
                let mut x = self.cursor[n];
                loop {
                    if x >= self.bound {
                        return Err(Error::OrbitExhausted { n, k });
                    }
                    if !self.used.contains(&x) && member(n, x)? {
                        break;
                    }
                    x += 1;
                }
                self.used.insert(x);
                self.entries[n].push(x);
                self.cursor[n] = x + 1;
            }
            self.horizon += 1;
        }
        Ok(())
    }

    /// Appends whole columns until one cannot be completed under the bound;
    /// the incomplete column is discarded. Returns the new horizon.
    pub fn extend_maximal(&mut self, s: &UhStructure) -> Result<usize> {
        loop {
            let saved = (self.entries.clone(), self.used.clone(), self.cursor.clone());
            match self.extend_to(s, self.horizon + 1) {
                Ok(()) => {}
                Err(Error::OrbitExhausted { .. }) => {
                    (self.entries, self.used, self.cursor) = saved;
                    return Ok(self.horizon);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Least code not used by the table: every smaller code is an entry.
    pub fn cover_bound(&self) -> usize {
        (0..).find(|x| !self.used.contains(x)).unwrap_or(0)
    }

    /// Entries on diagonal `i`: `m[n][n + i]` for every row that reaches it.
    pub fn diagonal(&self, i: usize) -> Vec<usize> {
        self.entries.iter().filter_map(|row| row.get(i).copied()).collect()
    }
}

impl GreedyTable {
    fn rebuild_state(&mut self) {
        self.used = self.entries.iter().flatten().copied().collect();
        self.cursor = self.entries.iter().map(|r| r.last().map_or(0, |&x| x + 1)).collect();
    }

    /// Restores the internal search state after deserialization.
    pub fn restored(mut self) -> Self {
        self.rebuild_state();
        self
    }
}

pub fn greedy_table(s: &UhStructure, orbits: Vec<SetDescriptor>, horizon: usize, bound: usize) -> Result<GreedyTable> {
    let mut t = GreedyTable::new(orbits, bound);
    t.extend_to(s, horizon)?;
    Ok(t)
}

/// Partition pieces together with the table that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub table: GreedyTable,
    pub pieces: Vec<SetDescriptor>,
    /// Every code below this lies in some piece.
    pub cover_bound: usize,
}

/// Default number of columns: each residue class gets four diagonals per row.
pub fn default_horizon(rows: usize, pieces: usize) -> usize {
    rows + 4 * pieces
}

/// Builds the table over the first `rows` orbits with as many columns as the
/// bound allows (at least the default horizon) and groups the diagonals
/// `A_i = {m[n][n+i]}` into `pieces` residue classes.
pub fn partition_large_copies(s: &UhStructure, pieces: usize, rows: usize, bound: usize) -> Result<Partition> {
    let orbits = first_rows(s, rows, bound)?;
    let mut table = greedy_table(s, orbits, default_horizon(rows, pieces), bound)?;
    table.extend_maximal(s)?;
    group(table, pieces)
}

pub fn partition_with_horizon(s: &UhStructure, pieces: usize, rows: usize, horizon: usize, bound: usize) -> Result<Partition> {
    let orbits = first_rows(s, rows, bound)?;
    group(greedy_table(s, orbits, horizon, bound)?, pieces)
}

fn first_rows(s: &UhStructure, rows: usize, bound: usize) -> Result<Vec<SetDescriptor>> {
    let orbits: Vec<SetDescriptor> = enumerate_orbits(s, bound).take(rows).map(|o| o.descriptor()).collect();
    if orbits.len() < rows {
        return Err(Error::OrbitExhausted { n: orbits.len(), k: 0 });
    }
    Ok(orbits)
}

fn group(table: GreedyTable, pieces: usize) -> Result<Partition> {
    if pieces == 0 {
        return Err(Error::Unsupported("pieces must be at least 1".into()));
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); pieces];
    for i in 0..table.horizon {
        groups[i % pieces].extend(table.diagonal(i));
    }
    let pieces = groups
        .into_iter()
        .enumerate()
        .map(|(j, codes)| SetDescriptor::recorded(format!("piece {j}"), codes))
        .collect();
    let cover_bound = table.cover_bound();
    Ok(Partition { table, pieces, cover_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{Kind, StructureSpec};

    #[test]
    fn evens_and_odds() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 1).unwrap();
        let orbits = vec![SetDescriptor::named("evens").unwrap(), SetDescriptor::named("odds").unwrap()];
        let t = greedy_table(&s, orbits, 3, 100).unwrap();
        assert_eq!(t.entries, vec![vec![0, 2, 4], vec![1, 3]]);
        assert_eq!(t.get(1, 2), Some(3));
        assert_eq!(t.get(1, 0), None);
    }

    #[test]
    fn single_orbit_is_identity() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 1).unwrap();
        let t = greedy_table(&s, vec![SetDescriptor::everything()], 7, 100).unwrap();
        assert_eq!(t.row(0), &[0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn exhaustion_names_position() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 1).unwrap();
        let err = greedy_table(&s, vec![SetDescriptor::named("evens").unwrap()], 10, 10).unwrap_err();
        assert!(matches!(err, Error::OrbitExhausted { n: 0, k: 5 }));
    }

    #[test]
    fn a_omega_two_pieces() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 1).unwrap();
        let p = partition_large_copies(&s, 2, 4, 1000).unwrap();
        let a = p.pieces[0].enumerate(&s, 1000).unwrap();
        let b = p.pieces[1].enumerate(&s, 1000).unwrap();
        assert!(a.iter().all(|x| !b.contains(x)));
        assert!((0..p.cover_bound).all(|x| a.contains(&x) || b.contains(&x)));
        assert!(p.cover_bound >= 8);
    }
}
