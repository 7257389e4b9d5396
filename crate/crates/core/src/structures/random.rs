//! The random poset D, built by condition dovetailing over a planted ℤ-chain.
//!
//! Even codes are chain points: code `2j` is `z_{zig(j)}`. Odd codes realize
//! conditions ⟨L,G,U⟩ and are scheduled by two lanes:
//!
//! * the canonical lane walks every condition in the canonical order (max
//!   code, then size, then code set and role vector lexicographically) and
//!   realizes the first valid one that has no realizer yet;
//! * the window lane works in rounds. Round `r` looks at windows
//!   `X_m = {x < z_m, x ≰ z_{m−1}}` with `|m| ≤ r` and members below
//!   `WINDOW_STRIDE·r`, and for every condition of size at most two over
//!   window members realizes the anchored condition whose realizers all lie
//!   inside the window.
//!
//! A realizer is placed above the down-closure of L and below the up-closure
//! of G, incomparable to everything else.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::bits::BitRow;
use super::Rel;
use crate::types_orbits::Condition;

/// One odd code in every `LANE_A_PERIOD` is offered to the canonical lane
/// first; the others go to the window lane first.
pub const LANE_A_PERIOD: u64 = 4;

/// Round `r` of the window lane covers members below `WINDOW_STRIDE·r`.
pub const WINDOW_STRIDE: usize = 25;

/// `zig(j)`: 0, 1, −1, 2, −2, …
pub fn zig(j: u64) -> i64 {
    if j == 0 {
        0
    } else if j % 2 == 1 {
        j.div_ceil(2) as i64
    } else {
        -((j / 2) as i64)
    }
}

/// Code of chain point `z_m`.
pub fn chain_code(m: i64) -> usize {
    let j = if m > 0 { 2 * m - 1 } else { -2 * m };
    2 * j as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    Canonical,
    Window,
    Idle,
}

/// A window-lane request: the condition `base` over members of `X_m`, and the
/// anchored condition actually realized.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowTask {
    pub m: i64,
    pub base: Condition,
    pub anchored: Condition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub code: usize,
    pub lane: Lane,
    pub condition: Condition,
    pub window: Option<(i64, Condition)>,
}

#[derive(Clone, Debug)]
pub struct RandomPoset {
    len: usize,
    up: Vec<BitRow>,
    down: Vec<BitRow>,
    cursor: CanonicalCursor,
    windows: WindowLane,
    log: Vec<Realization>,
    fresh: HashMap<Condition, usize>,
}

impl Default for RandomPoset {
    fn default() -> Self {
        Self::new()
    }
}

impl RandomPoset {
    pub fn new() -> Self {
        RandomPoset {
            len: 0,
            up: Vec::new(),
            down: Vec::new(),
            cursor: CanonicalCursor::default(),
            windows: WindowLane::default(),
            log: Vec::new(),
            fresh: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn relation(&self, a: usize, b: usize) -> Rel {
        assert!(a < self.len && b < self.len, "code of D is not materialized");
        if a == b {
            Rel::Eq
        } else if self.up[a].get(b) {
            Rel::Lt
        } else if self.down[a].get(b) {
            Rel::Gt
        } else {
            Rel::Inc
        }
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.up[a].get(b)
    }

    /// `{y : x < y}`.
    pub fn up_set(&self, x: usize) -> &BitRow {
        &self.up[x]
    }

    /// `{y : y < x}`.
    pub fn down_set(&self, x: usize) -> &BitRow {
        &self.down[x]
    }

    /// Fresh realizations in code order.
    pub fn realizations(&self) -> &[Realization] {
        &self.log
    }

    /// The element created for `c`, if the schedule created one.
    pub fn fresh_realizer(&self, c: &Condition) -> Option<usize> {
        self.fresh.get(c).copied()
    }

    /// Whether the canonical lane has reached `c`.
    pub fn canonical_passed(&self, c: &Condition) -> bool {
        match &self.cursor.last {
            Some(last) => c.canonical_key() <= *last,
            None => false,
        }
    }

    /// Position of the canonical lane: the last condition it looked at.
    pub fn canonical_position(&self) -> Option<Condition> {
        self.cursor.last.as_ref().map(|(_, _, codes, roles)| Condition::from_roles(codes, roles))
    }

    /// Rounds of the window lane whose task lists are exhausted.
    pub fn window_rounds_completed(&self) -> usize {
        let w = &self.windows;
        if w.queue_pos == w.queue.len() {
            w.round
        } else {
            w.round - 1
        }
    }

    pub fn valid(&self, c: &Condition) -> bool {
        c.lower.iter().all(|&l| c.upper.iter().all(|&g| self.lt(l, g)))
            && c.incomparable.iter().all(|&u| c.lower.iter().all(|&l| !self.lt(u, l)))
            && c.upper.iter().all(|&g| c.incomparable.iter().all(|&u| !self.lt(g, u)))
    }

    /// Least realizer of `c` in the prefix, by bitset intersection.
    pub fn first_realizer(&self, c: &Condition) -> Option<usize> {
        let words = self.len.div_ceil(64);
        for w in 0..words {
            let mut acc = if (w + 1) * 64 <= self.len { u64::MAX } else { (1u64 << (self.len % 64)) - 1 };
            for &l in &c.lower {
                acc &= self.up[l].word(w);
            }
            for &g in &c.upper {
                acc &= self.down[g].word(w);
            }
            for &u in &c.incomparable {
                acc &= !(self.up[u].word(w) | self.down[u].word(w));
            }
            for &x in c.lower.iter().chain(&c.upper).chain(&c.incomparable) {
                if x / 64 == w {
                    acc &= !(1u64 << (x % 64));
                }
            }
            if acc != 0 {
                return Some(w * 64 + acc.trailing_zeros() as usize);
            }
        }
        None
    }

    /// `x ∈ X_m`, given the codes of `z_m` and `z_{m−1}`.
    pub fn in_window(&self, x: usize, top: usize, bottom: usize) -> bool {
        x != bottom && self.lt(x, top) && !self.lt(x, bottom)
    }

    pub fn grow_to(&mut self, n: usize) {
        while self.len < n {
            self.push();
        }
    }

    fn push(&mut self) {
        let c = self.len;
        if c % 2 == 0 {
            self.open_row();
            self.place_chain_point(c);
            return;
        }
        // choose while the prefix is still [0, c)
        let t = (c / 2) as u64;
        let order: [Lane; 2] = if t % LANE_A_PERIOD == 0 {
            [Lane::Canonical, Lane::Window]
        } else {
            [Lane::Window, Lane::Canonical]
        };
        let picked = order.into_iter().find_map(|lane| match lane {
            Lane::Canonical => self.next_canonical(c).map(|cond| (lane, cond, None)),
            Lane::Window => self.next_window(c).map(|task| (lane, task.anchored, Some((task.m, task.base)))),
            Lane::Idle => None,
        });
        self.open_row();
        match picked {
            Some((lane, condition, window)) => {
                self.realize(c, &condition);
                self.fresh.insert(condition.clone(), c);
                self.log.push(Realization { code: c, lane, condition, window });
            }
            None => {
                self.log.push(Realization { code: c, lane: Lane::Idle, condition: Condition::default(), window: None });
            }
        }
    }

    fn open_row(&mut self) {
        self.up.push(BitRow::default());
        self.down.push(BitRow::default());
        self.len += 1;
    }

    fn place_chain_point(&mut self, c: usize) {
        let m = zig((c / 2) as u64);
        // the nearest existing chain point below (for m > 0) or above (m < 0)
        if m > 0 {
            let below = chain_code(m - 1);
            let mut down = self.down[below].clone();
            down.set(below);
            self.attach(c, &down, &BitRow::default());
        } else if m < 0 {
            let above = chain_code(m + 1);
            let mut up = self.up[above].clone();
            up.set(above);
            self.attach(c, &BitRow::default(), &up);
        }
    }

    fn realize(&mut self, c: usize, cond: &Condition) {
        let mut down = BitRow::default();
        for &l in &cond.lower {
            down.set(l);
            down.union_with(&self.down[l]);
        }
        let mut up = BitRow::default();
        for &g in &cond.upper {
            up.set(g);
            up.union_with(&self.up[g]);
        }
        self.attach(c, &down, &up);
    }

    fn attach(&mut self, c: usize, down: &BitRow, up: &BitRow) {
        for y in down.ones() {
            self.up[y].set(c);
        }
        for z in up.ones() {
            self.down[z].set(c);
        }
        self.down[c] = down.clone();
        self.up[c] = up.clone();
    }

    /// Next valid unrealized condition over codes `< c` in canonical order.
    fn next_canonical(&mut self, c: usize) -> Option<Condition> {
        let mut cursor = std::mem::take(&mut self.cursor);
        let found = loop {
            let Some(cond) = cursor.advance(self, c) else { break None };
            if self.first_realizer(&cond).is_none() {
                break Some(cond);
            }
        };
        self.cursor = cursor;
        found
    }

    fn next_window(&mut self, c: usize) -> Option<WindowTask> {
        let mut lane = std::mem::take(&mut self.windows);
        let found = loop {
            if lane.queue_pos == lane.queue.len() && !lane.start_round(self, c) {
                break None;
            }
            let task = lane.queue[lane.queue_pos].clone();
            lane.queue_pos += 1;
            if self.valid(&task.anchored) && self.first_realizer(&task.anchored).is_none() {
                break Some(task);
            }
        };
        self.windows = lane;
        found
    }
}

/// Walks conditions in canonical order, skipping invalid role prefixes.
#[derive(Clone, Debug, Default)]
struct CanonicalCursor {
    /// `(max code + 1, size, codes, roles)` of the last condition returned.
    last: Option<(usize, usize, Vec<usize>, Vec<u8>)>,
    /// Current code set and role vector; `None` before the first call.
    state: Option<(Vec<usize>, Vec<u8>)>,
}

const L: u8 = 0;
const G: u8 = 1;
const U: u8 = 2;

impl CanonicalCursor {
    /// Returns the next valid condition whose codes are all `< limit`.
    fn advance(&mut self, d: &RandomPoset, limit: usize) -> Option<Condition> {
        loop {
            let (codes, roles) = match &self.state {
                None => (Vec::new(), Vec::new()),
                Some((codes, roles)) => match next_roles(roles) {
                    Some(r) => (codes.clone(), r),
                    None => {
                        let c = next_codes(codes);
                        let n = c.len();
                        (c, vec![L; n])
                    }
                },
            };
            if codes.last().is_some_and(|&m| m >= limit) {
                // not materialized yet; stay put
                return None;
            }
            match first_conflict(d, &codes, &roles) {
                None => {
                    let cond = Condition::from_roles(&codes, &roles);
                    self.last = Some(cond.canonical_key());
                    self.state = Some((codes, roles));
                    return Some(cond);
                }
                Some(pos) => {
                    // skip every completion of roles[..=pos]
                    let mut skip = roles;
                    for r in skip.iter_mut().skip(pos + 1) {
                        *r = U;
                    }
                    self.state = Some((codes, skip));
                }
            }
        }
    }
}

/// Lexicographic successor of a role vector, `None` after all-U.
fn next_roles(roles: &[u8]) -> Option<Vec<u8>> {
    let mut r = roles.to_vec();
    for i in (0..r.len()).rev() {
        if r[i] < U {
            r[i] += 1;
            for x in r.iter_mut().skip(i + 1) {
                *x = L;
            }
            return Some(r);
        }
    }
    None
}

/// Successor code set: same max code and size, next combination of the
/// smaller codes; then next size; then next max code.
fn next_codes(codes: &[usize]) -> Vec<usize> {
    let Some((&max, rest)) = codes.split_last() else {
        return vec![0];
    };
    if let Some(mut v) = next_combination(rest, max) {
        v.push(max);
        return v;
    }
    let size = codes.len();
    if size <= max {
        let mut v: Vec<usize> = (0..size).collect();
        v.push(max);
        return v;
    }
    vec![max + 1]
}

/// Next k-subset of `[0, n)` in lexicographic order.
fn next_combination(c: &[usize], n: usize) -> Option<Vec<usize>> {
    let k = c.len();
    let mut v = c.to_vec();
    for i in (0..k).rev() {
        if v[i] < n - k + i {
            v[i] += 1;
            for j in i + 1..k {
                v[j] = v[j - 1] + 1;
            }
            return Some(v);
        }
    }
    None
}

/// Smallest position `j` such that roles `[..=j]` already violate (C1)–(C3).
fn first_conflict(d: &RandomPoset, codes: &[usize], roles: &[u8]) -> Option<usize> {
    for j in 0..codes.len() {
        for i in 0..j {
            if pair_conflict(d, codes[i], roles[i], codes[j], roles[j]) {
                return Some(j);
            }
        }
    }
    None
}

fn pair_conflict(d: &RandomPoset, a: usize, ra: u8, b: usize, rb: u8) -> bool {
    match (ra, rb) {
        (L, G) => !d.lt(a, b),
        (G, L) => !d.lt(b, a),
        (U, L) => d.lt(a, b),
        (L, U) => d.lt(b, a),
        (G, U) => d.lt(a, b),
        (U, G) => d.lt(b, a),
        _ => false,
    }
}

#[derive(Clone, Debug, Default)]
struct WindowLane {
    round: usize,
    queue: Vec<WindowTask>,
    queue_pos: usize,
    seen: HashSet<(i64, Condition)>,
}

impl WindowLane {
    /// Builds the task list of the next round if its codes are materialized.
    fn start_round(&mut self, d: &RandomPoset, limit: usize) -> bool {
        let r = self.round + 1;
        let horizon = WINDOW_STRIDE * r;
        let r = r as i64;
        if horizon > limit || chain_code(-r - 1) >= limit || chain_code(r) >= limit {
            return false;
        }
        self.round += 1;
        self.queue.clear();
        self.queue_pos = 0;
        let mut ms = vec![0i64];
        for k in 1..=r {
            ms.push(k);
            ms.push(-k);
        }
        let mut tasks = Vec::new();
        for m in ms {
            let (top, bottom) = (chain_code(m), chain_code(m - 1));
            let members: Vec<usize> = (1..horizon).step_by(2).filter(|&x| d.in_window(x, top, bottom)).collect();
            for base in small_conditions(d, &members) {
                if self.seen.insert((m, base.clone())) {
                    let anchored = anchor(&base, top, bottom);
                    tasks.push(WindowTask { m, base, anchored });
                }
            }
        }
        tasks.sort_by_key(|t| (t.base.canonical_key(), t.m.unsigned_abs(), t.m < 0));
        self.queue = tasks;
        true
    }
}

/// All valid conditions of size ≤ 2 over `members`.
fn small_conditions(d: &RandomPoset, members: &[usize]) -> Vec<Condition> {
    let mut out = vec![Condition::default()];
    for &a in members {
        for r in [L, G, U] {
            out.push(Condition::from_roles(&[a], &[r]));
        }
    }
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            for ra in [L, G, U] {
                for rb in [L, G, U] {
                    let c = Condition::from_roles(&[a, b], &[ra, rb]);
                    if d.valid(&c) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

/// The condition over D whose realizers lie in the window `(bottom, top)` and
/// realize `base`:
/// L and G nonempty: `base` itself; only G: add `bottom` to U; only L: G =
/// {top}; neither: G = {top} and `bottom` in U.
pub fn anchor(base: &Condition, top: usize, bottom: usize) -> Condition {
    let mut c = base.clone();
    match (base.lower.is_empty(), base.upper.is_empty()) {
        (false, false) => {}
        (true, false) => c.incomparable.push(bottom),
        (false, true) => c.upper.push(top),
        (true, true) => {
            c.upper.push(top);
            c.incomparable.push(bottom);
        }
    }
    c.normalize();
    c
}
