//! The bounded acceptance runs with their parameters pinned.

use std::time::Instant;

use super::{
    check_ad, check_antichain, check_genericity, check_large, check_maximality_evidence, check_partition, check_poset,
    check_windows, replay, Check, Family, Report, Witness,
};
use crate::constructions::{
    bn_antichain, cn_lift_antichain, cs_diagonal, family_by_name, partition_large_copies, q_interval_antichain, AdFamily,
    AdParams, FiberMap, FAMILIES,
};
use crate::copies::{check_copy, partial_iso_violation, Status};
use crate::error::Result;
use crate::rational::{Quad, Rational};
use crate::structures::{load_prefix, save_prefix_string, Kind, StructureSpec, UhStructure, Width};
use crate::types_orbits::orbit_member;

pub const POSET_SPECS: [&str; 7] = ["A_omega", "B(3)", "B(w)", "C(3)", "C(w)", "Q", "D"];
pub const POSET_SIZE: usize = 300;

pub const GENERIC_PREFIX: usize = 5000;
pub const GENERIC_FIRST: usize = 8;
pub const GENERIC_MAX_SIZE: usize = 3;

pub const ORACLE_SIZE: usize = 12;
pub const ORACLE_F_MAX: usize = 2;

pub const PARTITION_ROWS: usize = 10;
pub const PARTITION_PIECES: usize = 4;
pub const PARTITION_BOUND: usize = 2000;
pub const PARTITION_PER_ORBIT: usize = 3;

pub const AD_N_D: usize = 8;
pub const AD_LENGTH: usize = 64;
pub const AD_FROM: usize = 32;
pub const AD_TOLERANCE: (i64, i64) = (1, 32);
pub const AD_PER_FIBER: usize = 5;
pub const AD_TABLE_BOUND: usize = 1 << 22;

pub const INTERVAL_RANGE: i64 = 10;
pub const INTERVAL_F_MAX: usize = 2;
pub const INTERVAL_X_BOUND: usize = 200;
pub const INTERVAL_SEARCH_BOUND: usize = 5000;
pub const INTERVAL_SEEDS: u64 = 50;

pub const DIAGONAL_DEPTH: usize = 13;

pub const LIFT_WIDTHS: [u64; 2] = [2, 3];
pub const LIFT_SEEDS: u64 = 20;

pub const WINDOW_PREFIX: usize = 3000;
pub const WINDOW_RANGE: i64 = 4;
pub const WINDOW_FIRST: usize = 100;
pub const WINDOW_MAX_SIZE: usize = 2;
pub const WINDOW_SEEDS: u64 = 20;

pub const SAMPLE_BOUND: usize = 300;
pub const ROUND_TRIP_SIZE: usize = 500;
pub const ROUND_TRIP_SPECS: [&str; 8] = ["A_omega", "B(3)", "B(w)", "C(3)", "C(w)", "Q", "Q_plus_point", "D"];

/// Targets `a + b√2` for `a ∈ −2..=2`, `b ∈ {−2, −1, 1, 2}`; all irrational.
pub fn ad_targets() -> Vec<Quad> {
    let mut out = Vec::new();
    for a in -2..=2 {
        for b in [-2, -1, 1, 2] {
            out.push(Quad::new(Rational::from_integer(a), Rational::from_integer(b)));
        }
    }
    out
}

fn build(spec: &str, n: usize) -> Result<UhStructure> {
    UhStructure::build(spec.parse()?, n)
}

fn clock(timing: bool) -> Option<Instant> {
    timing.then(Instant::now)
}

fn tag(mut r: Report, criterion: u32) -> Report {
    for c in &mut r.checks {
        c.params.insert("criterion".into(), criterion.into());
    }
    r
}

/// Runs one numbered criterion. Criterion 10 replays `earlier` (the reports
/// of criteria 4 to 9) besides the round trips.
pub fn run(criterion: u32, timing: bool) -> Result<Report> {
    let r = match criterion {
        1 => posets(timing)?,
        2 => genericity(timing)?,
        3 => oracle(timing)?,
        4 => partition(timing)?,
        5 => ad_family(timing)?,
        6 => intervals(timing)?,
        7 => diagonals(timing)?,
        8 => lifts(timing)?,
        9 => windows(timing)?,
        10 => {
            let mut earlier = Report::new();
            for c in 4..=9 {
                earlier.extend(run(c, false)?);
            }
            let mut r = round_trips(timing)?;
            r.push(replay_all(&earlier, timing));
            r
        }
        _ => return Err(crate::error::Error::Unsupported(format!("no criterion {criterion}"))),
    };
    Ok(tag(r, criterion))
}

pub fn posets(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let mut r = Report::new();
    for spec in POSET_SPECS {
        r.push(check_poset(&build(spec, POSET_SIZE)?));
    }
    if let Some(last) = r.checks.last_mut() {
        last.elapsed = start.map(|t| t.elapsed().as_secs_f64());
    }
    Ok(r)
}

pub fn genericity(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let s = build("D", GENERIC_PREFIX)?;
    let check = check_genericity(&s, GENERIC_FIRST, GENERIC_MAX_SIZE)?.timed(start);
    let mut r = Report::new();
    r.push(check);
    Ok(r)
}

/// Orbit membership against partial-isomorphism of `id_F ∪ {(x, y)}` on the
/// truncation, over every `F` with `|F| ≤ 2` and every pair outside `F`.
pub fn oracle(timing: bool) -> Result<Report> {
    let mut r = Report::new();
    for spec in ["Q", "D"] {
        let start = clock(timing);
        let s = build(spec, ORACLE_SIZE)?;
        let mut check = Check::new("orbit_oracle").param("structure", spec).bound("prefix", ORACLE_SIZE);
        let mut pairs = 0;
        let mut disagreements = Vec::new();
        for base in subsets(ORACLE_SIZE, ORACLE_F_MAX) {
            for x in (0..ORACLE_SIZE).filter(|x| !base.contains(x)) {
                for y in (0..ORACLE_SIZE).filter(|y| !base.contains(y)) {
                    pairs += 1;
                    let mut map: Vec<(usize, usize)> = base.iter().map(|&f| (f, f)).collect();
                    map.push((x, y));
                    let iso = partial_iso_violation(&s, &map).is_none();
                    if orbit_member(&s, &base, x, y)? != iso {
                        disagreements.push(Witness::CopyFailure {
                            base: base.clone(),
                            x,
                            reason: format!("orbit membership of {y} disagrees with the partial isomorphism test"),
                        });
                    }
                }
            }
        }
        check = check.param("pairs", pairs).param("disagreements", disagreements.len());
        if !disagreements.is_empty() {
            check.fail_many(disagreements);
        }
        r.push(check.timed(start));
    }
    Ok(r)
}

/// Subsets of `0..n` with at most `k` elements, size-major then lex.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for set in &layer {
            let from = set.last().map_or(0, |&l: &usize| l + 1);
            for x in from..n {
                let mut t = set.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn partition(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let s = build("D", PARTITION_BOUND)?;
    let p = partition_large_copies(&s, PARTITION_PIECES, PARTITION_ROWS, PARTITION_BOUND)?;
    let mut r = Report::new();
    r.push(check_partition(&s, &p.pieces, p.cover_bound)?);
    for piece in &p.pieces {
        r.push(check_large(&s, piece, PARTITION_ROWS, PARTITION_PER_ORBIT, PARTITION_BOUND)?);
    }
    if let Some(last) = r.checks.last_mut() {
        last.elapsed = start.map(|t| t.elapsed().as_secs_f64());
    }
    Ok(r)
}

pub fn ad_family(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let s = build("Q", 1)?;
    let mut fam = AdFamily::new(&s, AD_N_D, AD_TABLE_BOUND)?;
    let members = ad_targets()
        .into_iter()
        .map(|target| fam.member(AdParams { target, n_d: AD_N_D, fiber: FiberMap::RoundRobin }, AD_LENGTH))
        .collect::<Result<Vec<_>>>()?;
    let tol = Rational::new(AD_TOLERANCE.0, AD_TOLERANCE.1);
    let mut r = check_ad(&members, AD_FROM, tol, AD_PER_FIBER);
    if let Some(last) = r.checks.last_mut() {
        last.elapsed = start.map(|t| t.elapsed().as_secs_f64());
    }
    Ok(r)
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

pub fn intervals(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let s = build("Q", 1)?;
    let members = q_interval_antichain(-INTERVAL_RANGE, INTERVAL_RANGE);
    let mut r = check_antichain(&s, &members, INTERVAL_SEARCH_BOUND)?;
    for (i, m) in members.iter().enumerate() {
        let v = check_copy(&s, m, INTERVAL_F_MAX, INTERVAL_X_BOUND, INTERVAL_SEARCH_BOUND)?;
        let mut c = Check::new("member_is_copy")
            .param("structure", "Q")
            .param("member", i)
            .param("set", m.summary())
            .bound("prefix", s.len())
            .bound("f_max", INTERVAL_F_MAX)
            .bound("x_bound", INTERVAL_X_BOUND);
        match v.status {
            Status::Pass => {}
            Status::Fail => c.fail_many(v.witness.into_iter().collect()),
            Status::UnknownAtBound => c.unknown(v.witness.into_iter().collect()),
        }
        r.push(c);
    }
    r.extend(check_maximality_evidence(
        &s,
        &Family::Intervals(members),
        &seeds(INTERVAL_SEEDS),
        SAMPLE_BOUND,
        INTERVAL_SEARCH_BOUND,
    )?);
    if let Some(last) = r.checks.last_mut() {
        last.elapsed = start.map(|t| t.elapsed().as_secs_f64());
    }
    Ok(r)
}

pub fn diagonals(timing: bool) -> Result<Report> {
    let mut r = Report::new();
    for name in FAMILIES {
        let start = clock(timing);
        let fam = family_by_name(name).expect("listed family");
        let mut check = Check::new("diagonal").param("family", name).param("depth", DIAGONAL_DEPTH);
        let d = cs_diagonal(fam.as_ref(), DIAGONAL_DEPTH)?;
        check = check.param("indices", &d.indices);
        for c in d.certificates {
            let w = Witness::DiagonalIndex { family: name.into(), m: c.m, n: c.n, index: c.index, a_m: c.a_m, a_n: c.a_n };
            if fam.factor(c.index).meet_positive(c.a_m, c.a_n) {
                check.fail(w);
            } else {
                check.certify(w);
            }
        }
        r.push(check.timed(start));
    }
    Ok(r)
}

pub fn lifts(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let base = q_interval_antichain(-INTERVAL_RANGE, INTERVAL_RANGE);
    let mut r = Report::new();
    for n in LIFT_WIDTHS {
        let sb = UhStructure::build(StructureSpec::new(Kind::B(Width::Finite(n))), 1)?;
        let members = bn_antichain(&base, Width::Finite(n))?;
        r.extend(check_antichain(&sb, &members, INTERVAL_SEARCH_BOUND)?);
        let fam = Family::Bn { members, base: base.clone() };
        r.extend(check_maximality_evidence(&sb, &fam, &seeds(LIFT_SEEDS), SAMPLE_BOUND, INTERVAL_SEARCH_BOUND)?);

        let sc = UhStructure::build(StructureSpec::new(Kind::C(Width::Finite(n))), 1)?;
        let members = cn_lift_antichain(&base);
        r.extend(check_antichain(&sc, &members, INTERVAL_SEARCH_BOUND)?);
        let fam = Family::Cn { members, base: base.clone() };
        r.extend(check_maximality_evidence(&sc, &fam, &seeds(LIFT_SEEDS), SAMPLE_BOUND, INTERVAL_SEARCH_BOUND)?);
    }
    let mut refuse = Check::new("omega_lift_refused").param("structure", "B(w)");
    match bn_antichain(&base, Width::Omega) {
        Err(crate::error::Error::Refused(reason)) => refuse = refuse.param("reason", reason),
        _ => refuse.fail(Witness::PosetViolation { message: "the B(w) lift was not refused".into() }),
    }
    r.push(refuse.timed(start));
    Ok(r)
}

pub fn windows(timing: bool) -> Result<Report> {
    let start = clock(timing);
    let s = build("D", WINDOW_PREFIX)?;
    let mut r = check_windows(&s, -WINDOW_RANGE, WINDOW_RANGE, WINDOW_FIRST, WINDOW_MAX_SIZE)?;
    let fam = Family::Windows { lo: -WINDOW_RANGE, hi: WINDOW_RANGE };
    r.extend(check_maximality_evidence(&s, &fam, &seeds(WINDOW_SEEDS), SAMPLE_BOUND, WINDOW_PREFIX)?);
    if let Some(last) = r.checks.last_mut() {
        last.elapsed = start.map(|t| t.elapsed().as_secs_f64());
    }
    Ok(r)
}

/// Two independent builds of every structure save the same bytes, and a
/// load of the saved text saves them again.
pub fn round_trips(timing: bool) -> Result<Report> {
    let mut r = Report::new();
    for spec in ROUND_TRIP_SPECS {
        let start = clock(timing);
        let mut check = Check::new("round_trip").param("structure", spec).bound("size", ROUND_TRIP_SIZE);
        let first = save_prefix_string(&build(spec, ROUND_TRIP_SIZE)?, ROUND_TRIP_SIZE)?;
        let second = save_prefix_string(&build(spec, ROUND_TRIP_SIZE)?, ROUND_TRIP_SIZE)?;
        let loaded = load_prefix(first.as_bytes())?;
        let third = save_prefix_string(&loaded, ROUND_TRIP_SIZE)?;
        if first != second {
            check.fail(Witness::PosetViolation { message: "two builds saved different bytes".into() });
        }
        if first != third {
            check.fail(Witness::PosetViolation { message: "load then save changed the bytes".into() });
        }
        r.push(check.param("bytes", first.len()).timed(start));
    }
    Ok(r)
}

/// Replays every witness of `earlier`; passes iff each replayed check does.
pub fn replay_all(earlier: &Report, timing: bool) -> Check {
    let start = clock(timing);
    let replayed = replay(earlier);
    let witnesses: usize = earlier.checks.iter().map(|c| c.witnesses.len()).sum();
    let mut check = Check::new("replay").param("checks", earlier.checks.len()).param("witnesses", witnesses);
    let failed: Vec<Witness> = replayed
        .checks
        .iter()
        .filter(|c| c.status != Status::Pass)
        .flat_map(|c| c.witnesses.iter().cloned())
        .collect();
    if !failed.is_empty() {
        check.fail_many(failed);
    }
    check.timed(start)
}
