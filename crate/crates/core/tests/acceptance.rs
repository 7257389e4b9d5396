//! Acceptance run: one line per criterion. Every library result is
//! re-derived here by an oracle that only uses relation and label queries.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use uhs_core::constructions::{
    bn_antichain, cn_lift_antichain, family_by_name, partition_large_copies, q_interval_antichain, AdFamily, AdParams,
    FiberMap, FAMILIES,
};
use uhs_core::copies::{descriptor_intersect, Status};
use uhs_core::rational::{dec_q, Quad, Rational};
use uhs_core::structures::{load_prefix, save_prefix_string, Label, Rel};
use uhs_core::types_orbits::orbit_member;
use uhs_core::verify::suite::{self, *};
use uhs_core::verify::{replay, Report, Witness};
use uhs_core::{Error, Kind, StructureSpec, UhStructure, Width};

const POSET_LIMIT: Duration = Duration::from_secs(5);
const GENERIC_LIMIT: Duration = Duration::from_secs(30);
const PARTITION_LIMIT: Duration = Duration::from_secs(60);

type Verdict = Result<String, String>;

fn build(spec: &str, n: usize) -> UhStructure {
    UhStructure::build(spec.parse().expect("spec"), n).expect("build")
}

fn all_pass(r: &Report) -> Result<(), String> {
    match r.checks.iter().find(|c| c.status != Status::Pass) {
        Some(c) => Err(format!("{} {:?} {:?}", c.name, c.status, c.params)),
        None => Ok(()),
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
    }
}

/// Irreflexive, antisymmetric and transitive, from raw relation queries.
fn poset_oracle(s: &UhStructure) -> Result<(), String> {
    let n = s.len();
    let lt: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| s.relation(a, b) == Rel::Lt).collect()).collect();
    for a in 0..n {
        if lt[a][a] {
            return Err(format!("{a} < {a}"));
        }
        for b in 0..n {
            if lt[a][b] && lt[b][a] {
                return Err(format!("{a} and {b} below each other"));
            }
            if lt[a][b] {
                if let Some(c) = (0..n).find(|&c| lt[b][c] && !lt[a][c]) {
                    return Err(format!("{a} < {b} < {c} but not {a} < {c}"));
                }
            }
        }
    }
    Ok(())
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let report = suite::posets(false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    all_pass(&report)?;
    within(elapsed, POSET_LIMIT)?;
    for spec in POSET_SPECS {
        poset_oracle(&build(spec, POSET_SIZE)).map_err(|e| format!("{spec}: {e}"))?;
    }
    Ok(format!("{} structures at size {POSET_SIZE}, {:.2}s (limit 5s)", POSET_SPECS.len(), elapsed.as_secs_f64()))
}

/// `(L, G, U)` over `codes` with at most `k` elements in total.
fn conditions(codes: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for set in subsets(codes.len(), k) {
        for mut roles in 0..3usize.pow(set.len() as u32) {
            let (mut l, mut g, mut u) = (Vec::new(), Vec::new(), Vec::new());
            for &i in &set {
                match roles % 3 {
                    0 => l.push(codes[i]),
                    1 => g.push(codes[i]),
                    _ => u.push(codes[i]),
                }
                roles /= 3;
            }
            out.push((l, g, u));
        }
    }
    out
}

fn valid(s: &UhStructure, l: &[usize], g: &[usize], u: &[usize]) -> bool {
    l.iter().all(|&a| g.iter().all(|&b| s.lt(a, b)))
        && u.iter().all(|&c| l.iter().all(|&a| !s.lt(c, a)))
        && g.iter().all(|&b| u.iter().all(|&c| !s.lt(b, c)))
}

fn realizes(s: &UhStructure, p: usize, l: &[usize], g: &[usize], u: &[usize]) -> bool {
    l.iter().all(|&a| s.lt(a, p))
        && g.iter().all(|&b| s.lt(p, b))
        && u.iter().all(|&c| s.relation(p, c) == Rel::Inc && p != c)
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let report = suite::genericity(false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    all_pass(&report)?;
    within(elapsed, GENERIC_LIMIT)?;
    let s = build("D", GENERIC_PREFIX);
    let first: Vec<usize> = (0..GENERIC_FIRST).collect();
    let mut checked = 0;
    for (l, g, u) in conditions(&first, GENERIC_MAX_SIZE) {
        if !valid(&s, &l, &g, &u) {
            continue;
        }
        checked += 1;
        if !(0..s.len()).any(|p| realizes(&s, p, &l, &g, &u)) {
            return Err(format!("no realizer of <{l:?},{g:?},{u:?}> below {GENERIC_PREFIX}"));
        }
    }
    Ok(format!("{checked} valid conditions realized, prefix {GENERIC_PREFIX}, {:.2}s (limit 30s)", elapsed.as_secs_f64()))
}

/// `id_F ∪ {(x, y)}` preserves and reflects the order and is injective.
fn extends(s: &UhStructure, base: &[usize], x: usize, y: usize) -> bool {
    let mut map: Vec<(usize, usize)> = base.iter().map(|&f| (f, f)).collect();
    map.push((x, y));
    map.iter().all(|&(a, fa)| {
        map.iter().all(|&(b, fb)| (a == b) == (fa == fb) && s.relation(a, b) == s.relation(fa, fb))
    })
}

fn criterion_3() -> Verdict {
    let report = suite::oracle(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    let mut pairs = 0;
    for spec in ["Q", "D"] {
        let s = build(spec, ORACLE_SIZE);
        for base in subsets(ORACLE_SIZE, ORACLE_F_MAX) {
            for x in (0..ORACLE_SIZE).filter(|x| !base.contains(x)) {
                for y in (0..ORACLE_SIZE).filter(|y| !base.contains(y)) {
                    pairs += 1;
                    let member = orbit_member(&s, &base, x, y).map_err(|e| e.to_string())?;
                    if member != extends(&s, &base, x, y) {
                        return Err(format!("{spec}: F={base:?} x={x} y={y}"));
                    }
                }
            }
        }
    }
    Ok(format!("{pairs} (F, x, y) cases on Q and D at size {ORACLE_SIZE}, 0 disagreements"))
}

fn criterion_4(keep: &mut Report) -> Verdict {
    let start = Instant::now();
    let report = suite::partition(false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    all_pass(&report)?;
    within(elapsed, PARTITION_LIMIT)?;
    keep.extend(report);

    let s = build("D", PARTITION_BOUND);
    let p = partition_large_copies(&s, PARTITION_PIECES, PARTITION_ROWS, PARTITION_BOUND).map_err(|e| e.to_string())?;
    let t = &p.table;
    // Recompute every entry as the least unused orbit member, column by column.
    let mut used = BTreeSet::new();
    for k in 0..t.horizon {
        for n in 0..t.rows.min(k + 1) {
            let want = (0..PARTITION_BOUND).find(|&x| !used.contains(&x) && t.orbits[n].member(&s, x).unwrap_or(false));
            if want != t.get(n, k) {
                return Err(format!("m[{n}][{k}] is {:?}, recomputed {want:?}", t.get(n, k)));
            }
            used.insert(want.expect("entry"));
        }
    }
    let mut owner = vec![None; PARTITION_BOUND];
    for (j, piece) in p.pieces.iter().enumerate() {
        for x in piece.enumerate(&s, PARTITION_BOUND).map_err(|e| e.to_string())? {
            if let Some(i) = owner[x].replace(j) {
                return Err(format!("code {x} in pieces {i} and {j}"));
            }
        }
        for (n, orbit) in t.orbits.iter().enumerate() {
            let hits = (0..PARTITION_BOUND)
                .filter(|&x| owner[x] == Some(j) && orbit.member(&s, x).unwrap_or(false))
                .count();
            if hits < PARTITION_PER_ORBIT {
                return Err(format!("piece {j} meets orbit {n} {hits} times"));
            }
        }
    }
    if let Some(x) = (0..p.cover_bound).find(|&x| owner[x].is_none()) {
        return Err(format!("code {x} below the cover bound {} is uncovered", p.cover_bound));
    }
    Ok(format!(
        "{} pieces, horizon {}, cover bound {}, table recomputed, {:.2}s (limit 60s)",
        p.pieces.len(),
        t.horizon,
        p.cover_bound,
        elapsed.as_secs_f64()
    ))
}

/// Sign of `q − (a + b√2)` for integer `a`, `b`.
fn cmp_target(q: &Rational, a: i128, b: i128) -> Ordering {
    let (n, d) = (*q.numer() as i128, *q.denom() as i128);
    let l = n - a * d;
    let r = b * d;
    match (l.signum(), r.signum()) {
        (0, 0) => Ordering::Equal,
        (ls, rs) if ls >= 0 && rs <= 0 => Ordering::Greater,
        (ls, rs) if ls <= 0 && rs >= 0 => Ordering::Less,
        (1, _) => (l * l).cmp(&(2 * r * r)),
        _ => (2 * r * r).cmp(&(l * l)),
    }
}

fn integer_parts(t: &Quad) -> (i128, i128) {
    (t.a.to_integer() as i128, t.b.to_integer() as i128)
}

fn criterion_5(keep: &mut Report) -> Verdict {
    let report = suite::ad_family(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    keep.extend(report);

    let s = build("Q", 1);
    let mut fam = AdFamily::new(&s, AD_N_D, AD_TABLE_BOUND).map_err(|e| e.to_string())?;
    let targets = ad_targets();
    let mut members = Vec::new();
    for &target in &targets {
        let m = fam.member(AdParams { target, n_d: AD_N_D, fiber: FiberMap::RoundRobin }, AD_LENGTH).map_err(|e| e.to_string())?;
        members.push(m.values());
    }
    let tol = Rational::new(AD_TOLERANCE.0, AD_TOLERANCE.1);
    for (t, v) in targets.iter().zip(&members) {
        let (a, b) = integer_parts(t);
        if v.len() != AD_LENGTH || !v.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("member {a}+{b}r2 is not strictly increasing of length {AD_LENGTH}"));
        }
        if !v.iter().all(|q| cmp_target(q, a, b) == Ordering::Less) {
            return Err(format!("member {a}+{b}r2 has a term at or above the target"));
        }
        if !v[AD_FROM..].iter().all(|q| cmp_target(&(q + tol), a, b) == Ordering::Greater) {
            return Err(format!("member {a}+{b}r2 is not within {tol} from index {AD_FROM}"));
        }
        for n in 0..AD_N_D {
            let hits = v.iter().filter(|q| {
                let mut d = *q.denom();
                while d % 2 == 0 {
                    d /= 2;
                }
                d == 2 * n as i64 + 1
            });
            if hits.count() < AD_PER_FIBER {
                return Err(format!("member {a}+{b}r2 meets D_{n} fewer than {AD_PER_FIBER} times"));
            }
        }
    }
    // Separating rationals found afresh by a dyadic search.
    let mut pairs = 0;
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            let (lo, hi) = if targets[i].approx() < targets[j].approx() { (i, j) } else { (j, i) };
            let (la, lb) = integer_parts(&targets[lo]);
            let (ha, hb) = integer_parts(&targets[hi]);
            let r = (0..20)
                .flat_map(|e| {
                    let scale = 1i64 << e;
                    let k = (targets[lo].approx() * scale as f64).floor() as i64;
                    (k - 2..=k + 2).map(move |k| Rational::new(k, scale))
                })
                .find(|r| cmp_target(r, la, lb) == Ordering::Greater && cmp_target(r, ha, hb) == Ordering::Less)
                .ok_or_else(|| format!("no dyadic between targets {lo} and {hi}"))?;
            let upper = &members[hi];
            let after = upper.iter().position(|q| *q > r).unwrap_or(upper.len());
            if members[lo].iter().any(|q| upper[after..].contains(q)) {
                return Err(format!("members {lo} and {hi} share a term past {r}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("{} members of length {AD_LENGTH}, {pairs} pairs separated by dyadic rationals", targets.len()))
}

/// `(2n − 1)√2 < q < (2n + 1)√2`, by squaring.
fn in_interval(q: &Rational, n: i64) -> bool {
    cmp_target(q, 0, (2 * n - 1) as i128) == Ordering::Greater && cmp_target(q, 0, (2 * n + 1) as i128) == Ordering::Less
}

fn count(r: &Report, name: &str) -> usize {
    r.checks.iter().filter(|c| c.name == name && c.status == Status::Pass).count()
}

fn criterion_6(keep: &mut Report) -> Verdict {
    let report = suite::intervals(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    let members = q_interval_antichain(-INTERVAL_RANGE, INTERVAL_RANGE);
    let pairs = members.len() * (members.len() - 1) / 2;
    if count(&report, "incompatible") != pairs {
        return Err(format!("{} of {pairs} pairs certified", count(&report, "incompatible")));
    }
    if count(&report, "member_is_copy") != members.len() {
        return Err("a member failed check_copy".into());
    }
    if count(&report, "maximality_evidence") != INTERVAL_SEEDS as usize {
        return Err("maximality evidence missing for a seed".into());
    }
    // Membership by squaring against the descriptors, and at most one owner.
    let s = build("Q", INTERVAL_SEARCH_BOUND);
    for x in 0..INTERVAL_SEARCH_BOUND {
        let q = dec_q(x as u64);
        let owners: Vec<i64> = (-INTERVAL_RANGE..=INTERVAL_RANGE).filter(|&n| in_interval(&q, n)).collect();
        if owners.len() > 1 {
            return Err(format!("{q} lies in intervals {owners:?}"));
        }
        for (i, m) in members.iter().enumerate() {
            let n = i as i64 - INTERVAL_RANGE;
            if m.member(&s, x).map_err(|e| e.to_string())? != owners.contains(&n) {
                return Err(format!("membership of {q} in I_{n} disagrees with squaring"));
            }
        }
    }
    // Each refinement certificate re-checked with relation queries.
    for w in report.checks.iter().flat_map(|c| &c.witnesses) {
        if let Witness::Refinement { member, x, y, between: Some(b), .. } = w {
            let n = *member as i64 - INTERVAL_RANGE;
            let ok = s.lt(*x, *b) && s.lt(*b, *y) && [x, y, b].iter().all(|&&p| in_interval(&dec_q(p as u64), n));
            if !ok {
                return Err(format!("refinement {x} < {b} < {y} in I_{n} does not hold"));
            }
        }
    }
    keep.extend(report);
    Ok(format!(
        "{pairs} pairs certified, {} members pass check_copy (f_max {INTERVAL_F_MAX}, x_bound {INTERVAL_X_BOUND}), {INTERVAL_SEEDS} seeds with evidence",
        members.len()
    ))
}

fn criterion_7(keep: &mut Report) -> Verdict {
    let report = suite::diagonals(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    for (name, check) in FAMILIES.iter().zip(&report.checks) {
        let fam = family_by_name(name).expect("family");
        let reported: Vec<u64> = serde_json::from_value(check.params["indices"].clone()).map_err(|e| e.to_string())?;
        // Rescan from index 0 with the factor order read directly.
        let mut indices: Vec<u64> = Vec::new();
        for n in 0..DIAGONAL_DEPTH {
            let i = (0u64..1 << 22)
                .find(|&i| {
                    let an = fam.component(n, i);
                    let le = &fam.factor(i).le;
                    an != 0
                        && !indices.contains(&i)
                        && (0..n).all(|m| {
                            let am = fam.component(m, i) as usize;
                            !(1..le.len()).any(|b| le[b][am] && le[b][an as usize])
                        })
                })
                .ok_or_else(|| format!("{name}: no i_{n}"))?;
            indices.push(i);
        }
        if indices != reported {
            return Err(format!("{name}: rescan {indices:?} differs from {reported:?}"));
        }
    }
    keep.extend(report);
    Ok(format!("{} families, depth {DIAGONAL_DEPTH}, i_n rescanned and equal", FAMILIES.len()))
}

fn criterion_8(keep: &mut Report) -> Verdict {
    let report = suite::lifts(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    let base = q_interval_antichain(-INTERVAL_RANGE, INTERVAL_RANGE);
    let pairs = base.len() * (base.len() - 1) / 2;
    let widths = LIFT_WIDTHS.len();
    if count(&report, "incompatible") != 2 * widths * pairs {
        return Err(format!("{} of {} lift pairs certified", count(&report, "incompatible"), 2 * widths * pairs));
    }
    if count(&report, "maximality_evidence") != 2 * widths * LIFT_SEEDS as usize {
        return Err("maximality evidence missing for a seed".into());
    }
    // Intersections read off the labels: B_n pairs avoid column 0, C_n
    // pairs are empty.
    for n in LIFT_WIDTHS {
        let sb = UhStructure::build(StructureSpec::new(Kind::B(Width::Finite(n))), SAMPLE_BOUND).map_err(|e| e.to_string())?;
        let sc = UhStructure::build(StructureSpec::new(Kind::C(Width::Finite(n))), SAMPLE_BOUND).map_err(|e| e.to_string())?;
        let bm = bn_antichain(&base, Width::Finite(n)).map_err(|e| e.to_string())?;
        let cm = cn_lift_antichain(&base);
        for i in 0..base.len() {
            for j in i + 1..base.len() {
                let both = descriptor_intersect(&bm[i], &bm[j]);
                for x in 0..SAMPLE_BOUND {
                    let Label::Pair { column, q } = sb.label(x) else { return Err("B label is not a pair".into()) };
                    let inside = bm[i].member(&sb, x).unwrap() && bm[j].member(&sb, x).unwrap();
                    if inside && column == 0 {
                        return Err(format!("B({n}) members {i}, {j} share {x} in column 0"));
                    }
                    if inside != both.member(&sb, x).unwrap() {
                        return Err(format!("B({n}) intersection descriptor wrong at {x}"));
                    }
                    let ni = i as i64 - INTERVAL_RANGE;
                    if column == 0 && bm[i].member(&sb, x).unwrap() != in_interval(&q, ni) {
                        return Err(format!("B({n}) member {i} wrong at {x}"));
                    }
                    if cm[i].member(&sc, x).unwrap() && cm[j].member(&sc, x).unwrap() {
                        return Err(format!("C({n}) members {i}, {j} share {x}"));
                    }
                }
            }
        }
    }
    match bn_antichain(&base, Width::Omega) {
        Err(Error::Refused(_)) => {}
        _ => return Err("the B(w) lift was not refused".into()),
    }
    keep.extend(report);
    Ok(format!("n in {LIFT_WIDTHS:?}: {pairs} pairs per lift certified, {LIFT_SEEDS} seeds each, B(w) refused"))
}

fn criterion_9(keep: &mut Report) -> Verdict {
    let report = suite::windows(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    if count(&report, "maximality_evidence") != WINDOW_SEEDS as usize {
        return Err("d_compat witness missing for a seed".into());
    }
    let s = build("D", WINDOW_PREFIX);
    let chain = |m: i64| s.chain_point(m).expect("chain point");
    let in_window = |x: usize, m: i64| s.lt(x, chain(m)) && x != chain(m - 1) && !s.lt(x, chain(m - 1));
    let mut realized = 0;
    let mut sizes = Vec::new();
    for m in -WINDOW_RANGE..=WINDOW_RANGE {
        let members: Vec<usize> = (0..s.len()).filter(|&x| in_window(x, m)).collect();
        if let Some(&x) = members.iter().find(|&&x| (-WINDOW_RANGE..=WINDOW_RANGE).any(|k| k != m && in_window(x, k))) {
            return Err(format!("{x} lies in X_{m} and another window"));
        }
        sizes.push(members.len());
        let local: Vec<usize> = members.iter().copied().filter(|&x| x < WINDOW_FIRST).collect();
        for (l, g, u) in conditions(&local, WINDOW_MAX_SIZE) {
            if !valid(&s, &l, &g, &u) {
                continue;
            }
            if !members.iter().any(|&p| realizes(&s, p, &l, &g, &u)) {
                return Err(format!("<{l:?},{g:?},{u:?}> unrealized in X_{m}"));
            }
            realized += 1;
        }
    }
    keep.extend(report);
    Ok(format!("windows of sizes {sizes:?} disjoint, {realized} conditions realized inside, {WINDOW_SEEDS} d_compat witnesses"))
}

fn criterion_10(earlier: &Report) -> Verdict {
    let report = suite::round_trips(false).map_err(|e| e.to_string())?;
    all_pass(&report)?;
    for spec in ROUND_TRIP_SPECS {
        let a = save_prefix_string(&build(spec, ROUND_TRIP_SIZE), ROUND_TRIP_SIZE).map_err(|e| e.to_string())?;
        let b = save_prefix_string(&build(spec, ROUND_TRIP_SIZE), ROUND_TRIP_SIZE).map_err(|e| e.to_string())?;
        let loaded = load_prefix(a.as_bytes()).map_err(|e| e.to_string())?;
        let c = save_prefix_string(&loaded, ROUND_TRIP_SIZE).map_err(|e| e.to_string())?;
        if a != b || a != c {
            return Err(format!("{spec}: saved bytes differ"));
        }
    }
    let witnesses: usize = earlier.checks.iter().map(|c| c.witnesses.len()).sum();
    let replayed = replay(earlier);
    all_pass(&replayed)?;
    // A forged witness must be caught.
    let mut forged = earlier.clone();
    let target = forged.checks.iter_mut().flat_map(|c| c.witnesses.iter_mut()).find_map(|w| match w {
        Witness::Refinement { x, y, .. } => Some((x, y)),
        _ => None,
    });
    let (x, y) = target.ok_or("no refinement witness to forge")?;
    std::mem::swap(x, y);
    if replay(&forged).status() != Status::Fail {
        return Err("a forged witness replayed cleanly".into());
    }
    Ok(format!(
        "{} structures round trip at size {ROUND_TRIP_SIZE}; {witnesses} witnesses of {} checks from criteria 4-9 replayed; forgery rejected",
        ROUND_TRIP_SPECS.len(),
        earlier.checks.len()
    ))
}

fn main() {
    let mut earlier = Report::new();
    let mut failed = 0;
    let mut line = |n: u32, v: Verdict| {
        match &v {
            Ok(detail) => println!("criterion {n:2}: PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:2}: FAIL  {why}");
            }
        }
    };
    line(1, criterion_1());
    line(2, criterion_2());
    line(3, criterion_3());
    line(4, criterion_4(&mut earlier));
    line(5, criterion_5(&mut earlier));
    line(6, criterion_6(&mut earlier));
    line(7, criterion_7(&mut earlier));
    line(8, criterion_8(&mut earlier));
    line(9, criterion_9(&mut earlier));
    line(10, criterion_10(&earlier));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria pass");
}
