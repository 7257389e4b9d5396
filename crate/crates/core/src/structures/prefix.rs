use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::bits::BitRow;
use super::{Kind, Label, StructureSpec, UhStructure, Width};
use crate::error::{Error, Result};

fn header(s: &UhStructure, n: usize) -> String {
    let spec = s.spec();
    let width = spec.kind.width().map_or("-".to_string(), |w| w.to_string());
    format!("UHS v1 kind={} n={width} seed={} size={n}", spec.kind.name(), spec.seed)
}

/// Renders the first `n` elements in the prefix file format.
pub fn save_prefix_string(s: &UhStructure, n: usize) -> Result<String> {
    if n > s.len() {
        return Err(Error::NotMaterialized { code: n - 1, materialized: s.len() });
    }
    let mut out = header(s, n);
    out.push('\n');
    for i in 0..n {
        if s.has_loop(i) {
            writeln!(out, "{i} < {i}").unwrap();
        }
        for j in 0..n {
            if i != j && s.lt(i, j) {
                writeln!(out, "{i} < {j}").unwrap();
            }
        }
    }
    for i in 0..n {
        writeln!(out, "label {i} {}", s.label(i)).unwrap();
    }
    Ok(out)
}

pub fn save_prefix(s: &UhStructure, n: usize, sink: &mut impl Write) -> Result<()> {
    sink.write_all(save_prefix_string(s, n)?.as_bytes())?;
    Ok(())
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::Malformed { line, message: message.into() }
}

fn parse_header(line: &str) -> Result<(StructureSpec, usize)> {
    let bad = |m: &str| malformed(1, m);
    let mut parts = line.split(' ');
    if parts.next() != Some("UHS") || parts.next() != Some("v1") {
        return Err(bad("expected header `UHS v1 ...`"));
    }
    let mut field = |key: &str| {
        parts
            .next()
            .and_then(|t| t.strip_prefix(key))
            .and_then(|t| t.strip_prefix('='))
            .ok_or_else(|| bad(&format!("missing field {key}")))
    };
    let kind = field("kind")?;
    let width = field("n")?;
    let seed = field("seed")?.parse::<u64>().map_err(|_| bad("bad seed"))?;
    let size = field("size")?.parse::<usize>().map_err(|_| bad("bad size"))?;
    if parts.next().is_some() {
        return Err(bad("trailing header fields"));
    }
    let width = match width {
        "-" => None,
        w => Some(w.parse::<Width>().map_err(|e| bad(&e.to_string()))?),
    };
    let kind = Kind::from_parts(kind, width).map_err(|e| bad(&e.to_string()))?;
    Ok((StructureSpec::new(kind).with_seed(seed), size))
}

/// Parses and validates a prefix file, then regenerates the structure from
/// its header and requires an exact match.
pub fn load_prefix(source: impl BufRead) -> Result<UhStructure> {
    let lines: Vec<String> = source.lines().collect::<std::io::Result<_>>()?;
    let first = lines.first().ok_or_else(|| malformed(1, "empty file"))?;
    let (spec, size) = parse_header(first)?;

    let mut up: Vec<BitRow> = vec![BitRow::default(); size];
    let mut pair_lines: Vec<(usize, usize, usize)> = Vec::new();
    let mut labels: Vec<Option<Label>> = vec![None; size];
    let mut last_pair: Option<(usize, usize)> = None;
    let mut in_labels = false;
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let no = idx + 1;
        let parts: Vec<&str> = line.splitn(3, ' ').collect();
        match parts.as_slice() {
            ["label", i, rest] => {
                in_labels = true;
                let i: usize = i.parse().map_err(|_| malformed(no, "bad element index"))?;
                if i >= size {
                    return Err(malformed(no, format!("element {i} out of range")));
                }
                if labels[i].is_some() {
                    return Err(malformed(no, format!("duplicate label for {i}")));
                }
                labels[i] = Some(rest.parse().map_err(|e: String| malformed(no, e))?);
            }
            [i, "<", j] if !in_labels => {
                let (i, j): (usize, usize) = match (i.parse(), j.parse()) {
                    (Ok(i), Ok(j)) => (i, j),
                    _ => return Err(malformed(no, "bad pair")),
                };
                if i >= size || j >= size {
                    return Err(malformed(no, format!("pair ({i},{j}) out of range")));
                }
                if last_pair.is_some_and(|p| p >= (i, j)) {
                    return Err(malformed(no, "pairs out of order"));
                }
                last_pair = Some((i, j));
                if i == j && spec.kind != Kind::QPlusPoint {
                    return Err(malformed(no, format!("irreflexivity violated at {i}")));
                }
                up[i].set(j);
                pair_lines.push((i, j, no));
            }
            _ => return Err(malformed(no, "unrecognized line")),
        }
    }
    for &(i, j, no) in &pair_lines {
        if i != j && up[j].get(i) {
            return Err(malformed(no, format!("antisymmetry violated at ({i},{j})")));
        }
    }
    for &(a, b, no) in &pair_lines {
        if a == b {
            continue;
        }
        if let Some(c) = up[b].ones().find(|&c| c != b && !up[a].get(c)) {
            return Err(malformed(no, format!("transitivity violated at ({a},{c})")));
        }
    }
    if let Some(i) = labels.iter().position(Option::is_none) {
        return Err(malformed(lines.len(), format!("missing label for {i}")));
    }

    let s = UhStructure::build(spec, size)?;
    let expected = save_prefix_string(&s, size)?;
    for (idx, (want, got)) in expected.lines().zip(lines.iter()).enumerate() {
        if want != got {
            return Err(malformed(idx + 1, format!("differs from the generated structure (expected `{want}`)")));
        }
    }
    if expected.lines().count() != lines.len() {
        return Err(malformed(lines.len().min(expected.lines().count()) + 1, "line count differs from the generated structure"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_omega_has_no_pairs() {
        let s = UhStructure::build(StructureSpec::new(Kind::AOmega), 3).unwrap();
        let text = save_prefix_string(&s, 3).unwrap();
        assert_eq!(text, "UHS v1 kind=A_omega n=- seed=0 size=3\nlabel 0 nat 0\nlabel 1 nat 1\nlabel 2 nat 2\n");
    }

    #[test]
    fn transitivity_rejected() {
        let text = "UHS v1 kind=D n=- seed=0 size=3\n0 < 1\n1 < 2\nlabel 0 chain 0\nlabel 1 generic 0\nlabel 2 chain 1\n";
        let err = load_prefix(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("transitivity violated at (0,2)"), "{err}");
    }

    #[test]
    fn round_trip() {
        for spec in ["D", "B(2)", "C(w)", "Q_plus_point"] {
            let s = UhStructure::build(spec.parse().unwrap(), 60).unwrap();
            let text = save_prefix_string(&s, 60).unwrap();
            let back = load_prefix(text.as_bytes()).unwrap();
            assert_eq!(save_prefix_string(&back, 60).unwrap(), text);
        }
    }

    #[test]
    fn bad_header() {
        let err = load_prefix("UHS v2 kind=Q\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
        let err = load_prefix("UHS v1 kind=E n=- seed=0 size=1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("unknown kind"));
    }
}
