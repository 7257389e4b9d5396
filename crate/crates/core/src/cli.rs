//! The `uhs-lab` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::constructions::{
    bn_antichain, cn_lift_antichain, cs_diagonal, d_antichain, family_by_name, partition_large_copies,
    q_interval_antichain, AdFamily, AdParams, FiberMap, FAMILIES,
};
use crate::copies::{check_copy, SetDescriptor, Status};
use crate::error::{Error, Result};
use crate::rational::{parse_quad, Rational};
use crate::structures::{load_prefix, save_prefix_string, Kind, StructureSpec, UhStructure, Width};
use crate::types_orbits::enumerate_orbits;
use crate::verify::{
    check_ad, check_antichain, check_large, check_maximality_evidence, check_partition, check_poset, replay, suite, Check, Family,
    Report, Witness,
};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(
    name = "uhs-lab",
    version,
    about = "Countable ultrahomogeneous partial orders: prefixes, orbits, copies and antichains",
    after_help = "Acceptance runs:\n  uhs-lab suite 1    poset axioms of every structure at 300\n  uhs-lab suite 2    genericity of D over the first 8 codes\n  uhs-lab suite 3    orbit membership against partial isomorphisms\n  uhs-lab suite 4    partition of D into 4 large pieces\n  uhs-lab suite 5    almost disjoint family on Q\n  uhs-lab suite 6    interval antichain on Q\n  uhs-lab suite 7    diagonal elements of the product\n  uhs-lab suite 8    lifted antichains on B_n and C_n\n  uhs-lab suite 9    windows X_m of D\n  uhs-lab suite 10   round trips and replay of 4 to 9\nExit status: 0 pass, 1 fail, 2 unknown at bound, 64 usage, 65 malformed input, 74 unreadable file."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// A_omega, B, C, Q, Q_plus_point or D; `B(3)` is short for `B --n 3`.
    #[arg(long)]
    pub structure: Option<String>,
    /// Width of B or C: a positive integer or `w`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub size: usize,
    #[arg(long)]
    pub bound: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub f_max: usize,
    #[arg(long, default_value_t = 8)]
    pub rows: usize,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AntichainFamily {
    Intervals,
    Bn,
    Cn,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FiberArg {
    RoundRobin,
    Ruler,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a prefix file of the first --size elements.
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// List the first --rows orbits.
    Orbits {
        #[command(flatten)]
        common: Common,
    },
    /// Decide copy-hood of a set by the orbit criterion.
    CheckCopy {
        #[command(flatten)]
        common: Common,
        /// evens, odds, integers, dyadics or all.
        #[arg(long, conflicts_with = "set_file")]
        set: Option<String>,
        /// JSON descriptor file.
        #[arg(long)]
        set_file: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        x_bound: usize,
    },
    /// Partition D (or any structure) into large pieces.
    Partition {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        pieces: usize,
    },
    /// Almost disjoint family of sequences on Q converging to a + b*sqrt(2).
    Adfamily {
        #[command(flatten)]
        common: Common,
        /// Targets like `1+2r2`, `-1/2-r2`; default is the pinned twenty.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        targets: Vec<String>,
        #[arg(long, default_value_t = 64)]
        length: usize,
        #[arg(long, default_value_t = 8)]
        n_d: usize,
        #[arg(long, value_enum, default_value_t = FiberArg::RoundRobin)]
        fiber: FiberArg,
    },
    /// Antichain of copies with incompatibility certificates and maximality evidence.
    Antichain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        family: AntichainFamily,
        /// Index range `lo..hi`, inclusive.
        #[arg(long, default_value = "-5..5", allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
    /// Diagonal elements against countable antichains of the product.
    Diagonal {
        #[command(flatten)]
        common: Common,
        /// One of cantor_columns, columns_with_overlap, tree_branches; default all.
        #[arg(long)]
        family: Option<String>,
    },
    /// Load a prefix file and check its order axioms.
    Load {
        /// Prefix file written by `gen`.
        prefix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Re-check the witnesses of a JSON report.
    Verify {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run one pinned acceptance criterion (1 to 10).
    Suite {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=10))]
        criterion: u32,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Io(String),
    Refused(String),
    Bound(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::InvalidSpec(_) | Error::Unsupported(_) | Error::InParameterSet(_) | Error::OverlappingCondition(_) => {
                Failure::Usage(m)
            }
            Error::Malformed { .. } | Error::Json(_) | Error::NotPartialIso { .. } => Failure::Data(m),
            Error::Io(_) => Failure::Io(m),
            Error::Refused(_) => Failure::Refused(m),
            Error::NotMaterialized { .. }
            | Error::Undecidable { .. }
            | Error::OrbitExhausted { .. }
            | Error::EmptyWindow { .. }
            | Error::SupportTooSparse { .. }
            | Error::MissingChainPoint(_)
            | Error::NoRepresentative(_) => Failure::Bound(m),
        }
    }
}

/// Parses `argv` and runs it; returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Data(m) => (EXIT_DATA, m),
                Failure::Io(m) => (EXIT_IO, m),
                Failure::Refused(m) => (1, m),
                Failure::Bound(m) => (2, m),
            };
            eprintln!("uhs-lab: {msg}");
            code
        }
    }
}

fn spec_of(common: &Common, default: &str) -> Result<StructureSpec> {
    let name = common.structure.as_deref().unwrap_or(default);
    let mut spec: StructureSpec = match (&common.n, name.contains('(')) {
        (Some(n), false) => StructureSpec::new(Kind::from_parts(name, Some(n.parse::<Width>()?))?),
        (Some(_), true) => return Err(Error::InvalidSpec("give the width either in --structure or in --n".into())),
        (None, _) => name.parse()?,
    };
    spec.seed = common.seed;
    Ok(spec)
}

fn build(common: &Common, default: &str, size: usize) -> Result<UhStructure> {
    UhStructure::build(spec_of(common, default)?, size)
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn emit_report(report: &Report, out: &Option<PathBuf>, format: Format) -> std::result::Result<i32, Failure> {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    emit(out, &text)?;
    Ok(report.exit_code())
}

fn parse_range(range: &str) -> std::result::Result<(i64, i64), Failure> {
    let bad = || Failure::Usage(format!("bad range {range:?}; expected lo..hi"));
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> std::result::Result<i32, Failure> {
    match command {
        Command::Gen { common } => {
            let s = build(&common, "D", common.size)?;
            emit(&common.out, &save_prefix_string(&s, common.size)?)?;
            Ok(0)
        }
        Command::Orbits { common } => {
            let s = build(&common, "D", common.size)?;
            let bound = common.bound.unwrap_or(common.size);
            let orbits: Vec<_> = enumerate_orbits(&s, bound).take(common.rows).collect();
            let text = match common.format {
                Format::Json => serde_json::to_string_pretty(&orbits).map_err(Error::from)? + "\n",
                Format::Text => orbits
                    .iter()
                    .enumerate()
                    .map(|(i, o)| format!("O_{i}: {} first={}\n", o.ty.as_condition(), o.first_realizer))
                    .collect(),
            };
            emit(&common.out, &text)?;
            Ok(0)
        }
        Command::CheckCopy { common, set, set_file, x_bound } => {
            let s = build(&common, "Q", common.size)?;
            let a = match (set, set_file) {
                (Some(name), None) => {
                    SetDescriptor::named(&name).ok_or_else(|| Failure::Usage(format!("unknown set {name:?}")))?
                }
                (None, Some(path)) => read_json(&path)?,
                _ => return Err(Failure::Usage("give --set or --set-file".into())),
            };
            let search = common.bound.unwrap_or(5000);
            let v = check_copy(&s, &a, common.f_max, x_bound, search)?;
            let mut check = Check::new("check_copy")
                .param("structure", s.spec().to_string())
                .param("set", a.summary())
                .param("closed_form_hits", v.closed_form_hits)
                .bound("prefix", s.len())
                .bound("f_max", common.f_max)
                .bound("x_bound", x_bound)
                .bound("search_bound", search);
            match v.status {
                Status::Pass => {}
                Status::Fail => check.fail_many(v.witness.into_iter().collect()),
                Status::UnknownAtBound => check.unknown(v.witness.into_iter().collect()),
            }
            let mut r = Report::new();
            r.push(check);
            emit_report(&r, &common.out, common.format)
        }
        Command::Partition { common, pieces } => {
            let bound = common.bound.unwrap_or(2000);
            let s = build(&common, "D", bound)?;
            let p = partition_large_copies(&s, pieces, common.rows, bound)?;
            let mut r = Report::new();
            r.push(check_partition(&s, &p.pieces, p.cover_bound)?);
            for piece in &p.pieces {
                r.push(check_large(&s, piece, common.rows, 3, bound)?);
            }
            emit_report(&r, &common.out, common.format)
        }
        Command::Adfamily { common, targets, length, n_d, fiber } => {
            let s = build(&common, "Q", 1)?;
            if s.kind() != Kind::Q {
                return Err(Failure::Usage("adfamily runs on Q".into()));
            }
            let targets = if targets.is_empty() {
                suite::ad_targets()
            } else {
                targets
                    .iter()
                    .map(|t| parse_quad(t).ok_or_else(|| Failure::Usage(format!("bad target {t:?}"))))
                    .collect::<std::result::Result<_, _>>()?
            };
            let fiber = match fiber {
                FiberArg::RoundRobin => FiberMap::RoundRobin,
                FiberArg::Ruler => FiberMap::Ruler,
            };
            let mut fam = AdFamily::new(&s, n_d, common.bound.unwrap_or(suite::AD_TABLE_BOUND))?;
            let members = targets
                .into_iter()
                .map(|target| fam.member(AdParams { target, n_d, fiber }, length))
                .collect::<Result<Vec<_>>>()?;
            let from = length / 2;
            let r = check_ad(&members, from, Rational::new(1, from.max(1) as i64), 5.min(length / n_d.max(1)));
            emit_report(&r, &common.out, common.format)
        }
        Command::Antichain { common, family, range, seeds } => {
            let (lo, hi) = parse_range(&range)?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let search = common.bound.unwrap_or(5000);
            let mut r = Report::new();
            match family {
                AntichainFamily::Intervals => {
                    let s = build(&common, "Q", 1)?;
                    let members = q_interval_antichain(lo, hi);
                    r.extend(check_antichain(&s, &members, search)?);
                    r.extend(check_maximality_evidence(&s, &Family::Intervals(members), &seeds, 300, search)?);
                }
                AntichainFamily::Bn | AntichainFamily::Cn => {
                    let default = if family == AntichainFamily::Bn { "B(2)" } else { "C(2)" };
                    let s = build(&common, default, 1)?;
                    let base = q_interval_antichain(lo, hi);
                    let fam = match (family, s.kind()) {
                        (AntichainFamily::Bn, Kind::B(w)) => Family::Bn { members: bn_antichain(&base, w)?, base },
                        (AntichainFamily::Cn, Kind::C(_)) => Family::Cn { members: cn_lift_antichain(&base), base },
                        _ => return Err(Failure::Usage("bn needs --structure B, cn needs --structure C".into())),
                    };
                    let members = match &fam {
                        Family::Bn { members, .. } | Family::Cn { members, .. } => members.clone(),
                        _ => unreachable!(),
                    };
                    r.extend(check_antichain(&s, &members, search)?);
                    r.extend(check_maximality_evidence(&s, &fam, &seeds, 300, search)?);
                }
                AntichainFamily::D => {
                    let s = build(&common, "D", common.size)?;
                    if s.kind() != Kind::D {
                        return Err(Failure::Usage("the window family lives on D".into()));
                    }
                    let members = d_antichain(&s, lo, hi)?;
                    r.extend(check_antichain(&s, &members, s.len())?);
                    let fam = Family::Windows { lo, hi };
                    r.extend(check_maximality_evidence(&s, &fam, &seeds, 300, s.len())?);
                }
            }
            emit_report(&r, &common.out, common.format)
        }
        Command::Diagonal { common, family } => {
            let depth = common.depth.unwrap_or(12);
            let names: Vec<String> = match family {
                Some(f) => vec![f],
                None => FAMILIES.iter().map(|s| s.to_string()).collect(),
            };
            let mut r = Report::new();
            for name in names {
                let fam = family_by_name(&name).ok_or_else(|| Failure::Usage(format!("unknown family {name:?}")))?;
                let d = cs_diagonal(fam.as_ref(), depth)?;
                let mut check = Check::new("diagonal")
                    .param("family", &name)
                    .param("depth", depth)
                    .param("indices", &d.indices);
                for c in d.certificates {
                    let w =
                        Witness::DiagonalIndex { family: name.clone(), m: c.m, n: c.n, index: c.index, a_m: c.a_m, a_n: c.a_n };
                    if fam.factor(c.index).meet_positive(c.a_m, c.a_n) {
                        check.fail(w);
                    } else {
                        check.certify(w);
                    }
                }
                r.push(check);
            }
            emit_report(&r, &common.out, common.format)
        }
        Command::Load { prefix, out, format } => {
            let s = load_prefix_file(&prefix)?;
            let mut r = Report::new();
            r.push(check_poset(&s));
            emit_report(&r, &out, format)
        }
        Command::Verify { replay: path, out, format } => {
            let report: Report = read_json(&path)?;
            emit_report(&replay(&report), &out, format)
        }
        Command::Suite { criterion, timing, out, format } => {
            let r = suite::run(criterion, timing)?;
            emit_report(&r, &out, format)
        }
    }
}

/// Loads a prefix file, mapping failures to the CLI's error classes.
pub fn load_prefix_file(path: &PathBuf) -> Result<UhStructure> {
    let file = fs::File::open(path)?;
    load_prefix(BufReader::new(file))
}
