use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use kothe::classifier::{classify_report, SpaceSpec};
use kothe::dsl::{self, random::random_family, Diagnostic};
use kothe::gallery::{self, canonical_names, run_spec_expectations, ENTRIES};
use kothe::orbit::{self, WitnessRecord};
use kothe::symbol::{snake_squares, snake_symbol, verify_symbol};
use kothe::{Error, RatVector, Rational, Symbol, Window};

const OK: u8 = 0;
const MISMATCH: u8 = 1;
const USAGE: u8 = 2;
const UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(name = "kothe", version, about = "Dynamics of weighted generalized backward shifts on Köthe coechelon spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a space from a `.kws` file, a builtin, or a seeded random family.
    Classify {
        /// Path to a `.kws` file.
        path: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        /// Classify the random family generated from this seed.
        #[arg(long, conflicts_with_all = ["path", "builtin"])]
        random: Option<u64>,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Exit 3 when any verdict is Undecided.
        #[arg(long)]
        strict: bool,
    },
    /// List or run gallery entries against their recorded expectations.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Emit a replayable witness record.
    Witness {
        kind: WitnessKind,
        /// Path to a `.kws` file.
        path: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        /// Level `m` of the seminorm.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=64))]
        level: u64,
        /// Tolerance ε.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Source vector as `j:value,...`; defaults to `e_1`.
        #[arg(long)]
        x: Option<String>,
        /// Target vector as `j:value,...`; defaults to `e_1`.
        #[arg(long)]
        y: Option<String>,
        /// Basis index approximated by the periodic point.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Targets for the hypercyclic candidate, `;`-separated.
        #[arg(long)]
        targets: Option<String>,
        /// Return-set horizon.
        #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..=1 << 24))]
        horizon: u64,
        #[command(flatten)]
        window: WindowArgs,
        /// Write the record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a witness record against its space.
    Replay {
        record: PathBuf,
        /// Path to a `.kws` file; defaults to the builtin named in the record.
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Symbol utilities.
    Symbol {
        #[command(subcommand)]
        action: SymbolAction,
    },
    /// Print a `.kws` file in canonical form.
    Fmt {
        path: PathBuf,
        /// Exit 1 when the file is not canonical.
        #[arg(long, conflicts_with = "write")]
        check: bool,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Canonical entry names with parameters.
    List,
    /// Classify entries and compare against expectations; all entries when none are named.
    Run {
        names: Vec<String>,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        strict: bool,
    },
    /// Search seeded random families for a nuclear, ergodic, non-hypercyclic space.
    Search {
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of seeds.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..=100_000))]
        count: u64,
        #[command(flatten)]
        window: WindowArgs,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SymbolAction {
    /// Check the orbit prefix of `successor`, `snake` or `snake(e)`.
    Verify {
        name: String,
        /// Prefix length.
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..=1 << 22))]
        n: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Transitivity,
    Periodic,
    Hypercyclic,
    ReturnSet,
}

#[derive(Args)]
struct Source {
    /// Gallery entry, e.g. `annihilation` or `power-series-dual(loglog)`.
    #[arg(long, conflicts_with = "path")]
    builtin: Option<String>,
}

#[derive(Args)]
struct WindowArgs {
    /// Levels scanned.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    levels: Option<u64>,
    /// Grades scanned.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    grades: Option<u64>,
    /// Index window length.
    #[arg(long, value_parser = clap::value_parser!(u64).range(16..=1 << 24))]
    window: Option<u64>,
    /// Smallest ε is `2^-eps_floor`.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=200))]
    eps_floor: Option<u32>,
    /// Truncation length for exact vectors.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1 << 20))]
    truncation: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// JSON report (default).
    #[arg(long, conflicts_with = "md")]
    json: bool,
    /// Markdown report.
    #[arg(long)]
    md: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<Error>() {
            Some(Error::Parse(_) | Error::Config(_) | Error::Domain(_) | Error::UnknownEntry(_)) => USAGE,
            Some(_) => MISMATCH,
            None if e.downcast_ref::<std::io::Error>().is_some() => USAGE,
            None => MISMATCH,
        };
        Failure { code, message: format!("{e:#}") }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: USAGE, message: message.into() }
}

type Run<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let tag = if std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal() {
                "\x1b[31merror\x1b[0m"
            } else {
                "error"
            };
            eprintln!("{tag}: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Run<u8> {
    match command {
        Command::Classify { path, source, random, window, out, strict } => {
            let spec = match random {
                Some(seed) => dsl::compile(&random_family(seed)).map_err(anyhow::Error::from)?,
                None => load_spec(path.as_deref(), source.builtin.as_deref())?,
            };
            classify(window.apply(spec), &out, strict)
        }
        Command::Gallery { action: GalleryAction::List } => {
            let mut text = String::new();
            for name in canonical_names() {
                let base = name.split('(').next().unwrap_or(&name);
                let note = ENTRIES.iter().find(|e| e.name == base).map_or("", |e| e.note);
                text.push_str(&format!("{name:<28} {note}\n"));
            }
            emit(&text, None)?;
            Ok(OK)
        }
        Command::Gallery { action: GalleryAction::Run { names, window, out, strict } } => {
            gallery_run(names, &window, &out, strict)
        }
        Command::Gallery { action: GalleryAction::Search { seed, count, window, out } } => {
            let d = Window { levels: 4, grades: 4, n: 1 << 12 };
            let w = Window {
                levels: window.levels.map_or(d.levels, |v| v as usize),
                grades: window.grades.map_or(d.grades, |v| v as usize),
                n: window.window.map_or(d.n, |v| v as usize),
            };
            let summary = gallery::search_nuclear_ergodic(seed..seed + count, w).map_err(anyhow::Error::from)?;
            emit(&(serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)? + "\n"), out.as_deref())?;
            Ok(OK)
        }
        Command::Witness { kind, path, source, level, eps, x, y, k, targets, horizon, window, out } => {
            let spec = window.apply(load_spec(path.as_deref(), source.builtin.as_deref())?);
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(usage(format!("--eps must be positive, got {eps}")));
            }
            let (m, log_eps) = (level as usize, eps.ln());
            let x = parse_vector(x.as_deref())?;
            let y = parse_vector(y.as_deref())?;
            let record = match kind {
                WitnessKind::Transitivity => orbit::transitivity_witness(&x, &y, &spec, m, log_eps),
                WitnessKind::Periodic => orbit::periodic_approximant(k, &spec, m, log_eps),
                WitnessKind::Hypercyclic => {
                    let targets = match targets.as_deref() {
                        Some(t) => t.split(';').map(|v| parse_vector(Some(v))).collect::<Run<Vec<_>>>()?,
                        None => vec![x.clone()],
                    };
                    orbit::hypercyclic_candidate(&targets, &spec, m, log_eps)
                }
                WitnessKind::ReturnSet => orbit::return_set(&x, &y, log_eps, &spec, m, horizon as usize),
            }
            .map_err(anyhow::Error::from)?;
            emit(&record.to_json(), out.as_deref())?;
            Ok(OK)
        }
        Command::Replay { record, space, window } => {
            let text = read(&record)?;
            let record = WitnessRecord::from_json(&text).map_err(anyhow::Error::from)?;
            let spec = match space {
                Some(p) => load_spec(Some(&p), None)?,
                None => gallery::builtin(&record.space).map_err(anyhow::Error::from)?,
            };
            let summary = orbit::replay(&record, &window.apply(spec)).map_err(anyhow::Error::from)?;
            emit(&format!("ok {}: {}\n", summary.kind, summary.detail), None)?;
            Ok(OK)
        }
        Command::Symbol { action: SymbolAction::Verify { name, n } } => {
            let psi = symbol_by_name(&name)?;
            let v = verify_symbol(&psi, n as usize);
            emit(&(serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)? + "\n"), None)?;
            Ok(if v.status == kothe::Status::CertifiedFails { MISMATCH } else { OK })
        }
        Command::Fmt { path, check, write } => {
            let text = read(&path)?;
            let ast = dsl::parse(&text).map_err(|d| diagnostic(&path, &text, &d))?;
            let canon = dsl::format(&ast);
            if check {
                if canon != text {
                    eprintln!("{} is not canonical", path.display());
                    return Ok(MISMATCH);
                }
            } else if write {
                std::fs::write(&path, canon).with_context(|| format!("writing {}", path.display()))?;
            } else {
                emit(&canon, None)?;
            }
            Ok(OK)
        }
    }
}

fn classify(spec: SpaceSpec, out: &OutputArgs, strict: bool) -> Run<u8> {
    let report = classify_report(&spec).map_err(anyhow::Error::from)?;
    let text = if out.md { report.to_markdown() } else { report.to_json() + "\n" };
    emit(&text, out.out.as_deref())?;
    Ok(if !report.lattice_consistent || report.expectations_matched == Some(false) {
        MISMATCH
    } else if strict && report.has_undecided() {
        UNDECIDED
    } else {
        OK
    })
}

fn gallery_run(names: Vec<String>, window: &WindowArgs, out: &OutputArgs, strict: bool) -> Run<u8> {
    let names = if names.is_empty() { canonical_names() } else { names };
    let mut runs = Vec::new();
    for name in &names {
        let spec = window.apply(gallery::builtin(name).map_err(anyhow::Error::from)?);
        runs.push(run_spec_expectations(spec).map_err(anyhow::Error::from)?);
    }
    let text = if out.md {
        runs.iter()
            .map(|r| {
                let mut s = r.report.to_markdown();
                let verdict = if r.passed() { "pass" } else { "FAIL" };
                s.push_str(&format!("\n- expectations: {verdict}\n"));
                for m in &r.mismatches {
                    s.push_str(&format!("- {m}\n"));
                }
                s
            })
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        serde_json::to_string_pretty(&runs).map_err(anyhow::Error::from)? + "\n"
    };
    emit(&text, out.out.as_deref())?;
    for r in &runs {
        eprintln!("{} {}", if r.passed() { "pass" } else { "FAIL" }, r.name);
    }
    Ok(if runs.iter().any(|r| !r.passed()) {
        MISMATCH
    } else if strict && runs.iter().any(|r| r.report.has_undecided()) {
        UNDECIDED
    } else {
        OK
    })
}

impl WindowArgs {
    fn apply(&self, mut spec: SpaceSpec) -> SpaceSpec {
        let d = spec.bounds.window;
        spec = spec.with_window(Window {
            levels: self.levels.map_or(d.levels, |v| v as usize),
            grades: self.grades.map_or(d.grades, |v| v as usize),
            n: self.window.map_or(d.n, |v| v as usize),
        });
        if let Some(e) = self.eps_floor {
            spec.bounds.eps_floor = e;
        }
        if let Some(t) = self.truncation {
            spec.bounds.truncation = t as usize;
        }
        spec
    }
}

fn load_spec(path: Option<&Path>, builtin: Option<&str>) -> Run<SpaceSpec> {
    match (path, builtin) {
        (_, Some(name)) => Ok(gallery::builtin(name).map_err(anyhow::Error::from)?),
        (Some(path), None) => {
            let text = read(path)?;
            dsl::load(&text).map_err(|e| match e {
                Error::Parse(d) => diagnostic(path, &text, &d),
                other => Failure::from(anyhow::Error::from(other)),
            })
        }
        (None, None) => Err(usage("give a .kws path or --builtin NAME")),
    }
}

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Run<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("writing {}: {e}", p.display()))),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(usage(format!("writing stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

/// `path:line:col: message` with the offending line and a caret.
fn diagnostic(path: &Path, src: &str, d: &Diagnostic) -> Failure {
    let line = src.lines().nth(d.span.line.saturating_sub(1)).unwrap_or("");
    let pad = " ".repeat(d.span.col.saturating_sub(1));
    let marks = "^".repeat(d.span.len.max(1));
    usage(format!("{}:{d}\n  {line}\n  {pad}{marks}", path.display()))
}

fn parse_vector(text: Option<&str>) -> Run<RatVector> {
    let Some(text) = text else {
        return Ok(RatVector::basis(1).map_err(anyhow::Error::from)?);
    };
    let mut entries = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (j, v) = item.split_once(':').ok_or_else(|| usage(format!("vector entry `{item}` is not `j:value`")))?;
        let j: usize = j.trim().parse().map_err(|_| usage(format!("bad index in `{item}`")))?;
        let v: Rational = v.trim().parse().map_err(|_| usage(format!("bad rational in `{item}`")))?;
        entries.push((j, v));
    }
    Ok(RatVector::from_entries(entries).map_err(anyhow::Error::from)?)
}

fn symbol_by_name(name: &str) -> Run<Symbol> {
    match name.trim() {
        "successor" => Ok(Symbol::successor()),
        "snake" => Ok(snake_squares()),
        other => {
            let e = other
                .strip_prefix("snake(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|e| e.trim().parse::<u32>().ok())
                .ok_or_else(|| usage(format!("unknown symbol `{other}`; expected successor, snake or snake(e)")))?;
            Ok(snake_symbol(move |k| k.saturating_pow(e)).map_err(anyhow::Error::from)?)
        }
    }
}
