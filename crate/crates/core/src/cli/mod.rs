//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when one fails, 2 for bad input
//! (unreadable or invalid instance file, bad flags, missing grid anchor).

pub mod file;
pub mod report;
pub mod suites;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::kernel::{format_rational, Rational, Stage};
use file::{load, parse_grid_items, InstanceSource, Loaded};
use report::{anchors, Report};
use suites::{Options, PairSelection};

/// Largest accepted `--depth`; chain sums are fixed point in 128 bits.
pub const MAX_DEPTH: usize = 100;
pub const DEFAULT_TRUNCATION: usize = 6;
pub const CANONICAL_GRID: &str = "1/2,1,2,3,4,8,16";

#[derive(Debug, Parser)]
#[command(name = "effectop", version, about = "Left-invariant metrics on computable topological groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Instance file (JSON).
    pub file: PathBuf,
    /// Number of neighbourhood levels to build.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Stage budget for every enumeration.
    #[arg(long, default_value_t = 2000)]
    pub budget: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the neighbourhood scale and bound distances between probe points.
    MetrizeBk {
        #[command(flatten)]
        common: Common,
        /// `all` or a list of index pairs such as `0-1,1-2`.
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// Build the proper metric on a radius grid and check its laws.
    MetrizeProper {
        #[command(flatten)]
        common: Common,
        /// Radii as `p/q`, comma separated.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Extract dense points and their distance matrix.
    DensePoints {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Bk,
    Proper,
    Dense,
    Instances,
    All,
}

/// `EFFECTOP_TRUNCATION`, default 6.
pub fn truncation_from_env() -> Result<usize> {
    match std::env::var("EFFECTOP_TRUNCATION") {
        Err(_) => Ok(DEFAULT_TRUNCATION),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|t| *t <= 16)
            .ok_or_else(|| Error::Input(format!("EFFECTOP_TRUNCATION must be an integer in 0..=16, got {v:?}"))),
    }
}

pub fn parse_pairs(text: &str) -> Result<PairSelection> {
    if text.trim() == "all" {
        return Ok(PairSelection::All);
    }
    text.split(',')
        .map(|p| {
            let (a, b) = p.trim().split_once('-').ok_or_else(|| Error::Input(format!("bad pair {p:?}; expected i-j")))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad index {s:?}")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>>>()
        .map(PairSelection::Listed)
}

fn grid_of(flag: &Option<String>, src: &InstanceSource) -> Result<Vec<Rational>> {
    if let Some(g) = flag {
        let items: Vec<String> = g.split(',').map(|s| s.trim().to_string()).collect();
        return parse_grid_items(&items);
    }
    if let Some(g) = src.grid()? {
        return Ok(g);
    }
    let items: Vec<String> = CANONICAL_GRID.split(',').map(String::from).collect();
    parse_grid_items(&items)
}

fn options(common: &Common, grid: Vec<Rational>) -> Result<Options> {
    if common.depth > MAX_DEPTH {
        return Err(Error::Input(format!("--depth {} exceeds {MAX_DEPTH}", common.depth)));
    }
    Ok(Options {
        depth: common.depth,
        budget: Stage(common.budget),
        truncation: truncation_from_env()?,
        grid,
        mode: ExecMode::default(),
    })
}

fn topological(src: &InstanceSource) -> Result<&crate::group::GroupInstance> {
    src.loaded.group().ok_or_else(|| {
        Error::Input(format!("instance kind {} has no topological basis; use verify --suite instances", src.loaded.kind()))
    })
}

fn header(name: &str, common: &Common, extra: serde_json::Value, src: &InstanceSource, opts: &Options) -> Report {
    let mut args = json!({
        "file": common.file.display().to_string(),
        "depth": common.depth,
        "budget": common.budget,
        "truncation": opts.truncation,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (args.as_object_mut(), extra) {
        obj.extend(more);
    }
    Report::new(name, args, &src.digest, src.loaded.kind())
}

fn instance_checks(report: &mut Report, src: &InstanceSource, opts: &Options) -> Result<()> {
    match &src.loaded {
        Loaded::Group { group, kind, presentation } => {
            if *kind == "finite" {
                suites::finite_table_suite(report, group);
            }
            if let Some(p) = presentation {
                suites::recovery_suite(report, p, opts.budget)?;
            }
        }
        Loaded::Ce(c) => suites::ce_suite(report, c),
        Loaded::Inverse(sys) => suites::inverse_suite(report, sys),
    }
    Ok(())
}

/// Runs one command, returning the report.
pub fn execute(command: &Command) -> Result<Report> {
    match command {
        Command::MetrizeBk { common, pairs } => {
            let src = load(&common.file)?;
            let opts = options(common, Vec::new())?;
            let g = topological(&src)?;
            let pairs_sel = parse_pairs(pairs)?;
            let mut report = header("metrize-bk", common, json!({"pairs": pairs}), &src, &opts);
            suites::bk_pairs(&mut report, g, &opts, &pairs_sel)?;
            Ok(report)
        }
        Command::MetrizeProper { common, grid } => {
            let src = load(&common.file)?;
            let opts = options(common, grid_of(grid, &src)?)?;
            let g = topological(&src)?;
            let grid_txt: Vec<String> = opts.grid.iter().map(format_rational).collect();
            let mut report = header("metrize-proper", common, json!({"grid": grid_txt}), &src, &opts);
            suites::proper_suite(&mut report, g, &opts)?;
            Ok(report)
        }
        Command::Verify { common, suite, grid } => {
            let src = load(&common.file)?;
            let opts = options(common, grid_of(grid, &src)?)?;
            let suite_name = format!("{suite:?}").to_lowercase();
            let mut report = header("verify", common, json!({"suite": suite_name}), &src, &opts);
            let wants = |s: Suite| *suite == s || *suite == Suite::All;
            if let Some(g) = src.loaded.group() {
                if wants(Suite::Bk) {
                    suites::bk_suite(&mut report, g, &opts)?;
                }
                if wants(Suite::Proper) {
                    suites::proper_suite(&mut report, g, &opts)?;
                }
                if wants(Suite::Dense) {
                    suites::dense_suite(&mut report, g, &opts)?;
                }
            } else if *suite != Suite::Instances && *suite != Suite::All {
                topological(&src)?;
            }
            if wants(Suite::Instances) {
                instance_checks(&mut report, &src, &opts)?;
            }
            Ok(report)
        }
        Command::DensePoints { common } => {
            let src = load(&common.file)?;
            let opts = options(common, Vec::new())?;
            let g = topological(&src)?;
            let mut report = header("dense-points", common, json!({}), &src, &opts);
            if let Some(pres) = suites::dense_suite(&mut report, g, &opts)? {
                let universe = g.probe_points(opts.truncation);
                for p in pres.points.iter().take(64) {
                    let levels = &p.sequence().levels;
                    let limit = suites::limit_of(g, levels, &universe);
                    report.push(
                        format!("dense.point({})", p.index()),
                        anchors::SHRINK,
                        p.sequence().completed() == p.sequence().requested,
                        json!({"levels": levels.iter().map(|b| b.0).collect::<Vec<_>>(), "limit": limit.map(|x| x.0)}),
                        opts.budget.0,
                    );
                }
            }
            Ok(report)
        }
    }
}

fn is_input_error(e: &Error) -> bool {
    !matches!(e, Error::NotYet(_) | Error::Oracle(_))
}

/// Parses arguments, runs, writes the report; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let out = match &cli.command {
        Command::MetrizeBk { common, .. }
        | Command::MetrizeProper { common, .. }
        | Command::Verify { common, .. }
        | Command::DensePoints { common } => common.out.clone(),
    };
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if is_input_error(&e) { 2 } else { 1 };
        }
    };
    let written = match out {
        Some(path) => std::fs::File::create(&path).and_then(|mut f| report.write_to(&mut f)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write_to(&mut lock).and_then(|_| lock.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 2;
    }
    if report.passed() {
        0
    } else {
        1
    }
}
