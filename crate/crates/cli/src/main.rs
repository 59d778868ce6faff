//! `tileupb`: generate, check and verify tile-structure UPBs.
//!
//! Exit codes: 0 when every check passes, 1 when a property check fails (the
//! report is still emitted), 2 on usage or input errors.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use tile_upb::exec::Execution;
use tile_upb::families::{Family, FamilySpec};
use tile_upb::grid::{self, GridError};
use tile_upb::locc::{build_theorem3_protocol, candidates_for, verify_protocol};
use tile_upb::ppt::ppt_report;
use tile_upb::rect::{enumerate_special_rectangles, extension_witness, is_u_tile};
use tile_upb::state::build_upb;
use tile_upb::verify::{check_upb, SeesawConfig, UpbCheckConfig, ORTHO_TOL};
use tile_upb::TileStructure;

const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "tileupb", version, about = "Unextendible product bases from tile structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .tile file and list every violated invariant.
    Validate(Common),
    /// Enumerate the special rectangles of a structure.
    SpecialRects(Common),
    /// Decide whether a structure is U-tile; prints a witness if not.
    CheckUtile(Common),
    /// Write a family member in .tile format.
    Gen(Common),
    /// Emit the UPB of a U-tile structure as JSON.
    BuildUpb(Common),
    /// Orthogonality, size, complement and seesaw checks on the UPB.
    VerifyUpb(Common),
    /// Spectra of the PPT state and its partial transpose.
    Ppt(Common),
    /// Simulate the entanglement-assisted discrimination protocol.
    Distinguish(Common),
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Input .tile file; alternative to --family.
    file: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Tile count for prop3.
    #[arg(long)]
    tiles: Option<usize>,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance of the command's main check; the module default if absent.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// What a subcommand produced: the JSON result, a text rendering, and
/// whether its property check passed.
struct Outcome {
    result: Value,
    text: String,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Validate(c) => ("validate", c),
        Command::SpecialRects(c) => ("special-rects", c),
        Command::CheckUtile(c) => ("check-utile", c),
        Command::Gen(c) => ("gen", c),
        Command::BuildUpb(c) => ("build-upb", c),
        Command::VerifyUpb(c) => ("verify-upb", c),
        Command::Ppt(c) => ("ppt", c),
        Command::Distinguish(c) => ("distinguish", c),
    };
    match run(&cli.command, name, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("tileupb {name}: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command, name: &str, c: &Common) -> Result<bool, UsageError> {
    if let Command::Gen(_) = command {
        return gen(c);
    }
    let out = match command {
        Command::Validate(_) => validate(c)?,
        Command::SpecialRects(_) => special_rects(c)?,
        Command::CheckUtile(_) => check_utile(c)?,
        Command::BuildUpb(_) => build(c)?,
        Command::VerifyUpb(_) => verify(c)?,
        Command::Ppt(_) => ppt(c)?,
        Command::Distinguish(_) => distinguish(c)?,
        Command::Gen(_) => unreachable!(),
    };
    let report = json!({
        "command": name,
        "config": config_record(name, c),
        "pass": out.pass,
        "result": out.result,
    });
    let mut text = serde_json::to_string(&report)?;
    text.push('\n');
    if let Some(path) = &c.output {
        std::fs::write(path, &text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    }
    if c.json {
        print!("{text}");
    } else {
        println!("{}", out.text);
    }
    Ok(out.pass)
}

/// Every flag with its effective value, including defaults.
fn config_record(name: &str, c: &Common) -> Value {
    json!({
        "file": c.file.as_ref().map(|p| p.display().to_string()),
        "family": c.family,
        "m": c.m,
        "n": c.n,
        "tiles": c.tiles,
        "restarts": c.restarts,
        "seed": c.seed,
        "tol": effective_tol(name, c),
        "execution": execution(),
    })
}

fn effective_tol(name: &str, c: &Common) -> Option<f64> {
    match name {
        "verify-upb" => Some(c.tol.unwrap_or(ORTHO_TOL)),
        "distinguish" => Some(c.tol.unwrap_or(PROBABILITY_TOL)),
        _ => c.tol,
    }
}

fn execution() -> Execution {
    if Execution::available() {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn family_spec(c: &Common) -> Result<Option<FamilySpec>, UsageError> {
    let Some(name) = &c.family else {
        return Ok(None);
    };
    let family: Family = name.parse()?;
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| UsageError(format!("--family {family} needs --{flag}")));
    let spec = match family {
        Family::Example1 | Family::Fig2 => FamilySpec {
            family,
            m: 4,
            n: 4,
            t: 0,
        },
        Family::Prop2 | Family::FiveTile => FamilySpec {
            family,
            m: need(c.m, "m")?,
            n: need(c.n, "n")?,
            t: 0,
        },
        Family::Prop3 => {
            let m = need(c.m, "m")?;
            FamilySpec {
                family,
                m,
                n: m,
                t: need(c.tiles, "tiles")?,
            }
        }
    };
    Ok(Some(spec))
}

fn load(c: &Common) -> Result<TileStructure, UsageError> {
    match (&c.file, family_spec(c)?) {
        (Some(_), Some(_)) => Err(UsageError("give either a file or --family, not both".into())),
        (None, None) => Err(UsageError("no input: give a .tile file or --family".into())),
        (None, Some(spec)) => Ok(spec.generate()?),
        (Some(path), None) => {
            let text = read(path)?;
            Ok(grid::parse_tile_grid(&text)?)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn gen(c: &Common) -> Result<bool, UsageError> {
    let spec = family_spec(c)?.ok_or_else(|| UsageError("gen needs --family".into()))?;
    let text = spec.generate()?.serialize();
    match &c.output {
        Some(path) => std::fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(true)
}

/// Syntax problems are input errors; a well-formed grid that breaks a tile
/// invariant is a failed check.
fn validate(c: &Common) -> Result<Outcome, UsageError> {
    let parsed = match (&c.file, family_spec(c)?) {
        (Some(path), None) => {
            let text = read(path)?;
            grid::parse_cell_map(&text)?;
            grid::parse_tile_grid(&text)
        }
        _ => Ok(load(c)?),
    };
    let (result, text, pass) = match parsed {
        Ok(ts) => {
            let report = grid::validate(&ts);
            let text = if report.is_valid() {
                format!("valid {}x{} structure with {} tiles", ts.m(), ts.n(), ts.tile_count())
            } else {
                report
                    .issues
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            let pass = report.is_valid();
            (
                json!({"m": ts.m(), "n": ts.n(), "tiles": ts.tile_count(), "issues": report.issues}),
                text,
                pass,
            )
        }
        Err(e @ (GridError::Syntax { .. } | GridError::UnsupportedSize { .. } | GridError::DimensionMismatch(_))) => {
            return Err(e.into())
        }
        Err(e) => (json!({"error": e.to_string()}), format!("invalid: {e}"), false),
    };
    Ok(Outcome { result, text, pass })
}

fn special_rects(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let rects = enumerate_special_rectangles(&ts)?;
    let text = rects
        .iter()
        .map(|r| format!("tiles {:?} rows {:?} cols {:?}", r.tile_ids, r.rows, r.cols))
        .chain(std::iter::once(format!("{} special rectangles", rects.len())))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        result: json!({"count": rects.len(), "rectangles": rects}),
        text,
        pass: true,
    })
}

fn check_utile(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let verdict = is_u_tile(&ts)?;
    let product = if verdict.is_u_tile {
        None
    } else {
        Some(extension_witness(&ts, &verdict)?)
    };
    let text = match &verdict.witness {
        None => "U-tile".to_string(),
        Some(w) => format!(
            "not U-tile: tiles {:?} split along {:?} into {:?} and {:?}",
            w.rectangle.tile_ids, w.axis, w.first, w.second
        ),
    };
    Ok(Outcome {
        pass: verdict.is_u_tile,
        result: json!({"verdict": verdict, "extension_product_state": product}),
        text,
    })
}

fn build(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let verdict = is_u_tile(&ts)?;
    if !verdict.is_u_tile {
        return Ok(Outcome {
            text: "not U-tile; no UPB emitted".into(),
            result: json!({"verdict": verdict}),
            pass: false,
        });
    }
    let upb = build_upb(&ts, false)?;
    Ok(Outcome {
        text: format!("UPB with {} states in {}x{}", upb.len(), upb.m, upb.n),
        result: serde_json::to_value(&upb)?,
        pass: true,
    })
}

fn verify(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let upb = build_upb(&ts, false)?;
    let cfg = UpbCheckConfig {
        ortho_tol: c.tol.unwrap_or(ORTHO_TOL),
        seesaw: SeesawConfig {
            restarts: c.restarts,
            seed: c.seed,
            execution: execution(),
            ..SeesawConfig::default()
        },
    };
    let r = check_upb(&upb, &cfg)?;
    let text = format!(
        "size {} (expected {}), max |<i|j>| {:.2e}, complement {} (expected {}), U-tile {}, seesaw best {:.6}: {}\n{}",
        r.size,
        r.expected_size,
        r.orthogonality.max_off_diagonal,
        r.complement_dim,
        r.expected_complement_dim,
        r.verdict.is_u_tile,
        r.seesaw.best_overlap,
        r.seesaw_verdict.describe(),
        if r.pass { "PASS" } else { "FAIL" }
    );
    Ok(Outcome {
        pass: r.pass,
        result: serde_json::to_value(&r)?,
        text,
    })
}

fn ppt(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let r = ppt_report(&build_upb(&ts, false)?)?;
    let pass = r.ppt && r.rank == r.expected_rank && r.warnings.is_empty();
    let mut text = format!(
        "trace {:.12}, rank {} (expected {}), min eig {:.2e}, min eig of partial transpose {:.2e}, PPT {}",
        r.trace, r.rank, r.expected_rank, r.min_eigenvalue, r.min_eigenvalue_pt, r.ppt
    );
    for w in &r.warnings {
        text.push_str(&format!("\nwarning: {w}"));
    }
    Ok(Outcome {
        pass,
        result: serde_json::to_value(&r)?,
        text,
    })
}

fn distinguish(c: &Common) -> Result<Outcome, UsageError> {
    let ts = load(c)?;
    let (m, n) = (ts.m(), ts.n());
    let reference = FamilySpec {
        family: Family::Prop2,
        m,
        n,
        t: 0,
    }
    .generate()
    .ok();
    if reference.as_ref() != Some(&ts) {
        return Err(UsageError(format!(
            "a protocol is only available for the prop2 structure; input is not prop2({m},{n})"
        )));
    }
    let protocol = build_theorem3_protocol(m, n)?;
    let upb = build_upb(&ts, false)?;
    let r = verify_protocol(&protocol, &candidates_for(&upb, protocol.resource_dim), execution())?;
    let tol = c.tol.unwrap_or(PROBABILITY_TOL);
    let pass = r.pass && (r.min_success_probability - 1.0).abs() <= tol;
    let text = format!(
        "{} states, resource dimension {}, {} branches, min success probability {:.12}, misidentifications {}: {}",
        r.states.len(),
        r.resource_dim,
        r.branch_count,
        r.min_success_probability,
        r.misidentifications.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(Outcome {
        pass,
        result: serde_json::to_value(&r)?,
        text,
    })
}
