//! Command implementations for the `hetsim` binary.
//!
//! Every command is an ordinary function from parsed arguments to an
//! exit status, writing its report to the supplied sink. The binary in
//! `main.rs` wires these to the process; tests call them in-process and
//! inspect the bytes. Exit statuses: `0` the property holds (or the
//! requested output was produced), `1` the property fails and a
//! counterexample block was emitted, `2` usage or input error, `3` the
//! check is intractable under the configured caps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use hetsim_core::connectors::{weak_saturate, ConnectorExpr, EvalCaps};
use hetsim_core::err::Error;
use hetsim_core::functors::{Coalgebra, FunctorKind};
use hetsim_core::ioformats::{
    elaborate_connector, parse_aut, parse_chc, parse_connector, serialize_connector,
    write_relation, ConnectorSyntax,
};
use hetsim_core::laws::{run_all, LawCfg, DEFAULT_SEED};
use hetsim_core::logic::distinguishing_formula_from;
use hetsim_core::simulation::{greatest_simulation, SimResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTRACTABLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hetsim",
    version,
    about = "Checks simulations between finite state systems of different transition types"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Compute the greatest simulation for a connector between two systems.
    Gsim(GsimArgs),
    /// Synthesize a distinguishing formula for a dissimilar state pair.
    Distinguish(DistinguishArgs),
    /// Check input-output conformance or compatibility of suspension systems.
    Ioco(IocoArgs),
    /// Run the seeded law suite over every module.
    Selftest(SelftestArgs),
}

/// Evaluation caps, settable on every command.
#[derive(Args, Debug, Clone)]
pub struct CapArgs {
    /// Maximum support size per side in Kantorovich evaluation.
    #[arg(long, default_value_t = EvalCaps::default().support_cap)]
    pub support_cap: usize,
    /// Maximum number of middle terms scanned per composition query.
    #[arg(long, default_value_t = EvalCaps::default().middle_cap)]
    pub middle_cap: u128,
}

impl CapArgs {
    pub fn caps(&self) -> EvalCaps {
        EvalCaps {
            support_cap: self.support_cap,
            middle_cap: self.middle_cap,
            ..EvalCaps::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct GsimArgs {
    /// Left system (native text or Aldebaran `.aut`).
    #[arg(long)]
    pub left: PathBuf,
    /// Right system (native text or Aldebaran `.aut`).
    #[arg(long)]
    pub right: PathBuf,
    /// Connector expression file.
    #[arg(long)]
    pub connector: PathBuf,
    /// Write the greatest simulation to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decide membership of one state pair; exit status reflects the verdict.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    pub pair: Option<Vec<String>>,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug)]
pub struct DistinguishArgs {
    /// Left system.
    #[arg(long)]
    pub left: PathBuf,
    /// Right system.
    #[arg(long)]
    pub right: PathBuf,
    /// Connector file; must hold a Kantorovich (`kant`) node.
    #[arg(long = "connector-lambda")]
    pub connector_lambda: PathBuf,
    /// State pair to separate.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], required = true)]
    pub pair: Vec<String>,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug)]
pub struct IocoArgs {
    /// Implementation under test (input-enabled suspension system).
    #[arg(long = "impl")]
    pub impl_: Option<PathBuf>,
    /// Specification (suspension system).
    #[arg(long)]
    pub spec: PathBuf,
    /// Check compatibility of the specification with this second
    /// specification instead of conformance of an implementation.
    #[arg(long)]
    pub compat: Option<PathBuf>,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Seed for every generator in the suite.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Base case count per law group.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
    /// Largest carrier used by the generators.
    #[arg(long, default_value_t = 3)]
    pub max_states: usize,
    #[command(flatten)]
    pub caps: CapArgs,
}

// ---------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------

/// A command-level failure: what to print and which status to exit with.
struct CmdError {
    status: i32,
    message: String,
}

type CmdResult<T> = std::result::Result<T, CmdError>;

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError {
        status: EXIT_USAGE,
        message: msg.into(),
    }
}

fn from_core(err: Error) -> CmdError {
    let status = match err {
        Error::CapExceeded { .. } | Error::Intractable(..) => EXIT_INTRACTABLE,
        _ => EXIT_USAGE,
    };
    CmdError {
        status,
        message: err.to_string(),
    }
}

trait OrUsage<T> {
    fn or_usage(self) -> CmdResult<T>;
}

impl<T> OrUsage<T> for hetsim_core::err::Result<T> {
    fn or_usage(self) -> CmdResult<T> {
        self.map_err(from_core)
    }
}

/// A parsed system plus the state serving as its root.
struct LoadedSystem {
    coalgebra: Coalgebra,
    root: u32,
}

fn read_text(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Loads a system file, accepting the native format and the Aldebaran
/// format (recognized by its `des` header). The root is the initial
/// state of an Aldebaran file and the first declared state otherwise.
fn load_system(path: &Path) -> CmdResult<LoadedSystem> {
    let text = read_text(path)?;
    let is_aut = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("des"));
    if is_aut {
        let doc = parse_aut(&text, None).or_usage()?;
        Ok(LoadedSystem {
            coalgebra: doc.coalgebra,
            root: doc.init,
        })
    } else {
        let coalgebra = parse_chc(&text).or_usage()?;
        Ok(LoadedSystem {
            coalgebra,
            root: 0,
        })
    }
}

fn resolve_pair(
    pair: &[String],
    c: &Coalgebra,
    d: &Coalgebra,
) -> CmdResult<(u32, u32)> {
    let x = c.states().require(&pair[0]).or_usage()?;
    let y = d.states().require(&pair[1]).or_usage()?;
    Ok((x, y))
}

/// The machine-readable block demanded of every failing verdict: the
/// offending pair, the refinement round that removed it, and the
/// connector clause it violated.
fn counterexample_block(
    out: &mut dyn Write,
    sim: &SimResult,
    c: &Coalgebra,
    d: &Coalgebra,
    x: u32,
    y: u32,
    clause: &str,
) -> std::io::Result<()> {
    let round = sim.removed_at.get(&(x, y)).copied().unwrap_or(0);
    writeln!(out, "counterexample:")?;
    writeln!(
        out,
        "  pair: {} {}",
        c.states().name(x),
        d.states().name(y)
    )?;
    writeln!(out, "  round: {round}")?;
    writeln!(out, "  clause: {clause}")?;
    Ok(())
}

fn emit(out: &mut dyn Write, res: CmdResult<i32>) -> i32 {
    match res {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(out, "error: {}", e.message);
            e.status
        }
    }
}

// ---------------------------------------------------------------------
// gsim
// ---------------------------------------------------------------------

pub fn cmd_gsim(args: &GsimArgs, out: &mut dyn Write) -> i32 {
    let res = run_gsim(args, out);
    emit(out, res)
}

fn run_gsim(args: &GsimArgs, out: &mut dyn Write) -> CmdResult<i32> {
    let left = load_system(&args.left)?;
    let mut right = load_system(&args.right)?;
    let ast = parse_connector(&read_text(&args.connector)?).or_usage()?;
    // A weak connector is checked against the saturation of the right
    // system; the saturation is applied here so that input files stay
    // plain systems.
    if let ConnectorSyntax::Weak(tau) = &ast {
        right.coalgebra = weak_saturate(&right.coalgebra, tau).or_usage()?;
    }
    let expr = elaborate_connector(&ast, left.coalgebra.kind(), right.coalgebra.kind())
        .or_usage()?;
    let caps = args.caps.caps();
    let sim = greatest_simulation(&expr, &caps, &left.coalgebra, &right.coalgebra)
        .map_err(from_core)?;
    let text = write_relation(&sim.relation);
    if let Some(path) = &args.out {
        fs::write(path, &text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        let _ = writeln!(out, "pairs: {}", sim.relation.card());
    } else {
        let _ = write!(out, "{text}");
    }
    match &args.pair {
        None => Ok(EXIT_OK),
        Some(pair) => {
            let (x, y) = resolve_pair(pair, &left.coalgebra, &right.coalgebra)?;
            if sim.relation.contains(x, y) {
                let _ = writeln!(out, "verdict: similar");
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(out, "verdict: dissimilar");
                let clause = serialize_connector(&expr);
                let _ = counterexample_block(
                    out,
                    &sim,
                    &left.coalgebra,
                    &right.coalgebra,
                    x,
                    y,
                    &clause,
                );
                Ok(EXIT_FAIL)
            }
        }
    }
}

// ---------------------------------------------------------------------
// distinguish
// ---------------------------------------------------------------------

pub fn cmd_distinguish(args: &DistinguishArgs, out: &mut dyn Write) -> i32 {
    let res = run_distinguish(args, out);
    emit(out, res)
}

fn run_distinguish(args: &DistinguishArgs, out: &mut dyn Write) -> CmdResult<i32> {
    let left = load_system(&args.left)?;
    let right = load_system(&args.right)?;
    let ast = parse_connector(&read_text(&args.connector_lambda)?).or_usage()?;
    if !matches!(ast, ConnectorSyntax::Kant(..)) {
        return Err(usage(
            "distinguishing formulas require a Kantorovich (kant) connector",
        ));
    }
    let expr = elaborate_connector(&ast, left.coalgebra.kind(), right.coalgebra.kind())
        .or_usage()?;
    let ConnectorExpr::Kant(lam) = &expr else {
        return Err(usage(
            "distinguishing formulas require a Kantorovich (kant) connector",
        ));
    };
    let caps = args.caps.caps();
    let (x, y) = resolve_pair(&args.pair, &left.coalgebra, &right.coalgebra)?;
    let sim = greatest_simulation(&expr, &caps, &left.coalgebra, &right.coalgebra)
        .map_err(from_core)?;
    match distinguishing_formula_from(
        &left.coalgebra,
        &right.coalgebra,
        lam,
        &caps,
        &sim,
        x,
        y,
    )
    .map_err(from_core)?
    {
        None => {
            let _ = writeln!(out, "similar");
            Ok(EXIT_OK)
        }
        Some(phi) => {
            let _ = writeln!(out, "{phi}");
            Ok(EXIT_FAIL)
        }
    }
}

// ---------------------------------------------------------------------
// ioco
// ---------------------------------------------------------------------

pub fn cmd_ioco(args: &IocoArgs, out: &mut dyn Write) -> i32 {
    let res = run_ioco(args, out);
    emit(out, res)
}

fn suspension_alphabets(kind: &FunctorKind) -> Option<(&hetsim_core::rel::FinSet, &hetsim_core::rel::FinSet)> {
    match kind {
        FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } => {
            Some((inputs, outputs))
        }
        _ => None,
    }
}

fn run_ioco(args: &IocoArgs, out: &mut dyn Write) -> CmdResult<i32> {
    let spec = load_system(&args.spec)?;
    let Some((ins, outs)) = suspension_alphabets(spec.coalgebra.kind()) else {
        return Err(usage(format!(
            "specification must be a suspension system, got {}",
            spec.coalgebra.kind()
        )));
    };
    if !matches!(spec.coalgebra.kind(), FunctorKind::Susp { .. }) {
        return Err(usage(format!(
            "specification must be a plain suspension system, got {}",
            spec.coalgebra.kind()
        )));
    }
    let ioco = ConnectorExpr::Ioco {
        inputs: ins.clone(),
        outputs: outs.clone(),
    };
    let caps = args.caps.caps();
    match (&args.impl_, &args.compat) {
        (Some(_), Some(_)) => Err(usage(
            "choose one of --impl (conformance) and --compat (compatibility)",
        )),
        (None, None) => Err(usage("one of --impl or --compat is required")),
        (Some(ipath), None) => {
            let imp = load_system(ipath)?;
            if !matches!(imp.coalgebra.kind(), FunctorKind::SuspIe { .. }) {
                return Err(usage(format!(
                    "implementation must be input-enabled, got {}",
                    imp.coalgebra.kind()
                )));
            }
            let sim = greatest_simulation(&ioco, &caps, &spec.coalgebra, &imp.coalgebra)
                .map_err(from_core)?;
            if sim.relation.contains(spec.root, imp.root) {
                let _ = writeln!(out, "verdict: conforms");
                let _ = write!(out, "{}", write_relation(&sim.relation));
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(out, "verdict: fails");
                let clause = serialize_connector(&ioco);
                let _ = counterexample_block(
                    out,
                    &sim,
                    &spec.coalgebra,
                    &imp.coalgebra,
                    spec.root,
                    imp.root,
                    &clause,
                );
                Ok(EXIT_FAIL)
            }
        }
        (None, Some(cpath)) => {
            let other = load_system(cpath)?;
            if other.coalgebra.kind() != spec.coalgebra.kind() {
                return Err(usage(format!(
                    "compatibility needs two suspension systems over one alphabet, got {} and {}",
                    spec.coalgebra.kind(),
                    other.coalgebra.kind()
                )));
            }
            let compat = ConnectorExpr::Comp(
                Box::new(ConnectorExpr::Conv(Box::new(ioco.clone()))),
                Box::new(ioco.clone()),
            );
            let sim = greatest_simulation(&compat, &caps, &spec.coalgebra, &other.coalgebra)
                .map_err(from_core)?;
            if sim.relation.contains(spec.root, other.root) {
                let _ = writeln!(out, "verdict: compatible");
                let _ = write!(out, "{}", write_relation(&sim.relation));
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(out, "verdict: incompatible");
                let clause = serialize_connector(&compat);
                let _ = counterexample_block(
                    out,
                    &sim,
                    &spec.coalgebra,
                    &other.coalgebra,
                    spec.root,
                    other.root,
                    &clause,
                );
                Ok(EXIT_FAIL)
            }
        }
    }
}

// ---------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------

pub fn cmd_selftest(args: &SelftestArgs, out: &mut dyn Write) -> i32 {
    let cfg = LawCfg {
        seed: args.seed,
        cases: args.cases,
        max_states: args.max_states,
        caps: args.caps.caps(),
    };
    let _ = writeln!(
        out,
        "selftest seed={} cases={} max-states={}",
        cfg.seed, cfg.cases, cfg.max_states
    );
    let reports = run_all(&cfg);
    let mut failed = 0usize;
    for rep in &reports {
        let _ = writeln!(out, "{rep}");
        if !rep.ok() {
            failed += 1;
        }
    }
    if failed == 0 {
        let _ = writeln!(out, "suite: ok ({} groups)", reports.len());
        EXIT_OK
    } else {
        let _ = writeln!(out, "suite: FAILED ({failed} of {} groups)", reports.len());
        EXIT_FAIL
    }
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> i32 {
    match &cli.cmd {
        Cmd::Gsim(a) => cmd_gsim(a, out),
        Cmd::Distinguish(a) => cmd_distinguish(a, out),
        Cmd::Ioco(a) => cmd_ioco(a, out),
        Cmd::Selftest(a) => cmd_selftest(a, out),
    }
}
