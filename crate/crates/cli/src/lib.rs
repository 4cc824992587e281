//! Command-line front end.
//!
//! Exit codes: 0 success, 1 the input was read but is invalid (register
//! errors, unknown entry or control ids), 2 usage, parse or I/O failure.

use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use riskreg::golden::{seed_catalog, SCA_LAYOUT, SCA_REGISTER_CSV, SEED_CATALOG};
use riskreg::io::{
    layout_path_for, parse_catalog, parse_layout, parse_register_csv, render_heatmap_ascii, render_heatmap_svg,
    render_report, ReportFormat, ReportOptions,
};
use riskreg::{
    apply_plan_with, build_heatmap_with, check_layout, parse_anchor_pair, recommend_controls, Appetite, BandThresholds,
    Control, ControlPlan, RiskError, RiskRegister,
};
use riskreg_service::{RegisterStore, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "riskreg", version, about = "Qualitative information-security risk register")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a register CSV for range, label, score and ordering problems.
    Validate(ValidateArgs),
    /// Score a register and print the above/below appetite report.
    Assess(AssessArgs),
    /// Apply a control plan to a register and show the residual risk.
    Whatif(WhatIfArgs),
    /// Render the asset value by likelihood heat map.
    Heatmap(HeatmapArgs),
    /// Serve the register over HTTP.
    Serve(ServeArgs),
    /// Print the bundled example register, layout or control catalog.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub register: PathBuf,
    /// Layout sidecar; defaults to `<register>.layout.toml` when present.
    #[arg(long, conflicts_with = "no_layout")]
    pub layout: Option<PathBuf>,
    /// Skip the layout check even if a sidecar exists.
    #[arg(long)]
    pub no_layout: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AppetiteArgs {
    /// Explicit appetite value.
    #[arg(long, conflicts_with = "appetite_anchors")]
    pub appetite: Option<u32>,
    /// Two reference triples `a,t,v:a,t,v`; the appetite is their midpoint.
    #[arg(long, value_name = "A,T,V:A,T,V")]
    pub appetite_anchors: Option<String>,
    /// Band thresholds as fractions of the appetite, `red,yellow,green`.
    #[arg(long, value_name = "R,Y,G", default_value = "1,2/3,1/3")]
    pub bands: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportStyle {
    Markdown,
    Text,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    pub register: PathBuf,
    #[command(flatten)]
    pub appetite: AppetiteArgs,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: ReportStyle,
    /// Append an ASCII heat map.
    #[arg(long)]
    pub heatmap: bool,
}

#[derive(Debug, Args)]
pub struct WhatIfArgs {
    pub register: PathBuf,
    /// Control catalog TOML; the bundled seed catalog is used otherwise.
    #[arg(long, env = "RISKREG_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// `ENTRY:CONTROL[,CONTROL...]`, repeatable. Without any, ranked
    /// recommendations for above-appetite entries are printed instead.
    #[arg(long, value_name = "ENTRY:CONTROLS")]
    pub apply: Vec<String>,
    #[command(flatten)]
    pub appetite: AppetiteArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeatmapFormat {
    Svg,
    Ascii,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    pub register: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "svg")]
    pub format: HeatmapFormat,
    #[command(flatten)]
    pub appetite: AppetiteArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Register CSV to load and to save back to. Starts empty when omitted.
    pub register: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "RISKREG_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Directory of web assets served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[command(flatten)]
    pub appetite: AppetiteArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleKind {
    Register,
    Layout,
    Catalog,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(value_enum, default_value = "register")]
    pub kind: ExampleKind,
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn invalid(message: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }
}

/// Parse errors and I/O are usage-level; everything else means the input
/// was understood but rejected.
impl From<RiskError> for Failure {
    fn from(err: RiskError) -> Self {
        match err {
            RiskError::Parse { .. } => Failure::usage(err),
            _ => Failure::invalid(err),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate(args) => cmd_validate(&args, out),
        Command::Assess(args) => cmd_assess(&args, out, err),
        Command::Whatif(args) => cmd_whatif(&args, out, err),
        Command::Heatmap(args) => cmd_heatmap(&args, out, err),
        Command::Serve(args) => cmd_serve(&args, err),
        Command::Example(args) => {
            let text = match args.kind {
                ExampleKind::Register => SCA_REGISTER_CSV,
                ExampleKind::Layout => SCA_LAYOUT,
                ExampleKind::Catalog => SEED_CATALOG,
            };
            write_out(out, text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    out.write_all(bytes)
        .map_err(|e| Failure::usage(format!("writing output: {e}")))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_failure(path: &Path, err: RiskError) -> Failure {
    let failure = Failure::from(err);
    Failure {
        message: format!("{}: {}", path.display(), failure.message),
        ..failure
    }
}

impl AppetiteArgs {
    pub fn resolve(&self) -> Result<(Appetite, BandThresholds), Failure> {
        let appetite = match (&self.appetite, &self.appetite_anchors) {
            (Some(value), _) => Appetite::explicit(*value),
            (None, Some(pair)) => parse_anchor_pair(pair).and_then(|(low, high)| Appetite::from_anchors(low, high)),
            (None, None) => Ok(Appetite::default()),
        }
        .map_err(Failure::usage)?;
        let bands = self
            .bands
            .parse::<BandThresholds>()
            .map_err(|e| Failure::usage(format!("--bands: {e}")))?;
        Ok((appetite, bands))
    }
}

/// Reads a register and refuses it if validation found errors.
fn load_register(path: &Path, appetite: &Appetite, err: &mut dyn Write) -> Result<RiskRegister, Failure> {
    let bytes = read_file(path)?;
    let (mut register, report) = parse_register_csv(&bytes).map_err(|e| parse_failure(path, e))?;
    if !report.is_acceptable() {
        let _ = write!(err, "{report}");
        return Err(Failure::invalid(format!("{}: register has errors", path.display())));
    }
    for warning in &report.warnings {
        let _ = writeln!(err, "warning: {warning}");
    }
    register.appetite = appetite.value;
    Ok(register)
}

fn load_catalog(path: Option<&Path>) -> Result<Vec<Control>, Failure> {
    match path {
        Some(path) => {
            let bytes = read_file(path)?;
            parse_catalog(&bytes).map_err(|e| parse_failure(path, e))
        }
        None => Ok(seed_catalog()),
    }
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> CmdResult {
    let bytes = read_file(&args.register)?;
    let (register, mut report) = parse_register_csv(&bytes).map_err(|e| parse_failure(&args.register, e))?;

    let layout_path = match (&args.layout, args.no_layout) {
        (_, true) => None,
        (Some(path), _) => Some(path.clone()),
        (None, false) => Some(layout_path_for(&args.register)).filter(|p| p.is_file()),
    };
    if let Some(path) = &layout_path {
        let layout = parse_layout(&read_file(path)?).map_err(|e| parse_failure(path, e))?;
        report.merge(check_layout(&register, &layout));
    }

    let mut text = format!("{}: {} entries", args.register.display(), register.len());
    if let Some(path) = &layout_path {
        text.push_str(&format!(", layout {}", path.display()));
    }
    text.push('\n');
    text.push_str(&report.to_string());
    write_out(out, text.as_bytes())?;
    Ok(if report.is_acceptable() { EXIT_OK } else { EXIT_INVALID })
}

pub fn cmd_assess(args: &AssessArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (appetite, bands) = args.appetite.resolve()?;
    let register = load_register(&args.register, &appetite, err)?;
    let options = ReportOptions {
        format: match args.format {
            ReportStyle::Markdown => ReportFormat::Markdown,
            ReportStyle::Text => ReportFormat::PlainText,
        },
        include_heatmap: args.heatmap,
        include_treatments: true,
        bands,
    };
    write_out(out, render_report(&register, &appetite, &options).as_bytes())?;
    Ok(EXIT_OK)
}

/// Parses `16:C-ADM-01,C-TEC-09` style assignments.
pub fn parse_plan(specs: &[String]) -> Result<ControlPlan, Failure> {
    let mut plan = ControlPlan::new();
    for spec in specs {
        let (entry, controls) = spec
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("--apply `{spec}`: expected ENTRY:CONTROL[,CONTROL]")))?;
        let entry: u32 = entry
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("--apply `{spec}`: entry id must be a positive integer")))?;
        let mut any = false;
        for control in controls.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            plan.assign(entry, control);
            any = true;
        }
        if !any {
            return Err(Failure::usage(format!("--apply `{spec}`: no control ids given")));
        }
    }
    Ok(plan)
}

pub fn cmd_whatif(args: &WhatIfArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (appetite, bands) = args.appetite.resolve()?;
    let plan = parse_plan(&args.apply)?;
    let catalog = load_catalog(args.catalog.as_deref())?;
    let register = load_register(&args.register, &appetite, err)?;

    let mut text = String::new();
    if plan.is_empty() {
        text.push_str(&format!("appetite = {}; recommended controls\n", appetite.value));
        for entry in register.entries.iter().filter(|e| e.risk > appetite.value) {
            let ids: Vec<&str> = recommend_controls(entry, &catalog, appetite.value)
                .into_iter()
                .map(|c| c.id.as_str())
                .collect();
            let list = if ids.is_empty() {
                "(none applicable)".to_string()
            } else {
                ids.join(", ")
            };
            text.push_str(&format!("{}: {} {}\n", entry.id, entry.risk, list));
        }
        write_out(out, text.as_bytes())?;
        return Ok(EXIT_OK);
    }

    let snapshot = apply_plan_with(&register, &catalog, &plan, &bands)?;
    text.push_str(&format!("appetite = {}\n", appetite.value));
    for delta in snapshot.deltas.iter().filter(|d| plan.assignments.contains_key(&d.id)) {
        text.push_str(&format!(
            "{}: {} → {} ({} → {}) via {}\n",
            delta.id,
            delta.risk_before,
            delta.risk_after,
            delta.band_before,
            delta.band_after,
            delta.controls.join(", ")
        ));
    }
    text.push_str(&format!(
        "total: {} → {} (-{})\n",
        snapshot.total_before,
        snapshot.total_after,
        snapshot.total_before - snapshot.total_after
    ));
    let above_after = snapshot
        .after
        .entries
        .iter()
        .filter(|e| e.risk > appetite.value)
        .count();
    let above_before = snapshot
        .before
        .entries
        .iter()
        .filter(|e| e.risk > appetite.value)
        .count();
    text.push_str(&format!("above appetite: {above_before} → {above_after}\n"));
    for report in &snapshot.defense {
        let names = |cats: &[riskreg::ControlCategory]| cats.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ");
        let status = match (report.above_appetite, report.satisfied) {
            (false, _) => "not required",
            (true, true) => "satisfied",
            (true, false) => "NOT satisfied",
        };
        text.push_str(&format!(
            "defense in depth {}: {status}; present [{}], missing [{}]\n",
            report.entry,
            names(&report.present),
            names(&report.missing)
        ));
    }
    write_out(out, text.as_bytes())?;
    Ok(EXIT_OK)
}

pub fn cmd_heatmap(args: &HeatmapArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (appetite, bands) = args.appetite.resolve()?;
    let register = load_register(&args.register, &appetite, err)?;
    let map = build_heatmap_with(&register, appetite.value, &bands);
    let bytes = match args.format {
        HeatmapFormat::Svg => render_heatmap_svg(&map),
        HeatmapFormat::Ascii => render_heatmap_ascii(&map).into_bytes(),
    };
    match &args.output {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let _ = writeln!(err, "wrote {} ({} entries)", path.display(), map.entry_count());
        }
        None => write_out(out, &bytes)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_serve(args: &ServeArgs, err: &mut dyn Write) -> CmdResult {
    let (appetite, bands) = args.appetite.resolve()?;
    let catalog = load_catalog(args.catalog.as_deref())?;
    let register = match &args.register {
        Some(path) => load_register(path, &appetite, err)?,
        None => RiskRegister::default(),
    };
    let store = RegisterStore::new(register, appetite, bands, catalog).map_err(Failure::from)?;
    let config = ServiceConfig {
        static_dir: args.static_dir.clone(),
        save_path: args.register.clone(),
    };
    let addr = format!("{}:{}", args.bind, args.port);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::usage(format!("starting runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::usage(format!("cannot bind {addr}: {e}")))?;
        let local: SocketAddr = listener.local_addr().map_err(|e| Failure::usage(e.to_string()))?;
        let _ = writeln!(err, "riskreg listening on http://{local}");
        let _ = err.flush();
        riskreg_service::serve(listener, Arc::new(store), config)
            .await
            .map_err(|e| Failure::usage(format!("server error: {e}")))
    })?;
    Ok(EXIT_OK)
}
