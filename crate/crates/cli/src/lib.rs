//! Command-line front end: argument handling, text and JSON rendering.
//!
//! [`run`] never touches the process streams or exit status so that tests
//! can drive it directly; `main` only prints the body and exits.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use wfcheck_core::{analyze, parse, AnalysisOptions, ProtocolSpec};

pub mod eval;
pub mod json;
pub mod text;

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_NOT_TAGGED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub format: Format,
    pub body: String,
    pub exit_code: i32,
}

impl RenderedReport {
    fn input_error(format: Format, msg: impl std::fmt::Display) -> Self {
        RenderedReport {
            format,
            body: format!("error: {msg}\n"),
            exit_code: EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wfcheck",
    version,
    about = "Secrecy analysis of cryptographic protocols with witness functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every rule of every generalized role.
    Analyze(AnalyzeArgs),
    /// Print the generalized roles.
    Roles(RolesArgs),
    /// Check that the protocol's messages cannot be confused.
    Tagcheck(TagcheckArgs),
    /// Evaluate F or F' on messages under an inline context.
    Eval(eval::EvalArgs),
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write bottom/top, >= and friends instead of glyphs.
    #[arg(long)]
    ascii: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[command(flatten)]
    out: Output,
    /// Also check subjects that only occur in received messages.
    #[arg(long)]
    diagnostic: bool,
    /// Stop after the first rule that fails.
    #[arg(long)]
    fail_fast: bool,
    /// Analyze even if the protocol is not tagged.
    #[arg(long)]
    no_tagcheck: bool,
    /// Ignore `roles override` blocks and derive every role.
    #[arg(long)]
    derive_roles: bool,
}

#[derive(Debug, Args)]
struct RolesArgs {
    file: PathBuf,
    #[command(flatten)]
    out: Output,
    #[arg(long)]
    derive_roles: bool,
}

#[derive(Debug, Args)]
struct TagcheckArgs {
    file: PathBuf,
    #[command(flatten)]
    out: Output,
}

/// Runs one invocation. `argv` excludes the program name.
pub fn run<I, T>(argv: I) -> RenderedReport
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = std::iter::once(OsString::from("wfcheck")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let exit_code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            return RenderedReport {
                format: Format::Text,
                body: e.render().to_string(),
                exit_code,
            };
        }
    };
    match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Roles(a) => run_roles(a),
        Command::Tagcheck(a) => run_tagcheck(a),
        Command::Eval(a) => eval::run(a),
    }
}

pub fn load(path: &Path) -> Result<ProtocolSpec, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn run_analyze(a: AnalyzeArgs) -> RenderedReport {
    let spec = match load(&a.file) {
        Ok(s) => s,
        Err(e) => return RenderedReport::input_error(a.out.format, e),
    };
    let opts = AnalysisOptions {
        diagnostic: a.diagnostic,
        fail_fast: a.fail_fast,
        check_tagging: !a.no_tagcheck,
        use_overrides: !a.derive_roles,
    };
    let report = match analyze(&spec, opts) {
        Ok(r) => r,
        Err(e) => return RenderedReport::input_error(a.out.format, e),
    };
    let body = match a.out.format {
        Format::Text => text::render_report(&report, a.out.ascii),
        Format::Json => json::to_string(&json::JsonReport::from_report(&report)),
    };
    RenderedReport {
        format: a.out.format,
        body,
        exit_code: exit_code(report.overall),
    }
}

pub fn exit_code(overall: wfcheck_core::Overall) -> i32 {
    match overall {
        wfcheck_core::Overall::Certified => EXIT_CERTIFIED,
        wfcheck_core::Overall::Violation => EXIT_VIOLATION,
        wfcheck_core::Overall::NotTagged => EXIT_NOT_TAGGED,
    }
}

fn run_roles(a: RolesArgs) -> RenderedReport {
    let spec = match load(&a.file) {
        Ok(s) => s,
        Err(e) => return RenderedReport::input_error(a.out.format, e),
    };
    let roles = wfcheck_core::roles::all_roles(&spec, !a.derive_roles);
    let body = match a.out.format {
        Format::Text => text::render_roles(&roles, a.out.ascii),
        Format::Json => json::to_string(
            &roles
                .iter()
                .map(json::JsonRole::from_role)
                .collect::<Vec<_>>(),
        ),
    };
    RenderedReport {
        format: a.out.format,
        body,
        exit_code: 0,
    }
}

fn run_tagcheck(a: TagcheckArgs) -> RenderedReport {
    let spec = match load(&a.file) {
        Ok(s) => s,
        Err(e) => return RenderedReport::input_error(a.out.format, e),
    };
    let verdict = wfcheck_core::tagged(&spec);
    let patterns = wfcheck_core::tagging::message_patterns(&spec);
    let body = match a.out.format {
        Format::Text => text::render_tagging(&spec.name, &patterns, &verdict),
        Format::Json => json::to_string(&json::JsonTagging::new(&spec.name, &patterns, &verdict)),
    };
    RenderedReport {
        format: a.out.format,
        body,
        exit_code: if verdict.is_tagged() {
            EXIT_CERTIFIED
        } else {
            EXIT_NOT_TAGGED
        },
    }
}
