use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gaugeforge::builder::assemble;
use gaugeforge::model::{declare_theory, Model};
use gaugeforge::oracle::OracleConfig;
use gaugeforge::verifier::{run_report, Report};

use crate::render::{render_json, render_text};
use crate::spec::{parse_spec, SpecError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "gaugeforge", version, about = "Build and verify classical gauge theories from a spec file")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    /// Oracle seed.
    #[arg(long, env = "GAUGEFORGE_SEED", global = true)]
    pub seed: Option<u64>,
    /// Oracle samples per claim.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Skip numerical cross-checks.
    #[arg(long, global = true)]
    pub no_oracle: bool,
    /// Write the rendered output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the Lagrangian and print its parts.
    Build { spec: PathBuf },
    /// Run the checks named by the file's `check` lines.
    Check { spec: PathBuf },
    /// Derive and compare the field equations.
    Eom { spec: PathBuf },
    /// Derive and test the Noether current.
    Noether { spec: PathBuf },
    /// Run every check.
    Report { spec: PathBuf },
}

impl Command {
    fn spec(&self) -> &PathBuf {
        match self {
            Command::Build { spec }
            | Command::Check { spec }
            | Command::Eom { spec }
            | Command::Noether { spec }
            | Command::Report { spec } => spec,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Spec { path: String, source: SpecError },
    #[error("{0}")]
    Model(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

#[derive(Serialize)]
struct BuildDoc {
    theory: String,
    group: String,
    fields: Vec<String>,
    couplings: Vec<String>,
    parts: Vec<BuildPart>,
}

#[derive(Serialize)]
struct BuildPart {
    kind: String,
    field: Option<String>,
    note: String,
    expr: String,
}

fn build_doc(m: &Model) -> Result<BuildDoc, CliError> {
    let l = assemble(m).map_err(|e| CliError::Model(e.to_string()))?;
    Ok(BuildDoc {
        theory: m.spec.name.clone(),
        group: m.spec.group.to_string(),
        fields: m.fields().iter().map(|f| f.name().to_string()).collect(),
        couplings: m.coupling_symbols().iter().map(|c| c.to_string()).collect(),
        parts: l
            .parts
            .iter()
            .map(|p| BuildPart { kind: p.kind.to_string(), field: p.field.clone(), note: p.note.clone(), expr: p.expr.to_string() })
            .collect(),
    })
}

fn render_build(d: &BuildDoc, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(d).expect("build output serialises");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("theory {} ({})\nfields: {}\ncouplings: {}\n", d.theory, d.group, d.fields.join(", "), d.couplings.join(", "));
            for p in &d.parts {
                let owner = p.field.as_deref().map(|f| format!(" [{f}]")).unwrap_or_default();
                s.push_str(&format!("\n{}{owner}: {}\n", p.kind, p.note));
                for line in p.expr.lines() {
                    s.push_str("  ");
                    s.push_str(line);
                    s.push('\n');
                }
            }
            s
        }
    }
}

fn oracle_config(cli: &Cli) -> Option<OracleConfig> {
    if cli.no_oracle {
        return None;
    }
    let mut cfg = OracleConfig::default();
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    Some(cfg)
}

fn selection(cmd: &Command, m: &Model) -> Vec<String> {
    match cmd {
        Command::Eom { .. } => vec!["eom".into()],
        Command::Noether { .. } => vec!["noether".into()],
        Command::Report { .. } => vec!["all".into()],
        _ => m.spec.checks.clone(),
    }
}

fn load(path: &PathBuf) -> Result<Model, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: shown.clone(), source })?;
    let spec = parse_spec(&text).map_err(|source| CliError::Spec { path: shown, source })?;
    declare_theory(spec).map_err(|e| CliError::Model(e.to_string()))
}

fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    let m = load(cli.command.spec())?;
    if let Command::Build { .. } = cli.command {
        return Ok((render_build(&build_doc(&m)?, cli.format), true));
    }
    let cfg = oracle_config(cli);
    let report: Report = run_report(&m, &selection(&cli.command, &m), cfg.as_ref()).map_err(|e| CliError::Model(e.to_string()))?;
    let text = match cli.format {
        Format::Json => render_json(&report),
        Format::Text => render_text(&report),
    };
    Ok((text, report.all_pass()))
}

/// Run the command line `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (text, pass) = match execute(&cli) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &text).map_err(|source| CliError::Write { path: p.display().to_string(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "stdout".into(), source }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
