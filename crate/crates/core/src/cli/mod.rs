//! Batch command-line front end.

pub mod config;
pub mod csv;
pub mod run;
pub mod svg;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use log::error;

use crate::error::Error;
pub use config::{Cli, Command, ConfigError, GridSpec, RunConfig};
pub use csv::{fmt_g, parse, render, Cell, CsvTable};
pub use run::run;
pub use svg::{emit_svg, SvgError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_REGIME: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_out_of_regime() {
        return EXIT_REGIME;
    }
    match e {
        Error::Scaling { source, .. } => exit_code(source),
        Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::Domain(_)
        | Error::Index { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn meta_line(cfg: &RunConfig) -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "{}{} command={} unix_time={secs}",
        csv::META_PREFIX,
        env!("CARGO_PKG_VERSION"),
        cfg.command.name()
    )
}

/// Write through a sibling temporary file so a failed run leaves no
/// partial output behind.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = format!(
        ".{}.partial",
        path.file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default()
    );
    tmp.set_file_name(name);
    let result = std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match cli.into_run_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    execute(&cfg)
}

/// Run a validated configuration and write its outputs.
pub fn execute(cfg: &RunConfig) -> i32 {
    let tables = match run(cfg) {
        Ok(t) => t,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };

    let svg_text = match &cfg.svg {
        None => None,
        Some(_) => {
            let cols = cfg
                .plot
                .clone()
                .or_else(|| run::default_plot(cfg.command).map(|(a, b)| (a.into(), b.into())));
            let Some((xc, yc)) = cols else {
                eprintln!(
                    "error: no default plot for {}; pass --plot",
                    cfg.command.name()
                );
                return EXIT_USAGE;
            };
            match emit_svg(&tables, &xc, &yc) {
                Ok(s) => Some(s),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
    };

    let meta = cfg.meta.then(|| meta_line(cfg));
    let text = render(&tables, meta.as_deref());
    let written = match &cfg.out {
        Some(path) => write_atomic(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return EXIT_NUMERIC;
    }
    if let (Some(path), Some(svg)) = (&cfg.svg, svg_text) {
        if let Err(e) = write_atomic(path, &svg) {
            eprintln!("error: writing {}: {e}", path.display());
            if let Some(out) = &cfg.out {
                let _ = std::fs::remove_file(out);
            }
            return EXIT_NUMERIC;
        }
    }
    EXIT_OK
}
