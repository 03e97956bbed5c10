//! Front end for the `jba` binary: argument parsing, sweeps and table output.

pub mod commands;
pub mod config;
pub mod error;
pub mod matching;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use config::{Format, ParseFailure};
use error::CliError;

/// Runs the program on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match config::parse(argv) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
        Err(ParseFailure::Cli(e)) => return fail(&e),
    };
    let report = match commands::execute(&cli) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let common = cli.command.common();
    if let Err(e) = emit(&report.table, common.format, common.out.as_deref()) {
        return fail(&e);
    }
    let flagged = report.table.flagged_rows();
    if report.warn_flags && flagged > 0 {
        eprintln!(
            "warning: {flagged} of {} rows lie outside a regime's validity conditions (see the flags column)",
            report.table.rows.len()
        );
    }
    match report.check_failure {
        Some(msg) => fail(&CliError::Check(msg)),
        None => 0,
    }
}

fn fail(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn emit(table: &output::Table, format: Format, out: Option<&std::path::Path>) -> error::Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => table.write_json(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}
