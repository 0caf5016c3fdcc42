//! Command line front end for `shapemap-core`.
//!
//! Every subcommand reads one configuration file (see [`config`]). Exit codes:
//! 0 success, 1 runtime domain error, 2 configuration or usage error,
//! 3 validation failure, 4 verification failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Context;
use crate::config::{Config, Model};
use crate::error::{CliError, Status};

/// Run the command line `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return e.exit_code();
        }
    };
    match dispatch(&cli.command, out, err) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Status, CliError> {
    let common = command.common();
    let (config, source) = Config::load(&common.config)?;
    if common.dump_config {
        out.write_all(config.to_toml().as_bytes())?;
        return Ok(Status::Ok);
    }
    let model = Model::new(&config, &source)?;
    let mut cx = Context { config: &config, source: &source, model: &model, out, err };
    let status = match command {
        Command::Validate(a) => commands::validate(&mut cx, a),
        Command::Shape(a) => commands::shape(&mut cx, a),
        Command::Curvature(a) => commands::curvature(&mut cx, a),
        Command::Collapse(a) => commands::collapse(&mut cx, a),
        Command::Verify(a) => commands::verify(&mut cx, a),
        Command::Surface(a) => commands::surface(&mut cx, a),
    }?;
    cx.out.flush()?;
    Ok(status)
}
