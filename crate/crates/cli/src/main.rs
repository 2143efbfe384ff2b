//! `weylsim` command-line front end.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure or
//! disagreement between routes, 4 statistical insufficiency.

mod args;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Map, Value};
use weylsim::WeylError;

use args::{Cli, Command, Format, Global};
use commands::{CliError, Status};

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Input(_) => 2,
        CliError::Weyl(e) => match e {
            WeylError::Dimension { .. } | WeylError::Domain(_) | WeylError::Parameter { .. } | WeylError::Config(_) | WeylError::Unsupported(_) => 2,
            WeylError::Budget(_) | WeylError::Numerical(_) => 3,
            WeylError::Statistical(_) => 4,
        },
    }
}

fn configure_threads(g: &Global) -> Result<(), CliError> {
    let Some(n) = g.threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Weyl(WeylError::Config("--threads must be at least 1".into())));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Weyl(WeylError::Config(format!("thread pool: {e}"))))?;
        if n == 1 {
            weylsim::exec::set_policy(weylsim::exec::ExecPolicy::Sequential);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without parallel support; running on one thread");
    }
    Ok(())
}

/// Global options and command of an earlier run, from its echoed config.
fn load_replay(path: &std::path::Path, current: &Global) -> Result<(Global, Command), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    // saved stderr of a CSV run: the metadata line, possibly among warnings
    let text = text.lines().find_map(|l| l.strip_prefix("# ")).unwrap_or(&text);
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let config = doc.get("config").unwrap_or(&doc);
    let bad = |e: serde_json::Error| CliError::Input(format!("{}: config: {e}", path.display()));
    let mut global: Global = serde_json::from_value(config.get("global").cloned().unwrap_or(Value::Null)).map_err(bad)?;
    let command: Command = serde_json::from_value(config.get("args").cloned().unwrap_or(Value::Null)).map_err(bad)?;
    global.threads = current.threads;
    global.out = current.out.clone();
    Ok((global, command))
}

fn emit(g: &Global, text: &str) -> Result<(), CliError> {
    match &g.out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

fn real_main() -> Result<Status, CliError> {
    let cli = Cli::parse();
    let (global, mut command) = match cli.command {
        Command::Replay(r) => load_replay(&r.file, &cli.global)?,
        other => (cli.global, other),
    };
    configure_threads(&global)?;
    commands::resolve(&mut command, &global)?;

    let config = json!({
        "global": global,
        "args": command,
    });
    let outcome = commands::run(&command, &global)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let text = match global.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("schema".into(), render::SCHEMA.into());
            doc.insert("command".into(), command.name().into());
            doc.insert("config".into(), config);
            doc.extend(outcome.body);
            render::to_json_string(&Value::Object(doc))
        }
        Format::Csv => {
            // CSV carries data only; the metadata goes to stderr
            let meta = json!({ "schema": render::SCHEMA, "command": command.name(), "config": config });
            eprintln!("# {}", render::to_compact_json_string(&meta));
            outcome.table.to_csv()
        }
    };
    emit(&global, &text)?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Disagreement) => ExitCode::from(3),
        Ok(Status::Shortfall) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
