//! Experiment runner behind the `gauge-lab` binary.
//!
//! Every command writes one JSON report (schema [`gauge_lab::report::SCHEMA`])
//! plus optional CSV tables. Exit codes: 0 when the command's checks pass,
//! 1 when they fail or the computation errors, 2 for bad input.

pub mod config;
pub mod experiments;
pub mod inputs;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use gauge_lab::Error;
use serde_json::{json, Value};

use config::{Cli, Params, Resolved};
use experiments::Outcome;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn env_seed() -> Result<Option<u64>, Error> {
    match std::env::var("GIL_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("GIL_SEED={s:?} is not a u64"))),
        Err(_) => Ok(None),
    }
}

fn resolve(cli: &Cli) -> Result<Resolved, Error> {
    let params = match &cli.config {
        Some(path) => Params::from_file(path)?.overlay(&cli.params),
        None => cli.params.clone(),
    };
    Resolved::new(
        &cli.command,
        cli.target.clone(),
        &params,
        env_seed()?,
        cli.deterministic,
        cli.threads,
    )
}

/// The full report document for a finished run.
pub fn report_json(cfg: &Resolved, out: &Outcome) -> Value {
    let mut doc = json!({
        "schema": gauge_lab::report::SCHEMA,
        "command": cfg.command,
        "target": cfg.target,
        "config": cfg,
        "pass": out.pass,
        "result": out.result,
    });
    if !cfg.deterministic {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap_or_default();
        doc["generated_at_unix"] = json!(now.as_secs());
    }
    doc
}

fn write_out(dir: &Path, cfg: &Resolved, doc: &Value, out: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = match (&cfg.target, cfg.command.as_str()) {
        (Some(t), "gallery") => format!("{}-{t}", cfg.command),
        _ => cfg.command.clone(),
    };
    std::fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(doc)? + "\n",
    )?;
    for t in &out.tables {
        std::fs::write(dir.join(format!("{}.csv", t.name)), &t.csv)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let cfg = resolve(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let out = pool.install(|| experiments::run(&cfg))?;
    let doc = report_json(&cfg, &out);
    match &cli.out {
        Some(dir) => write_out(dir, &cfg, &doc, &out).map_err(|e| {
            Error::InvalidParameter(format!("cannot write to {}: {e}", dir.display()))
        })?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("reports serialize")
        ),
    }
    Ok(if out.pass { 0 } else { 1 })
}

/// Parse `argv`, run the command, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
