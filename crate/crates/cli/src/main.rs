mod args;
mod commands;
mod plot;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use commands::{Figure, Run};
use dicke_mirror::Error;

/// 2: refused parameters, 3: failed numerical validation, 4: I/O.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) => 4,
        Error::NoConvergence { .. }
        | Error::StepUnderflow { .. }
        | Error::CorruptedState(_)
        | Error::CutoffValidation(_)
        | Error::DomainViolation { .. }
        | Error::EnergyDrift { .. }
        | Error::NotHermitian(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = match &cli.command {
        Command::Fig2(a) | Command::Fig3(a) => &a.common.out_dir,
        Command::PhaseScan(a) => &a.common.out_dir,
        Command::Classical(a) => &a.common.out_dir,
        Command::Ground(a) => &a.common.out_dir,
        Command::Evolve(a) => &a.common.out_dir,
    };
    if let Err(e) = commands::ensure_dir(out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return ExitCode::from(4);
    }
    let mut run = Run::new(out_dir.clone());
    let argv: Vec<String> = std::env::args().collect();
    run.manifest.set("command", argv.join(" "));
    run.manifest.set("version", env!("CARGO_PKG_VERSION"));

    let started = Instant::now();
    let outcome = match &cli.command {
        Command::Fig2(a) => commands::figure(&mut run, a, Figure::Occupation),
        Command::Fig3(a) => commands::figure(&mut run, a, Figure::Entropy),
        Command::PhaseScan(a) => commands::phase_scan(&mut run, a),
        Command::Classical(a) => commands::classical(&mut run, a),
        Command::Ground(a) => commands::ground(&mut run, a),
        Command::Evolve(a) => commands::evolve(&mut run, a),
    };
    let code = match &outcome {
        Ok(()) => 0,
        Err(e) => exit_code(e),
    };
    run.manifest.set("wall_clock_seconds", started.elapsed().as_secs_f64());
    run.manifest.set("status", if code == 0 { "ok" } else { "failed" });
    run.manifest.set("exit_code", code);
    if let Err(e) = &outcome {
        run.manifest.set("error", e);
        eprintln!("error: {e}");
    }
    run.manifest.set("files", run.files().join(","));
    if let Err(e) = run.manifest.write_to(&run.manifest_path()) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(4);
    }
    ExitCode::from(code)
}
