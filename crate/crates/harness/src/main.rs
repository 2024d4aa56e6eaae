use clap::Parser;
use coalesce_harness::cli::Cli;
use coalesce_harness::{output_of, render, run};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = output_of(&cli);
    if let Some(threads) = output.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = render(&report, &output);
    let written = match &output.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    let verdict = if report.verdict.pass { "pass" } else { "fail" };
    eprintln!("verdict: {verdict}");
    if report.verdict.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
