use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use klfree::{render_human, run, Cli, Params};

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let params = Params { command: cli.command.clone(), budget: cli.budget };
    let out = match run(&params, cli.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let text = if cli.json {
        serde_json::to_string_pretty(&out.report).expect("reports serialise") + "\n"
    } else if cli.csv {
        match &out.csv {
            Some(c) => c.render(),
            None => {
                eprintln!("error: {} has no CSV output", out.report.command);
                return ExitCode::from(1);
            }
        }
    } else {
        render_human(&out.report)
    };
    if let Err(e) = emit(&cli, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if out.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("assertion failed: see report");
        ExitCode::from(2)
    }
}
