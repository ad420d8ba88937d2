mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use lowzero_core::Error;

use commands::Command;

#[derive(Debug, Parser)]
#[command(name = "lowzero", version, about = "Low-lying zero experiments for Hilbert modular forms")]
#[command(after_help = "Any subcommand also accepts --config FILE with key=value lines; flags on the command line win.\nLOWZERO_THREADS caps the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnsupportedField(_) => EXIT_UNSUPPORTED,
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_VALIDATION,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LOWZERO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("LOWZERO_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(argv: Vec<String>) -> u8 {
    let argv = match config::merge_config_file(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_VALIDATION;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_VALIDATION;
    }
    let report = match cli.command.execute() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = output::render(&report);
    let written = match &cli.command.output().out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    0
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use commands::Report;

    fn report(args: &[&str]) -> Report {
        let argv = std::iter::once("lowzero").chain(args.iter().copied()).map(String::from);
        Cli::try_parse_from(argv).unwrap().command.execute().unwrap()
    }

    #[test]
    fn json_reports_round_trip() {
        let cases: &[&[&str]] = &[
            &["bounds", "--u", "1.5"],
            &["bounds", "--u", "0.7", "--k", "4", "--level", "11"],
            &["kloosterman", "--field", "5", "--alpha", "1,1", "--beta", "2", "--c", "3,1"],
            &["bessel", "--nu", "11", "--x", "7.25", "--method", "miller"],
            &["petersson", "--field", "5", "--k", "2,2", "--B", "20"],
            &["size", "--field", "2", "--k", "4,6", "--level", "7"],
            &["density-rmt", "--kind", "SOodd", "--N", "6", "--u", "0.5", "--seed", "3", "--samples", "200", "--chains", "2"],
            &["density-family", "--kind", "Sp", "--M", "30", "--u", "0.9", "--field", "5", "--Q", "200", "--seed", "4"],
        ];
        for args in cases {
            let r = report(args);
            let text = output::render(&r);
            let back: Report = serde_json::from_str(&text).unwrap();
            assert_eq!(back.config, r.config, "{args:?}");
            assert_eq!(back.result, r.result, "{args:?}");
            assert_eq!(output::render(&back), text);
        }
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::UnknownName { kind: "ensemble", name: "GUE".into() }), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::UnsupportedField("x".into())), EXIT_UNSUPPORTED);
    }
}
