use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use roundrobin_cli::{execute, RunSpec};

fn main() -> ExitCode {
    let spec = match RunSpec::parse_from(std::env::args_os()) {
        Ok(spec) => spec,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(&spec) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if spec.out.is_none() {
                let mut stdout = std::io::stdout().lock();
                if let Err(e) = stdout.write_all(report.body.as_bytes()).and_then(|_| stdout.flush()) {
                    eprintln!("error: i/o: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
