use std::process::ExitCode;

fn main() -> ExitCode {
    match feeder_disagg::harness::cli::run_from(std::env::args()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
