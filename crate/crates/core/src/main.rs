use std::panic;
use std::process::ExitCode;

use clap::Parser;
use sprev::cli::{self, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let args = Cli::parse();
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(|| cli::run(&args)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown failure".into());
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
