use std::panic;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use hyperband_cli::{exit_code, run, thread_count, Cli, RunConfig, THREADS_ENV};
use hyperband_core::Error;

fn fail(err: &Error) -> ExitCode {
    eprintln!("hyperband: error: {err}");
    ExitCode::from(exit_code(err))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("hyperband: {} (see --help)", line.trim());
            return ExitCode::from(1);
        }
    };

    let threads = match thread_count(std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::Internal(format!("thread pool: {e}")));
        }
    }

    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };

    panic::set_hook(Box::new(|info| {
        let msg = info
            .payload()
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| info.payload().downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".to_string());
        let at = info.location().map(|l| format!(" at {}:{}", l.file(), l.line())).unwrap_or_default();
        eprintln!("hyperband: internal error: {msg}{at}");
    }));
    match panic::catch_unwind(|| run(&cfg)) {
        Ok(Ok(paths)) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => fail(&e),
        Err(_) => ExitCode::from(2),
    }
}
