use clap::Parser;

use frog_cli::commands::{run, Cli};

fn main() {
    // FROG_THREADS caps the worker count; results are identical either way.
    if let Some(threads) = std::env::var("FROG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
