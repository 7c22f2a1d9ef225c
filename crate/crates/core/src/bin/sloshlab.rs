use clap::Parser;
use sloshlab::cli::{init_threads, run, Cli, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let outcome = run(&RunConfig::from_command(cli.command));
    if let Some(dir) = &outcome.dir {
        println!("{}", dir.display());
    }
    std::process::exit(outcome.status);
}
