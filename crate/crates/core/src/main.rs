use clap::Parser;
use pathport::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("pathport: {err}");
        std::process::exit(err.exit_code());
    }
}
