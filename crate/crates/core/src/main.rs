use clap::Parser;

use franson::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("franson: {e}");
        std::process::exit(e.exit_code());
    }
}
