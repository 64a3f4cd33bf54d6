use clap::Parser;

use epr_optomech::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = cli::run(&cli) {
        eprintln!("{}", err.to_line());
        std::process::exit(err.exit_code());
    }
}
