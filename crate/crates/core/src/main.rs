use clap::Parser;

use polsource::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli) as i32);
}
