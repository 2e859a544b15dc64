use clap::Parser;

use cupverify::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
