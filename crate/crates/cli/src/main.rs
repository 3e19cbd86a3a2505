use clap::Parser;
use tensor_hw_cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
