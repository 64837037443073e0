use clap::Parser;

fn main() {
    std::process::exit(flowlab::cli::run(flowlab::cli::Cli::parse()));
}
