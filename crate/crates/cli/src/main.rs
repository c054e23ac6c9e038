use clap::Parser;

fn main() {
    std::process::exit(discovars_cli::run(discovars_cli::Cli::parse()));
}
