use clap::Parser;

fn main() {
    let cli = explicit_weights::cli::Cli::parse();
    std::process::exit(explicit_weights::cli::run(cli));
}
