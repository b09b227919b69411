use clap::Parser;

fn main() {
    let cli = seglab::cli::Cli::parse();
    std::process::exit(seglab::cli::run(&cli));
}
