use clap::Parser;

fn main() {
    let cli = effectop::cli::Cli::parse();
    std::process::exit(effectop::cli::run(cli));
}
