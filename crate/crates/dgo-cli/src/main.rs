use clap::Parser;

fn main() {
    let cli = dgo_cli::Cli::parse();
    std::process::exit(dgo_cli::run(&cli));
}
