use clap::Parser;

fn main() {
    let cli = csma_cli::Cli::parse();
    if let Err(err) = csma_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
