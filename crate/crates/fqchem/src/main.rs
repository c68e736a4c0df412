use clap::Parser;

fn main() {
    let cli = fqchem::cli::Cli::parse();
    std::process::exit(fqchem::cli::run(cli));
}
