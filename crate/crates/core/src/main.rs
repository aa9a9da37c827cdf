use clap::Parser;

fn main() {
    let cli = qcsync::cli::Cli::parse();
    std::process::exit(qcsync::cli::run(cli));
}
