use clap::Parser;

fn main() {
    let cli = lamtest::cli::Cli::parse();
    std::process::exit(lamtest::cli::run(cli) as i32);
}
