use clap::Parser;

fn main() {
    let cli = anisoflow::cli::Cli::parse();
    std::process::exit(anisoflow::cli::run(&cli));
}
