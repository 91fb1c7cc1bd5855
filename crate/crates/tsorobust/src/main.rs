use clap::Parser;

fn main() {
    let cli = tsorobust::cli::Cli::parse();
    let (code, output) = tsorobust::cli::run(cli);
    print!("{output}");
    std::process::exit(code);
}
