use clap::Parser;

fn main() {
    let cli = hypercyclic_cli::Cli::parse();
    let code = hypercyclic_cli::run(&cli, &mut std::io::stderr());
    std::process::exit(code);
}
