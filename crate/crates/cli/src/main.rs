use clap::Parser;

fn main() {
    let cli = hetsim_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = hetsim_cli::run(&cli, &mut out);
    std::process::exit(status);
}
