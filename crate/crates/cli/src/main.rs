use clap::Parser;
use fixlocus_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .write_style(if std::env::var_os("FIXLOCUS_NO_COLOR").is_some() {
            env_logger::WriteStyle::Never
        } else {
            env_logger::WriteStyle::Auto
        })
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("fixlocus: {e}");
        std::process::exit(e.exit_code());
    }
}
