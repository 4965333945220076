use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use longrange::cli::{run, Args, RunSpec};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, rec| {
            writeln!(buf, "level={} {}", rec.level().as_str().to_lowercase(), rec.args())
        })
        .init();
    let args = Args::parse();
    let result = RunSpec::resolve(&args).and_then(|spec| run(&spec));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("event=error message=\"{e}\"");
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
