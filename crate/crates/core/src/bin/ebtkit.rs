use std::io;
use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let code = panic::catch_unwind(|| {
        let mut out = io::stdout().lock();
        let mut err = io::stderr().lock();
        ebtkit::cli::run(std::env::args_os(), &mut out, &mut err)
    })
    .unwrap_or(4);
    ExitCode::from(code as u8)
}
