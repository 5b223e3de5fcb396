use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let report = wfcheck::run(std::env::args_os().skip(1));
    let result = if report.exit_code == wfcheck::EXIT_INPUT {
        std::io::stderr().write_all(report.body.as_bytes())
    } else {
        std::io::stdout().write_all(report.body.as_bytes())
    };
    if result.is_err() {
        return ExitCode::from(wfcheck::EXIT_INPUT as u8);
    }
    ExitCode::from(report.exit_code as u8)
}
