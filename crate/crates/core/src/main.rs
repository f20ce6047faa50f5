use std::io::Write;

use tabres::harness::{cli, with_large_stack};

fn main() {
    let code = with_large_stack(|| {
        let stdout = std::io::stdout();
        let stderr = std::io::stderr();
        let mut out = stdout.lock();
        let mut err = stderr.lock();
        let code = cli::run(std::env::args_os(), &mut out, &mut err);
        let _ = out.flush();
        code
    });
    std::process::exit(code);
}
