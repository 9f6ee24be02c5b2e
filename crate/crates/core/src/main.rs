use std::io::Write;

fn main() {
    let out = clifford_bracket::cli::main_with_args(std::env::args_os());
    if !out.stdout.is_empty() {
        let mut so = std::io::stdout().lock();
        let _ = writeln!(so, "{}", out.stdout.trim_end_matches('\n'));
    }
    if !out.stderr.is_empty() {
        let _ = write!(std::io::stderr(), "{}", out.stderr);
    }
    std::process::exit(out.code);
}
