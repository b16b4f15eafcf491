fn main() {
    let stdout = std::io::stdout();
    let code = bqr_cli::cli::main_with(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
