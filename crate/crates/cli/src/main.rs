use std::io;

fn main() {
    let seed = std::env::var(dfx_cli::SEED_ENV).ok();
    let code = dfx_cli::run(
        std::env::args_os(),
        seed.as_deref(),
        &mut io::stdout(),
        &mut io::stderr(),
    );
    std::process::exit(code);
}
