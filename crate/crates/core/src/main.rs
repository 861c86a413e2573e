use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    if let Ok(v) = std::env::var("CAVSQ_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    log::warn!("CAVSQ_THREADS ignored: {e}");
                }
            }
            Err(_) => log::warn!("CAVSQ_THREADS must be a non-negative integer, got '{v}'"),
        }
    }

    let code = cavsq::cli::main_with_args(std::env::args_os());
    ExitCode::from(code.clamp(0, 255) as u8)
}
