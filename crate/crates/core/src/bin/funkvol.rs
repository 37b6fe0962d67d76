fn main() {
    if let Ok(t) = std::env::var("FUNKVOL_THREADS") {
        if let Ok(n) = t.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    std::process::exit(funkvol::cli::main_with_args(std::env::args_os()));
}
