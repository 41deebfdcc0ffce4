fn main() { std::process::exit(persistlab::cli::run()); }
