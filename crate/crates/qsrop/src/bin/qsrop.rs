fn main() { std::process::exit(qsrop::cli::run(std::env::args())); }
