fn main() { std::process::exit(rotkit::cli::main()) }
