fn main() {
    std::process::exit(embedded_eigen::cli::main_with(std::env::args_os()));
}
