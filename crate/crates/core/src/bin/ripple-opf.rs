fn main() {
    std::process::exit(ripple_opf::cli::main_with_args(std::env::args_os()));
}
