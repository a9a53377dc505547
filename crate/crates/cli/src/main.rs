fn main() {
    std::process::exit(bpbv_cli::main_with_args(std::env::args_os()));
}
