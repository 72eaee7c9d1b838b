fn main() {
    std::process::exit(cartan_torsion::cli::main_with_args(std::env::args_os()));
}
