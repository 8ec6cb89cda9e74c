fn main() {
    std::process::exit(cpd_topo::cli::cli_main(std::env::args_os()));
}
