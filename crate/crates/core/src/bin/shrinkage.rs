fn main() {
    std::process::exit(shrinkage::harness::cli_main(std::env::args_os()));
}
