fn main() {
    std::process::exit(binned_income_cli::run(std::env::args_os()));
}
