fn main() {
    std::process::exit(disaster_corr_cli::run(std::env::args_os()));
}
