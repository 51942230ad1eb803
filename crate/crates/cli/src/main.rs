fn main() {
    std::process::exit(qecmetro_cli::dispatch(std::env::args_os()));
}
