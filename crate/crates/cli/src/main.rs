fn main() {
    std::process::exit(wishart_lab::run(std::env::args_os()));
}
