fn main() {
    std::process::exit(scenelang::pipeline::run(std::env::args_os()));
}
