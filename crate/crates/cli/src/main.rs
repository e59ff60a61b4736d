fn main() {
    std::process::exit(treeskel::run(std::env::args_os()));
}
