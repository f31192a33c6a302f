fn main() {
    std::process::exit(fractal_percolation::cli::run(std::env::args_os()));
}
