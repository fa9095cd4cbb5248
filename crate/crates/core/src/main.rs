fn main() {
    std::process::exit(keyframe_select::cli::run_cli(std::env::args_os()));
}
