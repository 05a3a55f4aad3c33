fn main() {
    std::process::exit(mission_planner::cli::run(std::env::args_os()));
}
