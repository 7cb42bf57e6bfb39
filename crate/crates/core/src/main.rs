fn main() {
    env_logger::init();
    std::process::exit(discord_rsp::cli::run(std::env::args_os()));
}
