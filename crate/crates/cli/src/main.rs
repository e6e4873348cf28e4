fn main() {
    env_logger::init();
    std::process::exit(hcm_lab::run(std::env::args_os()));
}
