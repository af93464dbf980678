fn main() -> std::process::ExitCode {
    cwrdm::main_with_args(std::env::args_os())
}
