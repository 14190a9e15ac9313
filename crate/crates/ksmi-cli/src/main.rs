fn main() {
    std::process::exit(ksmi_cli::run());
}
