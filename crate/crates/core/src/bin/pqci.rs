use std::process::ExitCode;

fn main() -> ExitCode {
    pqci_core::harness::main_entry(std::env::args_os())
}
