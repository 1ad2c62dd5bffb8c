use qudit_teleport::cli;

fn main() {
    let code = match cli::parse_args(std::env::args_os()) {
        Ok(config) => cli::run(&config),
        Err(e) => {
            if e.exit_code == 0 {
                print!("{}", e.message);
            } else {
                eprint!("{}", e.message);
                if !e.message.ends_with('\n') {
                    eprintln!();
                }
            }
            e.exit_code
        }
    };
    std::process::exit(code);
}
