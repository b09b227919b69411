//! Drive the command-line experiments from code: the same JSON configs, the
//! same artifacts and exit codes as the `seglab` binary, kept in memory.
//!
//! Run with `cargo run --release --example experiment_runner`; pass
//! `--verify` to run the full acceptance suite as well (a few minutes).

use std::path::Path;

use seglab::cli::{execute, Command};

fn main() -> seglab::Result<()> {
    let here = Path::new(".");
    let runs = [
        (Command::Partition, r#"{"arcs_equal": {"k": 4}}"#),
        (Command::Partition, r#"{"partition": {"lunes": [2.0943951, 2.0943951, 2.0943951]}}"#),
        (Command::Decay, r#"{"ks": [1, 4, 9, 16], "r": 5, "n": 3}"#),
        (Command::Profile1d, r#"{"a": 2, "x_max": 10}"#),
    ];
    for (cmd, cfg) in runs {
        let out = execute(cmd, Some(cfg), here, 0)?;
        println!("{} → exit {}, {} bytes", out.json_name(cmd), out.exit_code, out.json.len());
    }
    let bad = execute(Command::Decay, Some(r#"{"ks": [1], "r": 1, "n": 2, "typo": 0}"#), here, 0);
    println!("unknown field → {}", bad.map(|_| "accepted".to_string()).unwrap_or_else(|e| e.to_string()));

    if std::env::args().any(|a| a == "--verify") {
        let out = execute(Command::Verify, None, here, 0)?;
        println!("{}", String::from_utf8_lossy(&out.json));
    }
    Ok(())
}
