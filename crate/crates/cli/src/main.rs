// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match chronos_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is taken by data-inconsistent verdicts
            return ExitCode::from(if e.use_stderr() { chronos_cli::EXIT_ERROR as u8 } else { 0 });
        }
    };
    let out = chronos_cli::dispatch(&cli);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
