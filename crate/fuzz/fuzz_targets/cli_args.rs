#![no_main]

use clap::Parser;
use dkw_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

// NUL-separated argument list; only parsing runs, never a command.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("dkw").chain(text.split('\0'));
    let _ = RunConfig::try_parse_from(args);
});
