#![no_main]

// Argument vectors are NUL-separated. Only parsing and validation run here;
// nothing is executed.

use cocktail_core::cli::{parse_invocation, CliError};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<&str> = text.split('\0').collect();
    // --config would read arbitrary paths (including devices).
    if args.iter().any(|a| a.contains("config")) {
        return;
    }
    match parse_invocation(std::iter::once("cocktail").chain(args)) {
        Ok(_) => {}
        Err(e @ (CliError::Info(_) | CliError::Usage(_))) => {
            let _ = e.to_string();
        }
        Err(CliError::Compute(e)) => panic!("parsing produced a computation error: {e}"),
    }
});
