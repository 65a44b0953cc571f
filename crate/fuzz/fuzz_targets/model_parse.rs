#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    // must never panic or hang: every malformed input is a typed error
    let _ = dgo_cli::model::parse_model(src);
});
