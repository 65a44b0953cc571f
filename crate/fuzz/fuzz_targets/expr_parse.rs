#![no_main]

use dgo_core::space::ModelSignature;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    // the four expression entry points share a grammar but bind
    // different variable sets; each must reject cleanly
    let sig = ModelSignature::euclidean(2, 4);
    let _ = dgo_cli::expr::parse_scalar(src);
    let _ = dgo_cli::expr::parse_polynomial(src, 3);
    let _ = dgo_cli::expr::parse_graded(src, &sig);
    let _ = dgo_cli::expr::parse_operator(src, &sig);
});
