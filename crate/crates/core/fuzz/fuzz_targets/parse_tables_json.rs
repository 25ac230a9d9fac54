#![no_main]

use cuboid_core::report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = report::parse_optimize_json(data);
    let _ = report::parse_verify_json(data);
});
