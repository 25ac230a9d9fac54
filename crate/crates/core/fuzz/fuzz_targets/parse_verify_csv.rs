#![no_main]

use cuboid_core::report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = report::parse_verify_csv(data) else {
        return;
    };
    let mut out = Vec::new();
    report::write_verify_csv(&mut out, &rows).expect("parsed rows serialise");
    let again = report::parse_verify_csv(&out).expect("own output parses");
    assert_eq!(format!("{again:?}"), format!("{rows:?}"));
});
