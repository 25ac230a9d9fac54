#![no_main]

use cuboid_core::report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = report::parse_count_csv(data) {
        let mut out = Vec::new();
        report::write_count_csv(&mut out, &doc).expect("parsed document serialises");
        let again = report::parse_count_csv(&out).expect("own output parses");
        assert_eq!(format!("{again:?}"), format!("{doc:?}"));
    }
    let _ = report::parse_count_json(data);
});
