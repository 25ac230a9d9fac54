#![no_main]

use cuboid_core::report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = report::parse_spectrum_csv(data);
    if let Ok(doc) = report::parse_spectrum_json(data) {
        let mut out = Vec::new();
        report::write_json(&mut out, &doc).expect("parsed document serialises");
        let again = report::parse_spectrum_json(&out).expect("own output parses");
        assert_eq!(format!("{again:?}"), format!("{doc:?}"));
    }
});
