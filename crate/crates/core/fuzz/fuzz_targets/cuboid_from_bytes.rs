#![no_main]

use cuboid_core::{lattice, spectrum, Cuboid};
use libfuzzer_sys::fuzz_target;

fn f64_at(data: &[u8], i: usize) -> Option<f64> {
    let bytes = data.get(8 * i..8 * i + 8)?;
    Some(f64::from_le_bytes(bytes.try_into().ok()?))
}

fuzz_target!(|data: &[u8]| {
    let (Some(a1), Some(a2)) = (f64_at(data, 0), f64_at(data, 1)) else {
        return;
    };
    let Ok(c) = Cuboid::new(a1, a2) else {
        return;
    };
    let s = c.sides();
    assert!(s[0] > 0.0 && s[0] <= s[1] && s[1] <= s[2] && s[2].is_finite());
    let log_volume: f64 = s.iter().map(|a| a.ln()).sum();
    assert!(log_volume.abs() <= 1e-12, "sides {s:?}");

    // keep the counting work bounded
    if s[0] < 0.05 {
        return;
    }
    let lambda = f64_at(data, 2).map_or(0.0, |x| x.abs() % 2e3);
    let bundle = lattice::count_bundle(&c, lambda).expect("finite nonnegative threshold");
    assert!(bundle.all_identities_hold(), "{bundle:?}");
    assert_eq!(spectrum::count_upto(&c, lambda).unwrap(), bundle.n);
    if bundle.n > 0 {
        let top = spectrum::kth_eigenvalue_value(&c, bundle.n).unwrap();
        assert!(top <= lambda * (1.0 + 1e-9));
    }
});
