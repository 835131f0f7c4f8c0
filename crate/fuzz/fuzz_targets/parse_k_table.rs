#![no_main]

use ckn_core::perturbation::KTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = KTable::parse(s) else {
        return;
    };
    // The monotone interpolant never leaves the tabulated value range.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..table.len() {
        let (_, k) = table.node(i);
        lo = lo.min(k);
        hi = hi.max(k);
    }
    let (rmin, rmax) = table.range();
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    for i in 0..=64 {
        let r = rmin + (rmax - rmin) * i as f64 / 64.0;
        let v = table.eval(r);
        assert!(v.is_finite(), "non-finite interpolant at r={r}");
        assert!(
            v >= lo - slack && v <= hi + slack,
            "interpolant overshoots at r={r}: {v} outside [{lo}, {hi}]"
        );
    }
    // Constant continuation outside the range, without panics.
    assert!(table.eval(0.0).is_finite());
    assert!(table.eval(f64::MAX).is_finite());
});
