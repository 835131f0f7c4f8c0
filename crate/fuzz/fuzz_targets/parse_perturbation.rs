#![no_main]

use ckn_core::perturbation::{parse_arg, PerturbationArg};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(arg) = parse_arg(s) else {
        return;
    };
    match arg {
        PerturbationArg::Inline(spec) => {
            // Metadata and evaluation must be total on accepted specs.
            assert!(spec.k0().is_finite());
            assert!(spec.kinf().is_finite());
            for t in [-700.0, -40.0, -1.0, 0.0, 1.0, 40.0, 700.0] {
                let v = spec.eval_log(t);
                assert!(!v.is_nan(), "NaN at t={t} for {s:?}");
            }
            // Accepted inline specs round-trip through their display form.
            let shown = spec.kind().to_string();
            match parse_arg(&shown) {
                Ok(PerturbationArg::Inline(spec2)) => assert_eq!(spec, spec2),
                other => panic!("display form {shown:?} did not re-parse: {other:?}"),
            }
        }
        PerturbationArg::TabulatedPath(path) => assert!(!path.is_empty()),
    }
});
