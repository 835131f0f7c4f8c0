#![no_main]

use ckn_core::grid::{read_profile_csv, write_profile_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(profile) = read_profile_csv(s) else {
        return;
    };
    // Anything accepted must survive a canonical write/read cycle exactly.
    let canonical = write_profile_csv(&profile, &[]);
    let again = read_profile_csv(&canonical).expect("canonical form re-parses");
    assert_eq!(again.grid(), profile.grid());
    for (a, b) in profile.values().iter().zip(again.values()) {
        assert_eq!(a.to_bits(), b.to_bits(), "17-digit round trip must be exact");
    }
});
