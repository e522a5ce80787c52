#![no_main]

use libfuzzer_sys::fuzz_target;
use stabmis::adversary::ByzantineStrategy;
use stabmis::daemon::DaemonKind;
use stabmis::GraphKind;

// The `name(args)` values of run spec keys.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(kind) = text.parse::<GraphKind>() {
        assert_eq!(kind.to_string().parse::<GraphKind>().ok(), Some(kind));
    }
    if let Ok(st) = text.parse::<ByzantineStrategy>() {
        assert_eq!(st.to_string().parse::<ByzantineStrategy>().ok(), Some(st));
    }
    if let Ok(d) = text.parse::<DaemonKind>() {
        assert_eq!(d.to_string().parse::<DaemonKind>().ok(), Some(d));
    }
});
