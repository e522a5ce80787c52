#![no_main]

use libfuzzer_sys::fuzz_target;
use stabmis::runspec::RunSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = RunSpec::parse(text) {
        let again = RunSpec::parse(&spec.to_text()).expect("canonical spec text parses");
        assert_eq!(again.to_text(), spec.to_text());
        assert_eq!(again.hash(), spec.hash());
    }
});
