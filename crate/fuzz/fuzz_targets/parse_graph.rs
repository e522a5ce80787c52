#![no_main]

use libfuzzer_sys::fuzz_target;
use stabmis::Graph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = Graph::parse(text) {
        // the canonical text must parse back to the same graph
        let again = Graph::parse(&g.to_text()).expect("canonical graph text parses");
        assert_eq!(again, g);
    }
});
