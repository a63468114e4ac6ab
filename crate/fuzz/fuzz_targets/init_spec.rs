#![no_main]

use dupdiv::InitialGraphSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = text.parse::<InitialGraphSpec>() else {
        return;
    };
    let again: InitialGraphSpec = spec.to_string().parse().expect("display output parses");
    assert_eq!(again, spec);
    // Complete graphs grow quadratically; keep builds small.
    if spec.vertex_count() <= 64 {
        let g = spec.build().expect("parsed specs build");
        assert_eq!(g.vertex_count(), spec.vertex_count());
        g.check_invariants().expect("fresh graphs are consistent");
    }
});
