#![no_main]

use dupdiv::{EvolvingGraph, InitialGraphSpec, ParamSchedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(schedule) = text.parse::<ParamSchedule>() else {
        return;
    };
    if schedule.validate().is_err() {
        return;
    }
    let again: ParamSchedule = schedule.to_string().parse().expect("display output parses");
    assert_eq!(again.to_string(), schedule.to_string());
    let g: EvolvingGraph = InitialGraphSpec::EdgePlusIsolated.build().expect("preset builds");
    for k in 1..8 {
        if let Ok(p) = schedule.params_at(k, &g) {
            for v in [p.p, p.q, p.r] {
                assert!((0.0..=1.0).contains(&v), "{schedule} gave {p} at k = {k}");
            }
        }
    }
});
