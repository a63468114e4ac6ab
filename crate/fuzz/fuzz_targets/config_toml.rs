#![no_main]

use dupdiv::cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_toml_str(text) else {
        return;
    };
    let printed = cfg.to_toml_string();
    let again = RunConfig::from_toml_str(&printed).expect("printed config parses");
    assert_eq!(again.to_toml_string(), printed);
    // Resolution must fail cleanly rather than panic.
    let _ = cfg.simulate_config();
    let _ = cfg.ensemble_config();
    let _ = cfg.oracle_config();
});
