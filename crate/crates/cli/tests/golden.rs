//! The corpus report is pinned in `corpus/golden.json`. Set `SLC_BLESS=1` to
//! rewrite it after an intended change.

use serde_json::Value;
use slc::corpus::{corpus_report, GOLDEN_SCHEMA};
use slc_core::Fuel;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/golden.json");

#[test]
fn corpus_report_matches_golden_file() {
    let report = corpus_report(Fuel(10_000));
    let fresh = serde_json::to_string_pretty(&report).unwrap() + "\n";
    if std::env::var_os("SLC_BLESS").is_some() {
        std::fs::write(GOLDEN, &fresh).unwrap();
        return;
    }
    let pinned = std::fs::read_to_string(GOLDEN).expect("golden file exists; run with SLC_BLESS=1 to create it");
    let pinned: Value = serde_json::from_str(&pinned).unwrap();
    let fresh: Value = serde_json::from_str(&fresh).unwrap();
    assert_eq!(pinned["schema"], GOLDEN_SCHEMA);
    assert_eq!(pinned["fuel"], fresh["fuel"]);
    let (want, got) = (pinned["results"].as_array().unwrap(), fresh["results"].as_array().unwrap());
    for (w, g) in want.iter().zip(got) {
        assert_eq!(w, g, "corpus program {} changed", w["name"]);
    }
    assert_eq!(want.len(), got.len());
}
