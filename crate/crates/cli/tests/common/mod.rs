#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub fn twdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> String {
    let out = twdp(args);
    assert!(
        out.status.success(),
        "twdp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn schema_errors(doc: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(twdp_cli::documents::SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    validator.iter_errors(doc).map(|e| e.to_string()).collect()
}

pub fn assert_valid(doc: &Value) {
    let errors = schema_errors(doc);
    assert!(errors.is_empty(), "{errors:?}");
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
