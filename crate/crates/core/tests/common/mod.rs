#![allow(dead_code)]

use std::path::PathBuf;

use critorbit::{AnyFamily, Family, GaussRat};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> Family<GaussRat> {
    match AnyFamily::load(fixtures_dir().join(name)).expect("fixture loads") {
        AnyFamily::Exact(f) => f,
        AnyFamily::Float(_) => panic!("{name} should be exact"),
    }
}

/// Every exact fixture, sorted by file name.
pub fn corpus() -> Vec<(String, Family<GaussRat>)> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .expect("fixtures directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
        .into_iter()
        .filter_map(|n| match AnyFamily::load(fixtures_dir().join(&n)).ok()? {
            AnyFamily::Exact(f) => Some((n, f)),
            AnyFamily::Float(_) => None,
        })
        .collect()
}
