//! The fixture documents and modules.

use std::path::PathBuf;

use d2d_core::ddf::SearchPath;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn modules() -> SearchPath {
    SearchPath::new([fixtures().join("modules")])
}

/// `(file name, text)` for every document, sorted by name.
pub fn documents() -> Vec<(String, String)> {
    let mut docs: Vec<(String, String)> = std::fs::read_dir(fixtures().join("docs"))
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "d2d"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    docs.sort();
    docs
}
