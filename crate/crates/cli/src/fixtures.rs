//! Bundled example problems. `GCGW_FIXTURES` points at a directory of
//! `*.json` files to use instead.

use std::path::Path;

const EMBEDDED: &[(&str, &str)] = &[
    ("complex_plane", include_str!("../fixtures/complex_plane.json")),
    ("corrupted_plane", include_str!("../fixtures/corrupted_plane.json")),
    ("iwasawa", include_str!("../fixtures/iwasawa.json")),
    ("iwasawa_closed", include_str!("../fixtures/iwasawa_closed.json")),
    ("iwasawa_complex", include_str!("../fixtures/iwasawa_complex.json")),
    ("non_lie", include_str!("../fixtures/non_lie.json")),
    ("p1_extension", include_str!("../fixtures/p1_extension.json")),
    ("p1_flat", include_str!("../fixtures/p1_flat.json")),
    ("p1_o(1)", include_str!("../fixtures/p1_o(1).json")),
    ("p1_o(1)+o(2)", include_str!("../fixtures/p1_o(1)+o(2).json")),
    ("p1_unipotent", include_str!("../fixtures/p1_unipotent.json")),
    ("p2_o(1)", include_str!("../fixtures/p2_o(1).json")),
    ("symplectic_plane", include_str!("../fixtures/symplectic_plane.json")),
    ("torus2", include_str!("../fixtures/torus2.json")),
    ("torus4", include_str!("../fixtures/torus4.json")),
    ("torus6", include_str!("../fixtures/torus6.json")),
];

pub const ENV: &str = "GCGW_FIXTURES";

/// All fixtures as (name, source), sorted by name.
pub fn all() -> std::io::Result<Vec<(String, String)>> {
    match std::env::var_os(ENV) {
        Some(dir) => from_dir(Path::new(&dir)),
        None => Ok(EMBEDDED.iter().map(|(n, s)| (n.to_string(), s.to_string())).collect()),
    }
}

fn from_dir(dir: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), std::fs::read_to_string(&path)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn get(name: &str) -> std::io::Result<Option<String>> {
    Ok(all()?.into_iter().find(|(n, _)| n == name).map(|(_, s)| s))
}

/// Reads a problem: an existing path, else a fixture name.
pub fn source(arg: &str) -> Result<(String, String), String> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", arg, e))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string();
        return Ok((name, text));
    }
    match get(arg) {
        Ok(Some(s)) => Ok((arg.to_string(), s)),
        Ok(None) => Err(format!("'{}' is neither a file nor a fixture name (see `gcgw fixtures`)", arg)),
        Err(e) => Err(format!("reading fixtures: {}", e)),
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn embedded_names_sorted() {
        let names: Vec<&str> = super::EMBEDDED.iter().map(|(n, _)| *n).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
