//! Lattice serialization.
//!
//! The on-disk format is JSON with exact rational entries as "p/q" strings:
//!
//! ```text
//! {
//!   "name": "E8",            // optional display name
//!   "dim": 8,
//!   "basis": [["1", "-1", ...], ...],
//!   "gram": [["2", "0", ...], ...]   // present only for gram-only lattices
//! }
//! ```
//!
//! For gram-only lattices the basis is coefficient-space (the identity after
//! canonicalization is not guaranteed, adjoined classes shift it) and the
//! `gram` field carries the ambient form; the pair reconstructs the lattice
//! exactly. Orthonormal-frame lattices omit `gram`.

use serde::{Deserialize, Serialize};

use crate::exact::{rat_display, rat_parse, QMat, Rat};
use crate::lattice::{Frame, Lattice};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct LatticeFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dim: usize,
    basis: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gram: Option<Vec<Vec<String>>>,
}

fn matrix_to_strings(m: &QMat) -> Vec<Vec<String>> {
    m.rows_iter().map(|r| r.iter().map(rat_display).collect()).collect()
}

fn strings_to_rows(rows: &[Vec<String>]) -> Result<Vec<Vec<Rat>>> {
    rows.iter()
        .map(|r| r.iter().map(|s| rat_parse(s)).collect())
        .collect()
}

/// Serialize to the JSON file format.
pub fn to_json(lat: &Lattice, name: Option<&str>) -> String {
    let file = LatticeFile {
        name: name.map(str::to_string),
        dim: lat.dim(),
        basis: matrix_to_strings(lat.basis()),
        gram: match lat.frame() {
            Frame::Orthonormal => None,
            Frame::Form(f) => Some(matrix_to_strings(f)),
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("lattice file serializes");
    s.push('\n');
    s
}

/// Parse the JSON file format.
pub fn from_json(text: &str) -> Result<Lattice> {
    let file: LatticeFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("lattice file: {e}")))?;
    let basis = strings_to_rows(&file.basis)?;
    if basis.len() != file.dim || basis.iter().any(|r| r.len() != file.dim) {
        return Err(Error::Parse(format!(
            "basis shape does not match dim {}",
            file.dim
        )));
    }
    match file.gram {
        None => Lattice::from_basis(basis),
        Some(g) => {
            let form = QMat::from_rows(strings_to_rows(&g)?)?;
            Lattice::from_basis_in_frame(form, basis)
        }
    }
}

/// Read a lattice from a JSON file on disk.
pub fn read_file(path: &std::path::Path) -> Result<Lattice> {
    from_json(&std::fs::read_to_string(path)?)
}

/// Write a lattice to a JSON file on disk.
pub fn write_file(path: &std::path::Path, lat: &Lattice, name: Option<&str>) -> Result<()> {
    std::fs::write(path, to_json(lat, name))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    #[test]
    fn round_trip_orthonormal_and_gram_only() {
        for name in ["E8", "Lambda2", "O7", "BW16"] {
            let lat = catalog::build(name).unwrap();
            let text = to_json(&lat, Some(name));
            let back = from_json(&text).unwrap();
            assert_eq!(back, lat, "round trip {name}");
            assert_eq!(back.gram(), lat.gram(), "gram round trip {name}");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(from_json("{").is_err());
        assert!(from_json(r#"{"dim": 2, "basis": [["1","0"]]}"#).is_err());
        assert!(from_json(r#"{"dim": 1, "basis": [["x"]]}"#).is_err());
    }
}
