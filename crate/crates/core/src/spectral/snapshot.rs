//! Field snapshots: a raw little-endian `f64` payload (x fastest, components
//! concatenated) and a JSON sidecar describing it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::basis::{SpectralBasis, MODE_ORDERING_VERSION};
use super::field::{Field, Rank};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub shape: [usize; 3],
    pub components: usize,
    pub box_length: f64,
    pub representation: String,
    pub mode_ordering_version: u32,
    pub time: f64,
    pub name: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` and `<stem>.json`; the field is stored in grid form.
pub fn write_snapshot<T: Real>(
    stem: &Path,
    basis: &SpectralBasis<T>,
    field: &Field<T>,
    name: &str,
    time: f64,
) -> Result<SnapshotHeader> {
    let g = field.to_grid(basis)?;
    let m = basis.grid();
    let header = SnapshotHeader {
        shape: [m; 3],
        components: g.components(),
        box_length: basis.length().to_f64_lossy(),
        representation: "grid".into(),
        mode_ordering_version: MODE_ORDERING_VERSION,
        time,
        name: name.into(),
    };
    let mut bytes = Vec::with_capacity(8 * m * m * m * g.components());
    for c in 0..g.components() {
        for &x in g.values(c).unwrap() {
            bytes.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
        }
    }
    let (bin, json) = paths(stem);
    fs::write(bin, bytes)?;
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(json, text)?;
    Ok(header)
}

pub fn read_snapshot<T: Real>(stem: &Path) -> Result<(SnapshotHeader, Field<T>)> {
    let (bin, json) = paths(stem);
    let header: SnapshotHeader =
        serde_json::from_str(&fs::read_to_string(json)?).map_err(|e| Error::Serialization(e.to_string()))?;
    let bytes = fs::read(bin)?;
    let n = header.shape.iter().product::<usize>();
    if bytes.len() != 8 * n * header.components {
        return Err(Error::Serialization(format!(
            "payload has {} bytes, header implies {}",
            bytes.len(),
            8 * n * header.components
        )));
    }
    let vals: Vec<T> = bytes
        .chunks_exact(8)
        .map(|b| T::lit(f64::from_le_bytes(b.try_into().unwrap())))
        .collect();
    let m = header.shape[0];
    let field = match header.components {
        1 => Field::scalar(m, vals)?,
        3 => {
            let mut it = vals.chunks_exact(n).map(|c| c.to_vec());
            Field::vector(m, [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])?
        }
        _ => return Err(Error::Serialization("unsupported component count".into())),
    };
    debug_assert!(matches!(field.rank(), Rank::Scalar | Rank::Vector));
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::basis::build_basis;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = build_basis(1.0f64, 8, 4, 3).unwrap();
        let f = Field::vector_from_fn(&b, |x| [x[0], x[1] * 2.0, -x[2]]);
        let stem = dir.path().join("u");
        write_snapshot(&stem, &b, &f, "u", 0.5).unwrap();
        let (h, g) = read_snapshot::<f64>(&stem).unwrap();
        assert_eq!(h.shape, [12; 3]);
        assert_eq!(h.components, 3);
        assert_eq!(f, g);
        // x fastest: second value is node (1,0,0)
        let raw = std::fs::read(stem.with_extension("bin")).unwrap();
        let second = f64::from_le_bytes(raw[8..16].try_into().unwrap());
        assert!((second - 1.0 / 12.0).abs() < 1e-15);
    }
}
