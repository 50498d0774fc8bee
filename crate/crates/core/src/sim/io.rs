//! `series.csv` and raw snapshot files with JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AbiError, Result};
use crate::grid::{Grid, StateField, COMPONENT_LAYOUT};
use crate::model::ConstantState;
use crate::NCOMP;

use super::diagnostics::DiagnosticsSeries;

/// Sidecar of a snapshot: little-endian f64, component-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub t: f64,
    pub state: ConstantState,
    pub layout: String,
}

pub fn write_series_csv(path: &Path, series: &DiagnosticsSeries) -> Result<()> {
    fs::write(path, series.to_csv())?;
    Ok(())
}

/// Write `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    t: f64,
    field: &StateField,
    state: &ConstantState,
) -> Result<(PathBuf, PathBuf)> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = field.data.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(&bin, bytes)?;
    let meta =
        SnapshotMeta { n: field.grid.n, l: field.grid.length, t, state: *state, layout: COMPONENT_LAYOUT.into() };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| AbiError::Io(e.to_string()))?;
    fs::write(&json, text)?;
    Ok((bin, json))
}

/// Read a snapshot back from its `.bin` path (sidecar alongside).
pub fn read_snapshot(bin: &Path) -> Result<(SnapshotMeta, StateField)> {
    let text = fs::read_to_string(bin.with_extension("json"))?;
    let meta: SnapshotMeta = serde_json::from_str(&text).map_err(|e| AbiError::Io(e.to_string()))?;
    if meta.layout != COMPONENT_LAYOUT {
        return Err(AbiError::Io(format!("unknown layout {:?}", meta.layout)));
    }
    let grid = Grid::new(meta.n, meta.l)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * NCOMP * grid.len() {
        return Err(AbiError::Io(format!("snapshot has {} bytes, expected {}", bytes.len(), 8 * NCOMP * grid.len())));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((meta, StateField { grid, data }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{admissible_perturbation, SpectralProfile};

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let st = ConstantState::isotropic(1.0);
        let g = Grid::new(8, 3.0).unwrap();
        let u = admissible_perturbation(1, 0.1, &SpectralProfile { k0: 1.0, ..Default::default() }, &st, &g).unwrap();
        let (bin, json) = write_snapshot(dir.path(), "snap_0", 0.5, &u, &st).unwrap();
        let (meta, back) = read_snapshot(&bin).unwrap();
        assert_eq!(back, u);
        assert_eq!((meta.n, meta.t, meta.layout.as_str()), (8, 0.5, "tau,v,b,d"));
        let raw: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        for key in ["N", "L", "t", "state", "layout"] {
            assert!(raw.get(key).is_some(), "{key}");
        }
    }
}
