use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{CgReport, HomogenizedStiffness};
use crate::microstructure::{GeometryBounds, GeometryParams, VoxelFractions, PARAM_NAMES};
use crate::pca::FlattenedStiffness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One line of the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub params: GeometryParams,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub resolution: [usize; 3],
    pub cell_lengths: [f64; 3],
    pub homogenized: HomogenizedStiffness,
    pub flattened: FlattenedStiffness,
    /// Largest entry outside the orthotropic pattern, relative to the largest entry.
    pub off_pattern_residual: f64,
    pub positive_definite: bool,
    pub target_fractions: [f64; 3],
    pub achieved_fractions: VoxelFractions,
    /// Solver reports of the six load cases 11, 22, 33, 23, 13, 12.
    pub solver: [CgReport; 6],
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok && self.result.is_some()
    }
}

/// Sidecar describing how a design was drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignInfo {
    pub n_runs: usize,
    pub seed: u64,
    pub rng: String,
    pub parameter_names: Vec<String>,
    pub bounds: GeometryBounds,
}

pub fn write_design_csv(path: &Path, samples: &[GeometryParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["run_id"];
    header.extend(PARAM_NAMES);
    w.write_record(&header)?;
    for (id, p) in samples.iter().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(p.as_array().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_design_csv(path: &Path) -> Result<Vec<GeometryParams>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })?;
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let header = r.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("run_id").chain(PARAM_NAMES).collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(format_err(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let id: usize = rec[0]
            .parse()
            .map_err(|e| format_err(format!("row {row}: bad run id: {e}")))?;
        if id != row {
            return Err(format_err(format!("row {row} carries run id {id}")));
        }
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k + 1]
                .parse()
                .map_err(|e| format_err(format!("row {row}, {}: {e}", PARAM_NAMES[k])))?;
        }
        out.push(GeometryParams::from_array(v));
    }
    Ok(out)
}

/// Reads a JSON-lines run log. Later lines replace earlier ones with the same id.
pub fn read_records(path: &Path) -> Result<BTreeMap<usize, RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RunRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", n + 1),
        })?;
        out.insert(rec.run_id, rec);
    }
    Ok(out)
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a RunRecord>) -> Result<()> {
    let mut buf = Vec::new();
    for rec in records {
        serde_json::to_writer(&mut buf, rec)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_csv_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("design.csv");
        let b = GeometryBounds::default();
        let samples = vec![
            b.midpoint(),
            GeometryParams::from_array([0.6123456789012345, 0.7, 0.51, 0.2, 0.18, 33.33333333333333]),
        ];
        write_design_csv(&path, &samples).unwrap();
        assert_eq!(read_design_csv(&path).unwrap(), samples);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run_id,vf2,vf1_over_vf2,a2,a1_over_b1,a2_over_b2,phi\n"));
    }

    #[test]
    fn later_records_replace_earlier_ones() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let params = GeometryBounds::default().midpoint();
        let failed = RunRecord {
            run_id: 3,
            params,
            status: RunStatus::Failed,
            error: Some("boom".into()),
            result: None,
        };
        let again = RunRecord {
            error: Some("again".into()),
            ..failed.clone()
        };
        write_records(&path, [&failed, &again]).unwrap();
        let got = read_records(&path).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[&3], again);
        assert!(!got[&3].is_ok());
    }

    #[test]
    fn malformed_lines_report_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        std::fs::write(&path, "\n{not json}\n").unwrap();
        match read_records(&path) {
            Err(Error::Format { message, .. }) => assert!(message.starts_with("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
