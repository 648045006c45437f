//! CSV serialization of curves and coefficient tables.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::VolumetricCoefficients;
use crate::inversion::MpeInversion;
use crate::scalar::Real;
use crate::series::SignalCurve;

pub const INTENSITY_COLUMN: &str = "intensity_wcm2";

/// Which quantity the second column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveRole {
    Signal,
    Probability,
}

impl CurveRole {
    pub fn column(self) -> &'static str {
        match self {
            CurveRole::Signal => "signal",
            CurveRole::Probability => "probability",
        }
    }
}

impl fmt::Display for CurveRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub path: PathBuf,
    pub role: CurveRole,
    pub curve: SignalCurve<f64>,
    pub warnings: Vec<String>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Formats with 17 significant digits; parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a two-column curve. Lines starting with `#` are ignored; rows are
/// sorted by intensity (with a warning when they were not).
pub fn read_curve(path: &Path) -> Result<CurveFile> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let role = match names.as_slice() {
        [INTENSITY_COLUMN, "signal"] => CurveRole::Signal,
        [INTENSITY_COLUMN, "probability"] => CurveRole::Probability,
        _ => {
            return Err(parse_err(
                path,
                1,
                format!(
                    "expected header '{INTENSITY_COLUMN},signal' or '{INTENSITY_COLUMN},probability', got '{}'",
                    names.join(",")
                ),
            ))
        }
    };
    let mut rows: Vec<(f64, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| parse_err(path, line, format!("malformed number '{s}'")))
        };
        let (i, v) = (num(&record[0])?, num(&record[1])?);
        if !(i > 0.0 && i.is_finite()) {
            return Err(Error::Validation(format!("{}:{line}: intensity must be positive, got {i}", path.display())));
        }
        if !v.is_finite() {
            return Err(Error::Validation(format!("{}:{line}: value is not finite", path.display())));
        }
        rows.push((i, v, line));
    }
    let mut warnings = Vec::new();
    if rows.windows(2).any(|w| w[1].0 < w[0].0) {
        let order: Vec<String> = rows.iter().map(|r| r.2.to_string()).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let msg = format!(
            "{}: rows were not sorted by intensity; sorted (original line order {})",
            path.display(),
            order.join(",")
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].0 == w[0].0) {
        return Err(Error::Validation(format!(
            "{}: duplicate intensity {:e} on lines {} and {}",
            path.display(),
            w[0].0,
            w[0].2,
            w[1].2
        )));
    }
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let curve = SignalCurve::new(rows.iter().map(|r| (r.0, r.1)).collect(), label)?;
    Ok(CurveFile { path: path.to_path_buf(), role, curve, warnings })
}

/// Renders a curve as CSV text (values rounded to `f64`).
pub fn curve_csv<T: Real>(curve: &SignalCurve<T>, role: CurveRole) -> String {
    let mut s = format!("{INTENSITY_COLUMN},{}\n", role.column());
    for &(i, v) in curve.points() {
        s.push_str(&format!("{},{}\n", format_value(i.as_f64()), format_value(v.as_f64())));
    }
    s
}

pub fn write_curve<T: Real>(curve: &SignalCurve<T>, role: CurveRole, path: &Path) -> Result<()> {
    std::fs::write(path, curve_csv(curve, role)).map_err(|e| io_err(path, e))
}

/// One row of the coefficient table; `None` marks an excluded index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub k: usize,
    pub values: Option<(f64, f64, f64)>,
}

/// `A_k`, `G_k`, `B_k` of an inversion.
pub fn coefficient_rows<T: Real>(inv: &MpeInversion<T>) -> Vec<CoefficientRow> {
    let a = inv.signal_series.coefficients();
    let b = inv.probability.series.as_ref().map(|s| s.coefficients().to_vec()).unwrap_or_default();
    (0..a.len())
        .map(|k| CoefficientRow {
            k,
            values: inv
                .coefficients
                .get(k)
                .map(|g| (a[k].as_f64(), g.as_f64(), b.get(k).map_or(f64::NAN, |v| v.as_f64()))),
        })
        .collect()
}

/// Renders `k,A_k,G_k,B_k,excluded`; excluded rows leave the values empty.
pub fn coefficients_csv(rows: &[CoefficientRow]) -> String {
    let mut s = String::from("k,A_k,G_k,B_k,excluded\n");
    for r in rows {
        match r.values {
            Some((a, g, b)) => {
                s.push_str(&format!("{},{},{},{},false\n", r.k, format_value(a), format_value(g), format_value(b)))
            }
            None => s.push_str(&format!("{},,,,true\n", r.k)),
        }
    }
    s
}

pub fn write_coefficients(rows: &[CoefficientRow], path: &Path) -> Result<()> {
    std::fs::write(path, coefficients_csv(rows)).map_err(|e| io_err(path, e))
}

/// Renders `k,G_k,excluded`.
pub fn volumetric_csv<T: Real>(table: &VolumetricCoefficients<T>) -> String {
    let mut s = String::from("k,G_k,excluded\n");
    for (k, v) in table.values().iter().enumerate() {
        match v {
            Some(g) => s.push_str(&format!("{k},{},false\n", format_value(g.as_f64()))),
            None => s.push_str(&format!("{k},,true\n")),
        }
    }
    s
}

pub fn write_volumetric<T: Real>(table: &VolumetricCoefficients<T>, path: &Path) -> Result<()> {
    std::fs::write(path, volumetric_csv(table)).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_coefficients, CoefficientMode, Geometry};
    use proptest::prelude::*;
    use std::fs;

    fn temp(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn reads_rows_and_comments() {
        let (_d, p) = temp("# header comment\nintensity_wcm2,signal\n1e13,0.5\n# mid\n2e13,1.5\n");
        let f = read_curve(&p).unwrap();
        assert_eq!(f.role, CurveRole::Signal);
        assert_eq!(f.curve.points(), &[(1e13, 0.5), (2e13, 1.5)]);
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn parse_error_has_line() {
        let (_d, p) = temp("intensity_wcm2,signal\n1e13,0.5\nabc,1.0\n");
        match read_curve(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sorts_with_warning() {
        let (_d, p) = temp("intensity_wcm2,probability\n3e13,3\n1e13,1\n2e13,2\n");
        let f = read_curve(&p).unwrap();
        assert_eq!(f.role, CurveRole::Probability);
        assert_eq!(f.curve.intensities(), vec![1e13, 2e13, 3e13]);
        assert_eq!(f.warnings.len(), 1);
        assert!(f.warnings[0].contains("2,3,4"));
    }

    #[test]
    fn rejects_duplicates_and_nonpositive() {
        let (_d, p) = temp("intensity_wcm2,signal\n1e13,1\n1e13,2\n");
        assert!(matches!(read_curve(&p), Err(Error::Validation(_))));
        let (_d, p) = temp("intensity_wcm2,signal\n0,1\n");
        assert!(matches!(read_curve(&p), Err(Error::Validation(_))));
        let (_d, p) = temp("I,S\n1,1\n");
        assert!(matches!(read_curve(&p), Err(Error::Parse { .. })));
        assert!(matches!(read_curve(Path::new("/nonexistent/x.csv")), Err(Error::Io { .. })));
    }

    #[test]
    fn empty_curve_is_header_only() {
        let c = SignalCurve::<f64>::new(vec![], "e").unwrap();
        assert_eq!(curve_csv(&c, CurveRole::Signal), "intensity_wcm2,signal\n");
        let (_d, p) = temp("");
        write_curve(&c, CurveRole::Signal, &p).unwrap();
        assert!(read_curve(&p).unwrap().curve.is_empty());
    }

    #[test]
    fn excluded_rows() {
        let rows = vec![CoefficientRow { k: 0, values: None }, CoefficientRow { k: 1, values: Some((1.0, 0.5, 2.0)) }];
        let (_d, p) = temp("");
        write_coefficients(&rows, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,A_k,G_k,B_k,excluded");
        assert_eq!(lines[1], "0,,,,true");
        assert!(lines[2].ends_with(",false"));
        let t = build_coefficients::<f64>(Geometry::TwoD, 1, 8, CoefficientMode::Strict).unwrap();
        let csv = volumetric_csv(&t);
        assert!(csv.starts_with("k,G_k,excluded\n0,,true\n"));
        assert!(csv.contains("\n8,1.2500000000000000e-1,false\n"));
    }

    proptest! {
        #[test]
        fn roundtrip(raw in proptest::collection::vec((1e-3f64..1e20, -1e300f64..1e300), 0..40)) {
            let mut pts = raw;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| a.0 == b.0);
            let c = SignalCurve::new(pts, "r").unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.csv");
            write_curve(&c, CurveRole::Signal, &p).unwrap();
            let back = read_curve(&p).unwrap().curve;
            prop_assert_eq!(back.points(), c.points());
        }
    }
}
