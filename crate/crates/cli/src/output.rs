use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::svg::line_chart;
use crate::Failure;

/// Outputs collected in memory and written only once every computation
/// has succeeded. A failed write removes whatever was already written.
#[derive(Default)]
pub struct Staged {
    files: Vec<(Option<PathBuf>, String)>,
}

impl Staged {
    /// `None` means standard output.
    pub fn add(&mut self, path: Option<PathBuf>, content: String) {
        self.files.push((path, content));
    }

    /// Adds a CSV and, with `svg`, a chart of its first two columns.
    pub fn add_curve(&mut self, path: Option<PathBuf>, csv: String, title: &str, svg: bool) {
        if svg {
            if let Some(p) = &path {
                let points = parse_points(&csv);
                let y_label = csv.lines().next().and_then(|h| h.split(',').nth(1)).unwrap_or("").to_string();
                self.add(Some(p.with_extension("svg")), line_chart(title, &y_label, &points));
            }
        }
        self.add(path, csv);
    }

    pub fn commit(self) -> Result<(), Failure> {
        let mut written: Vec<PathBuf> = Vec::new();
        let mut stdout = Vec::new();
        for (path, content) in self.files {
            match path {
                Some(p) => {
                    if let Err(e) = fs::write(&p, content) {
                        let _ = fs::remove_file(&p);
                        for w in &written {
                            let _ = fs::remove_file(w);
                        }
                        return Err(Failure::Validation(format!("{}: {e}", p.display())));
                    }
                    written.push(p);
                }
                None => stdout.push(content),
            }
        }
        let mut out = std::io::stdout().lock();
        for s in stdout {
            out.write_all(s.as_bytes())
                .map_err(|e| Failure::Computation(format!("writing to standard output: {e}")))?;
        }
        Ok(())
    }
}

fn parse_points(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .filter_map(|l| {
            let mut it = l.split(',');
            Some((it.next()?.parse().ok()?, it.next()?.parse().ok()?))
        })
        .collect()
}

/// Rejects writing over an input file.
pub fn check_distinct(input: &Path, outputs: &[Option<&PathBuf>]) -> Result<(), Failure> {
    let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let input = canon(input);
    for out in outputs.iter().flatten() {
        if canon(out) == input {
            return Err(Failure::Usage(format!("output {} would overwrite the input", out.display())));
        }
    }
    Ok(())
}
