use crate::error::{Error, Result};

/// Piecewise interpolation in `(ln x, ln y)`, falling back to linear where
/// a neighbor is not positive. Extrapolates as a power law below the first
/// node and holds the last value beyond the final node.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogTable {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl LogLogTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::Validation("table needs at least 2 matching nodes".into()));
        }
        if x[0] <= 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("table abscissae must be positive and increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("table values must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn blend(&self, i: usize, xq: f64) -> f64 {
        let (x0, x1, y0, y1) = (self.x[i], self.x[i + 1], self.y[i], self.y[i + 1]);
        if y0 > 0.0 && y1 > 0.0 {
            let t = (xq / x0).ln() / (x1 / x0).ln();
            (y0.ln() + t * (y1 / y0).ln()).exp()
        } else {
            y0 + (xq - x0) / (x1 - x0) * (y1 - y0)
        }
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if !(xq > 0.0) {
            return 0.0;
        }
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        if xq < self.x[0] {
            return if self.y[0] > 0.0 && self.y[1] > 0.0 { self.blend(0, xq) } else { 0.0 };
        }
        let i = self.x.partition_point(|&v| v <= xq) - 1;
        self.blend(i, xq)
    }
}
