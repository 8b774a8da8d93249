//! File formats: sample files, the model file, and plot-grid emission.
//!
//! Sample files hold one decimal per line. Models are pretty-printed JSON;
//! floats serialize as shortest round-trip decimals, so a written model
//! reloads to bit-identical evaluations.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{Domain, KnotVector, Piece, PieceShape, Window, WindowBasis, WindowFamily};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, Method};
use crate::samples::SampleSet;
use crate::solver::FitReport;

pub const MODEL_FORMAT: &str = "windens-model/1";

/// Parse a sample file (one decimal per line, blank lines ignored).
pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::DataFormat(format!("line {}: cannot parse `{line}`", lineno + 1))
        })?;
        values.push(v);
    }
    SampleSet::from_values(values)
}

/// Write samples one per line at full round-trip precision.
pub fn write_samples(set: &SampleSet, out: &mut impl Write) -> Result<()> {
    for v in set.values() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceRecord {
    Bezier {
        lo: f64,
        hi: f64,
        degree: usize,
    },
    BSpline {
        lo: f64,
        hi: f64,
        order: usize,
        knots: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowRecord {
    pub piece: usize,
    pub local: usize,
    pub area: f64,
}

/// On-disk model: everything needed to rebuild the estimate plus the fit
/// provenance (config snapshot and iteration record).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub method: Method,
    pub config: SolverConfig,
    pub pieces: Vec<PieceRecord>,
    pub windows: Vec<WindowRecord>,
    pub coefficients: Vec<f64>,
    pub report: FitReport,
}

impl ModelFile {
    pub fn from_estimate(est: &DensityEstimate, config: &SolverConfig) -> Self {
        let pieces = est
            .basis()
            .pieces()
            .iter()
            .map(|p| match &p.shape {
                PieceShape::Bezier { degree } => PieceRecord::Bezier {
                    lo: p.domain.lo(),
                    hi: p.domain.hi(),
                    degree: *degree,
                },
                PieceShape::BSpline { knots } => PieceRecord::BSpline {
                    lo: p.domain.lo(),
                    hi: p.domain.hi(),
                    order: knots.order(),
                    knots: knots.knots().to_vec(),
                },
            })
            .collect();
        let windows = est
            .basis()
            .windows()
            .iter()
            .map(|w| WindowRecord {
                piece: w.piece,
                local: w.local,
                area: w.area,
            })
            .collect();
        Self {
            format: MODEL_FORMAT.to_string(),
            method: est.method(),
            config: config.clone(),
            pieces,
            windows,
            coefficients: est.coefficients().to_vec(),
            report: est.report().clone(),
        }
    }

    pub fn into_estimate(self) -> Result<DensityEstimate> {
        if self.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unsupported format `{}` (expected `{MODEL_FORMAT}`)",
                self.format
            )));
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for record in &self.pieces {
            let piece = match record {
                PieceRecord::Bezier { lo, hi, degree } => Piece {
                    domain: Domain::new(*lo, *hi)?,
                    shape: PieceShape::Bezier { degree: *degree },
                },
                PieceRecord::BSpline {
                    lo,
                    hi,
                    order,
                    knots,
                } => {
                    let kv = KnotVector::new(knots.clone(), *order)?;
                    let domain = Domain::new(*lo, *hi)?;
                    if kv.knots()[0] != domain.lo()
                        || kv.knots()[kv.knots().len() - 1] != domain.hi()
                    {
                        return Err(Error::ModelFormat(
                            "piece domain does not match its knot range".into(),
                        ));
                    }
                    Piece {
                        domain,
                        shape: PieceShape::BSpline { knots: kv },
                    }
                }
            };
            pieces.push(piece);
        }
        let windows = self
            .windows
            .iter()
            .map(|w| Window {
                piece: w.piece,
                local: w.local,
                area: w.area,
            })
            .collect();
        let family = match self.method {
            Method::Bezier { .. } => WindowFamily::Bezier,
            Method::BSpline { .. } => WindowFamily::BSpline,
            Method::PiecewiseBezier { .. } => WindowFamily::PiecewiseBezier,
        };
        let basis = WindowBasis::from_parts(family, pieces, windows)?;
        DensityEstimate::from_parts(basis, self.coefficients, self.report, self.method)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| Error::ModelFormat(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::ModelFormat(e.to_string()))
    }
}

/// Emit a TSV grid of `(x, estimate, [truth])` rows over the fit domain;
/// `rows` points inclusive of both ends, strictly increasing.
pub fn write_plot_grid(
    est: &DensityEstimate,
    rows: usize,
    truth: Option<fn(f64) -> f64>,
    out: &mut impl Write,
) -> Result<()> {
    if rows < 2 {
        return Err(Error::InvalidConfig("grid must have at least 2 rows"));
    }
    let span = est.basis().span();
    for i in 0..rows {
        let x = span.lo() + span.width() * i as f64 / (rows - 1) as f64;
        match truth {
            Some(f) => writeln!(out, "{x}\t{}\t{}", est.pdf(x), f(x))?,
            None => writeln!(out, "{x}\t{}", est.pdf(x))?,
        }
    }
    Ok(())
}
