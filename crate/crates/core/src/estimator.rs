//! Fitted density estimates: basis construction, optional domain
//! partitioning, the likelihood solve, and evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::basis::{Domain, WindowBasis};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::partition::partition;
use crate::samples::SampleSet;
use crate::solver::{outer_fit, FitReport};

/// Estimation method with its basis size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Method {
    Bezier {
        degree: usize,
    },
    BSpline {
        order: usize,
    },
    #[serde(rename = "pbezier")]
    PiecewiseBezier {
        degree: usize,
    },
}

/// Default Bernstein degree; 11 windows are enough for one smooth mode.
pub const DEFAULT_BEZIER_DEGREE: usize = 10;
/// Default B-spline order (continuity of degree 11 polynomials).
pub const DEFAULT_BSPLINE_ORDER: usize = 12;

impl Method {
    pub fn bezier() -> Self {
        Method::Bezier {
            degree: DEFAULT_BEZIER_DEGREE,
        }
    }

    pub fn bspline() -> Self {
        Method::BSpline {
            order: DEFAULT_BSPLINE_ORDER,
        }
    }

    pub fn piecewise_bezier() -> Self {
        Method::PiecewiseBezier {
            degree: DEFAULT_BEZIER_DEGREE,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Bezier { .. } => "bezier",
            Method::BSpline { .. } => "bspline",
            Method::PiecewiseBezier { .. } => "pbezier",
        }
    }
}

/// A fitted density: immutable basis plus nonnegative coefficients with
/// `sum c_i` in `[r - eps, r]`, evaluable anywhere (zero off-domain).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    basis: WindowBasis,
    coefficients: Vec<f64>,
    report: FitReport,
    method: Method,
}

impl DensityEstimate {
    pub(crate) fn from_parts(
        basis: WindowBasis,
        coefficients: Vec<f64>,
        report: FitReport,
        method: Method,
    ) -> Result<Self> {
        if coefficients.len() != basis.window_count() {
            return Err(Error::ModelFormat(format!(
                "{} coefficients for {} windows",
                coefficients.len(),
                basis.window_count()
            )));
        }
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::ModelFormat(
                "coefficients must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            basis,
            coefficients,
            report,
            method,
        })
    }

    pub fn basis(&self) -> &WindowBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `sum_i c_i phi_i(x)`; zero outside every basis piece.
    pub fn pdf(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| c * self.basis.eval(i, x))
            .sum()
    }

    /// `sum_i c_i`, which equals the integral of the estimate over its
    /// domain (windows have unit area).
    pub fn total_coefficient(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Coefficient mass per basis piece, in piece order.
    pub fn piece_masses(&self) -> Vec<f64> {
        let mut masses = vec![0.0f64; self.basis.pieces().len()];
        for (i, &c) in self.coefficients.iter().enumerate() {
            masses[self.basis.window_piece(i)] += c;
        }
        masses
    }

    /// Log-likelihood `sum_j log pdf(x_j)`. A sample where the density
    /// vanishes yields negative infinity, which callers should treat as the
    /// failure flag it is.
    pub fn log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.pdf(x).ln()).sum()
    }

    /// Quadrature of the density over its pieces, aligned on polynomial
    /// breakpoints so low-order spline kinks cost no accuracy. At least
    /// `min_panels` Simpson panels are spread over the pieces by width.
    pub fn mass(&self, min_panels: usize) -> f64 {
        let total_width: f64 = self.basis.pieces().iter().map(|p| p.domain.width()).sum();
        (0..self.basis.pieces().len())
            .map(|p| {
                let piece_width = self.basis.pieces()[p].domain.width();
                let share =
                    ((min_panels as f64 * piece_width / total_width).ceil() as usize).max(128);
                integrate_piecewise(|x| self.pdf(x), &self.basis.piece_breakpoints(p), share)
            })
            .sum()
    }
}

fn build_basis(xs: &[f64], method: Method, config: &SolverConfig) -> Result<WindowBasis> {
    match method {
        Method::Bezier { degree } => {
            // The exact sample range: Bernstein windows have equal areas
            // and their endpoint windows peak at the boundary, so the
            // extension remedy for unequal spline windows does not apply;
            // padding only spills mass outside the data.
            WindowBasis::bezier(Domain::of_samples(xs)?, degree)
        }
        Method::BSpline { order } => {
            WindowBasis::bspline(xs, order, config.extension_fraction, config.area_floor)
        }
        Method::PiecewiseBezier { degree } => {
            // Piece domains are the exact sample ranges: the estimate must
            // vanish on every removed gap.
            let part = partition(xs, config)?;
            let domains: Vec<Domain> = part.pieces.iter().map(|p| p.domain).collect();
            WindowBasis::piecewise_bezier(&domains, degree)
        }
    }
}

/// Fit a density to sorted samples with the given method.
pub fn fit(samples: &SampleSet, method: Method, config: &SolverConfig) -> Result<DensityEstimate> {
    config.validate()?;
    let xs = samples.values();
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            got: xs.len(),
            min: 2,
        });
    }
    let basis = build_basis(xs, method, config)?;
    let uncovered = basis.coverage_check(xs);
    if !uncovered.is_empty() {
        return Err(Error::CoverageFailure {
            count: uncovered.len(),
            first: uncovered[0],
        });
    }
    let (coefficients, report) = outer_fit(&basis, xs, config)?;
    DensityEstimate::from_parts(basis, coefficients, report, method)
}

/// Composite Simpson rule over `domain` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, domain: Domain, panels: usize) -> f64 {
    assert!(
        panels >= 2 && panels.is_multiple_of(2),
        "panels must be even and at least 2, got {panels}"
    );
    let h = domain.width() / panels as f64;
    let mut sum = f(domain.lo()) + f(domain.hi());
    for step in 1..panels {
        let weight = if step % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(domain.lo() + h * step as f64);
    }
    sum * h / 3.0
}

/// Composite Simpson aligned on the given sorted breakpoints, with at least
/// `min_panels` panels overall distributed by span width. Aligning panels
/// on the breakpoints keeps the rule accurate across kinks and jumps.
pub fn integrate_piecewise(f: impl Fn(f64) -> f64, breakpoints: &[f64], min_panels: usize) -> f64 {
    assert!(breakpoints.len() >= 2, "need at least two breakpoints");
    let total_width = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    if !(total_width > 0.0) {
        return 0.0;
    }
    breakpoints
        .windows(2)
        .map(|w| {
            let width = w[1] - w[0];
            if !(width > 0.0) {
                return 0.0;
            }
            let mut panels = ((min_panels as f64 * width / total_width).ceil() as usize).max(2);
            if panels % 2 == 1 {
                panels += 1;
            }
            simpson(&f, Domain::new(w[0], w[1]).expect("positive width"), panels)
        })
        .sum()
}

/// Absolute-difference metric `integral of |est - truth|` over `domain`.
pub fn l1_error(
    est: &DensityEstimate,
    truth: impl Fn(f64) -> f64,
    domain: Domain,
    panels: usize,
) -> f64 {
    simpson(|x| (est.pdf(x) - truth(x)).abs(), domain, panels)
}

/// Empirical likelihood-separation check between a density `f` (the
/// sampling distribution) and a competitor `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlSanity {
    pub mean_log_f: f64,
    pub mean_log_g: f64,
    /// `mean_log_f - mean_log_g`; positive in expectation when `f != g`.
    pub separation: f64,
}

/// Draw `m` points from `sampler` (assumed distributed as `f`) and compare
/// the empirical mean log-densities under `f` and `g`. Small `m` can flip
/// the separation sign; that noise is the caller's to interpret.
pub fn kl_sanity(
    f_pdf: impl Fn(f64) -> f64,
    g_pdf: impl Fn(f64) -> f64,
    mut sampler: impl FnMut() -> f64,
    m: usize,
) -> KlSanity {
    assert!(m >= 1, "need at least one draw");
    let mut sum_f = 0.0;
    let mut sum_g = 0.0;
    for _ in 0..m {
        let x = sampler();
        sum_f += f_pdf(x).ln();
        sum_g += g_pdf(x).ln();
    }
    let mean_log_f = sum_f / m as f64;
    let mean_log_g = sum_g / m as f64;
    KlSanity {
        mean_log_f,
        mean_log_g,
        separation: mean_log_f - mean_log_g,
    }
}
