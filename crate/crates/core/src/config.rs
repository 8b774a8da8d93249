//! Solver and fitting constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All tuning constants for basis construction, domain partitioning and the
/// two-level likelihood iteration. `None` fields are resolved from the data
/// at fit time (see the accessor methods).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Radius of the two quadratic constraints. With unit-area windows the
    /// fitted density integrates to `r`, so the default 1 yields a
    /// probability density.
    pub r: f64,
    /// Outer termination tolerance: stop once `sum(u_i v_i) + eps >= r`.
    pub eps_outer: f64,
    /// Inner residual tolerance. `None` resolves to `1e-9 * m` for `m`
    /// samples, keeping the tolerance dimension-consistent with the residual
    /// sum over `m` equations.
    pub delta_inner: Option<f64>,
    /// Outer iteration budget.
    pub max_outer: usize,
    /// Coordinate-update budget per inner solve.
    pub max_inner_updates: u64,
    /// Smallest sample count a partition piece may hold. `None` resolves to
    /// `max(30, ceil(m / 6))`.
    pub min_piece_size: Option<usize>,
    /// A candidate gap is cut only if it is at least this multiple of the
    /// mean spacing of the remaining gaps in its segment. Keeps ordinary
    /// sampling noise from splitting a connected mode.
    pub min_gap_dominance: f64,
    /// Extrapolate the outer weight iteration (false leaves the plain
    /// alternation). The plain update contracts only geometrically while
    /// coefficients decay toward the boundary of the positive cone, so
    /// decaying components are over-relaxed by an adaptive power of their
    /// own contraction ratio, under a merit safeguard with plain-step
    /// fallback. Fixed points, the weight constraint and determinism are
    /// all preserved.
    pub accelerate_outer: bool,
    /// Windows with raw area below this are dropped and the rest
    /// renormalized. `None` resolves to `1e-12 * domain_width`.
    pub area_floor: Option<f64>,
    /// Fraction of the sample range added to each end of the working
    /// interval when B-spline knots are built from the data, mitigating the
    /// one-sided-tail bias of boundary windows whose sizes and shapes vary.
    /// Bernstein bases use the exact sample range.
    pub extension_fraction: f64,
}

pub const DEFAULT_EPS_OUTER: f64 = 1e-8;
pub const DEFAULT_DELTA_INNER_PER_SAMPLE: f64 = 1e-9;
pub const DEFAULT_MAX_OUTER: usize = 200;
pub const DEFAULT_MAX_INNER_UPDATES: u64 = 1_000_000;
pub const DEFAULT_MIN_GAP_DOMINANCE: f64 = 10.0;
pub const DEFAULT_EXTENSION_FRACTION: f64 = 0.05;
pub const DEFAULT_AREA_FLOOR_SCALE: f64 = 1e-12;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            eps_outer: DEFAULT_EPS_OUTER,
            delta_inner: None,
            max_outer: DEFAULT_MAX_OUTER,
            max_inner_updates: DEFAULT_MAX_INNER_UPDATES,
            min_piece_size: None,
            min_gap_dominance: DEFAULT_MIN_GAP_DOMINANCE,
            accelerate_outer: true,
            area_floor: None,
            extension_fraction: DEFAULT_EXTENSION_FRACTION,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::InvalidConfig("r must be positive"));
        }
        if !(self.eps_outer > 0.0) {
            return Err(Error::InvalidConfig("eps_outer must be positive"));
        }
        if let Some(d) = self.delta_inner {
            if !(d > 0.0) {
                return Err(Error::InvalidConfig("delta_inner must be positive"));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidConfig("max_outer must be at least 1"));
        }
        if self.max_inner_updates == 0 {
            return Err(Error::InvalidConfig("max_inner_updates must be at least 1"));
        }
        if self.min_piece_size == Some(0) {
            return Err(Error::InvalidConfig("min_piece_size must be at least 1"));
        }
        if !(self.min_gap_dominance >= 0.0) {
            return Err(Error::InvalidConfig(
                "min_gap_dominance must be nonnegative",
            ));
        }
        if let Some(f) = self.area_floor {
            if !(f >= 0.0) {
                return Err(Error::InvalidConfig("area_floor must be nonnegative"));
            }
        }
        if !(self.extension_fraction >= 0.0) {
            return Err(Error::InvalidConfig(
                "extension_fraction must be nonnegative",
            ));
        }
        Ok(())
    }

    /// Inner tolerance for a solve over `m` samples.
    pub fn resolved_delta(&self, m: usize) -> f64 {
        self.delta_inner
            .unwrap_or(DEFAULT_DELTA_INNER_PER_SAMPLE * m as f64)
    }

    /// Piece-size floor for a partition of `m` samples.
    pub fn resolved_min_piece(&self, m: usize) -> usize {
        self.min_piece_size.unwrap_or_else(|| 30.max(m.div_ceil(6)))
    }

    /// Area floor for a basis on a domain of the given width.
    pub fn resolved_area_floor(&self, domain_width: f64) -> f64 {
        self.area_floor
            .unwrap_or(DEFAULT_AREA_FLOOR_SCALE * domain_width)
    }
}
