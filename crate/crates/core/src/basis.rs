//! Normalized nonnegative window families: Bernstein windows on an
//! interval, B-spline windows on sample-derived knots, and piecewise
//! Bernstein windows over a partitioned domain.
//!
//! Every retained window has positive raw area `p_i`; evaluation always
//! returns the normalized value `phi_i(x) = raw_i(x) / p_i`, so each window
//! integrates to one and a coefficient vector on the simplex yields a
//! probability density.

use crate::config::DEFAULT_AREA_FLOOR_SCALE;
use crate::error::{Error, Result};

/// A closed working interval in data units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    lo: f64,
    hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Smallest domain covering the given nonempty sample slice.
    pub fn of_samples(samples: &[f64]) -> Result<Self> {
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Pad both ends by `fraction` of the current width.
    pub fn extended(&self, fraction: f64) -> Domain {
        let pad = fraction * self.width();
        Domain {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }
}

/// Binomial coefficient by the multiplicative recurrence, avoiding raw
/// factorials (exact up to ~n = 60 within f64 range).
fn binomial(n: usize, i: usize) -> f64 {
    let i = i.min(n - i);
    let mut c = 1.0;
    for j in 1..=i {
        c = c * (n - i + j) as f64 / j as f64;
    }
    c
}

/// Unchecked Bernstein value `C(n,i) t^i (1-t)^(n-i)` for `t` in [0, 1].
pub(crate) fn bernstein(i: usize, n: usize, t: f64) -> f64 {
    binomial(n, i) * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32)
}

/// Checked Bernstein basis value of index `i`, degree `n`, at `t` in [0, 1].
pub fn bezier_eval(i: usize, n: usize, t: f64) -> Result<f64> {
    if i > n {
        return Err(Error::WindowIndexOutOfRange {
            index: i,
            count: n + 1,
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParamOutOfRange { t });
    }
    Ok(bernstein(i, n, t))
}

/// A non-decreasing knot sequence `t_0 <= ... <= t_{n+k}` for B-splines of
/// order `k` (degree `k - 1`); it carries `n + 1 = len - k` basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    order: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if knots.len() < order + 1 {
            return Err(Error::TooFewKnots {
                len: knots.len(),
                min: order + 1,
            });
        }
        for (idx, pair) in knots.windows(2).enumerate() {
            if !(pair[0] <= pair[1]) {
                return Err(Error::UnsortedKnots { index: idx + 1 });
            }
        }
        if knots.iter().any(|t| !t.is_finite()) {
            return Err(Error::UnsortedKnots { index: 0 });
        }
        Ok(Self { knots, order })
    }

    /// Knots from sorted observations `x_0..x_m` with `n = m`:
    /// `t_i = x_0` for `i < k`, `t_i = x_{i-k+1}` for `k <= i <= n`, and
    /// `t_i = x_{n-k+2}` for `i > n`. For `k = 1` the rule-3 source index
    /// `n + 1` does not exist and is clamped to the largest sample, which
    /// only appends one zero-width span at the top.
    pub fn from_sorted_samples(samples: &[f64], order: usize) -> Result<Self> {
        let k = order;
        if k == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if samples.len() < k + 1 {
            return Err(Error::TooFewSamples {
                got: samples.len(),
                min: k + 1,
            });
        }
        if let Some(idx) = samples.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::UnsortedSamples { index: idx + 1 });
        }
        let n = samples.len() - 1;
        let knots = (0..n + k + 1)
            .map(|i| {
                let src = if i < k {
                    0
                } else if i <= n {
                    i - k + 1
                } else {
                    (n + 2 - k).min(n)
                };
                samples[src]
            })
            .collect();
        Self::new(knots, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.order
    }

    /// Support `[t_i, t_{i+k}]` of the `i`-th basis function.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.order])
    }

    /// `integral of N_{i,k} = (t_{i+k} - t_i) / k`; zero for a fully
    /// repeated support.
    pub fn area(&self, i: usize) -> f64 {
        let (lo, hi) = self.support(i);
        (hi - lo) / self.order as f64
    }

    /// Interval `[t_{k-1}, t_{n+1})` on which the family sums to one.
    pub fn unity_range(&self) -> (f64, f64) {
        (self.knots[self.order - 1], self.knots[self.basis_count()])
    }

    /// Cox-de Boor value of `N_{i,k}` at `x`. Terms with a zero-width
    /// denominator contribute zero; the last nonempty span is closed on the
    /// right so the top of the knot range evaluates like its left limit.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        let k = self.order;
        let t = &self.knots;
        assert!(
            i < self.basis_count(),
            "basis index {i} out of range ({} functions)",
            self.basis_count()
        );
        if x < t[i] || x > t[i + k] {
            return 0.0;
        }
        let top = t[t.len() - 1];
        let mut vals = vec![0.0f64; k];
        for (j, v) in vals.iter_mut().enumerate() {
            let a = t[i + j];
            let b = t[i + j + 1];
            let inside = (a <= x && x < b) || (x == b && b == top && a < b);
            *v = if inside { 1.0 } else { 0.0 };
        }
        for ord in 2..=k {
            for j in 0..=(k - ord) {
                let left_den = t[i + j + ord - 1] - t[i + j];
                let right_den = t[i + j + ord] - t[i + j + 1];
                let left = if left_den > 0.0 {
                    (x - t[i + j]) / left_den * vals[j]
                } else {
                    0.0
                };
                let right = if right_den > 0.0 {
                    (t[i + j + ord] - x) / right_den * vals[j + 1]
                } else {
                    0.0
                };
                vals[j] = left + right;
            }
        }
        vals[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFamily {
    Bezier,
    BSpline,
    PiecewiseBezier,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PieceShape {
    Bezier { degree: usize },
    BSpline { knots: KnotVector },
}

/// One sub-interval of the working domain with its basis description.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub domain: Domain,
    pub shape: PieceShape,
}

impl Piece {
    /// Number of raw basis functions the piece defines (before drops).
    fn capacity(&self) -> usize {
        match &self.shape {
            PieceShape::Bezier { degree } => degree + 1,
            PieceShape::BSpline { knots } => knots.basis_count(),
        }
    }
}

/// One retained window: position within its piece plus its raw area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub piece: usize,
    pub local: usize,
    pub area: f64,
}

/// A family of normalized nonnegative window functions over one or more
/// pieces. Immutable once built; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBasis {
    family: WindowFamily,
    pieces: Vec<Piece>,
    windows: Vec<Window>,
}

impl WindowBasis {
    /// `degree + 1` Bernstein windows affinely mapped onto `domain`, each
    /// normalized by `(degree + 1) / width`.
    pub fn bezier(domain: Domain, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidDegree(0));
        }
        let area = domain.width() / (degree + 1) as f64;
        let windows = (0..=degree)
            .map(|local| Window {
                piece: 0,
                local,
                area,
            })
            .collect();
        Ok(Self {
            family: WindowFamily::Bezier,
            pieces: vec![Piece {
                domain,
                shape: PieceShape::Bezier { degree },
            }],
            windows,
        })
    }

    /// One Bernstein family per piece domain, concatenated into a single
    /// joint basis. Domains must be ordered and non-overlapping.
    pub fn piecewise_bezier(domains: &[Domain], degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidDegree(0));
        }
        if domains.is_empty() {
            return Err(Error::DegenerateBasis { width: 0.0 });
        }
        for pair in domains.windows(2) {
            if pair[1].lo() < pair[0].hi() {
                return Err(Error::InvalidDomain {
                    lo: pair[1].lo(),
                    hi: pair[0].hi(),
                });
            }
        }
        let mut pieces = Vec::with_capacity(domains.len());
        let mut windows = Vec::with_capacity(domains.len() * (degree + 1));
        for (p, &domain) in domains.iter().enumerate() {
            let area = domain.width() / (degree + 1) as f64;
            pieces.push(Piece {
                domain,
                shape: PieceShape::Bezier { degree },
            });
            windows.extend((0..=degree).map(|local| Window {
                piece: p,
                local,
                area,
            }));
        }
        Ok(Self {
            family: WindowFamily::PiecewiseBezier,
            pieces,
            windows,
        })
    }

    /// B-spline windows whose knots are the sorted observations on a domain
    /// extended by `extension_fraction` of the sample range at both ends.
    /// The extended endpoints enter the knot construction as boundary
    /// sources (`lo` once, `hi` with the multiplicity rule 3 consumes), so
    /// the clamped boundary knots sit at the extension rather than at the
    /// extreme samples and every observation lies strictly inside the
    /// partition-of-unity range.
    pub fn bspline(
        samples: &[f64],
        order: usize,
        extension_fraction: f64,
        area_floor: Option<f64>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if samples.len() < order.max(2) {
            return Err(Error::TooFewSamples {
                got: samples.len(),
                min: order.max(2),
            });
        }
        if let Some(idx) = samples.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::UnsortedSamples { index: idx + 1 });
        }
        let range = samples[samples.len() - 1] - samples[0];
        if !(range > 0.0) {
            return Err(Error::DegenerateBasis { width: range });
        }
        let pad = extension_fraction * range;
        let lo = samples[0] - pad;
        let hi = samples[samples.len() - 1] + pad;
        let mut sources = Vec::with_capacity(samples.len() + order + 1);
        sources.push(lo);
        sources.extend_from_slice(samples);
        for _ in 0..(order - 1).max(1) {
            sources.push(hi);
        }
        let knots = KnotVector::from_sorted_samples(&sources, order)?;
        Self::bspline_from_knots(knots, area_floor)
    }

    /// B-spline windows directly over a given knot vector. Windows with
    /// area below the floor (default `1e-12 * knot range`) cannot be
    /// normalized reliably and are dropped.
    pub fn bspline_from_knots(knots: KnotVector, area_floor: Option<f64>) -> Result<Self> {
        let t0 = knots.knots()[0];
        let tl = *knots.knots().last().expect("validated nonempty");
        if !(tl > t0) {
            return Err(Error::DegenerateBasis { width: tl - t0 });
        }
        let domain = Domain::new(t0, tl)?;
        let floor = area_floor.unwrap_or(DEFAULT_AREA_FLOOR_SCALE * domain.width());
        let windows: Vec<Window> = (0..knots.basis_count())
            .filter_map(|local| {
                let area = knots.area(local);
                (area > 0.0 && area >= floor).then_some(Window {
                    piece: 0,
                    local,
                    area,
                })
            })
            .collect();
        if windows.is_empty() {
            return Err(Error::DegenerateBasis {
                width: domain.width(),
            });
        }
        Ok(Self {
            family: WindowFamily::BSpline,
            pieces: vec![Piece {
                domain,
                shape: PieceShape::BSpline { knots },
            }],
            windows,
        })
    }

    /// Reassemble a basis from stored pieces and window records (model file
    /// loading). Areas are taken as stored so evaluations reproduce the
    /// original bit for bit.
    pub fn from_parts(
        family: WindowFamily,
        pieces: Vec<Piece>,
        windows: Vec<Window>,
    ) -> Result<Self> {
        if pieces.is_empty() || windows.is_empty() {
            return Err(Error::DegenerateBasis { width: 0.0 });
        }
        for w in &windows {
            let piece = pieces.get(w.piece).ok_or(Error::ModelFormat(format!(
                "window references piece {} of {}",
                w.piece,
                pieces.len()
            )))?;
            if w.local >= piece.capacity() {
                return Err(Error::ModelFormat(format!(
                    "window local index {} out of range for piece {}",
                    w.local, w.piece
                )));
            }
            if !(w.area > 0.0 && w.area.is_finite()) {
                return Err(Error::ModelFormat(format!(
                    "window area {} must be positive and finite",
                    w.area
                )));
            }
        }
        Ok(Self {
            family,
            pieces,
            windows,
        })
    }

    pub fn family(&self) -> WindowFamily {
        self.family
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// Raw area `p_i` of the retained window `i`.
    pub fn window_area(&self, i: usize) -> f64 {
        self.windows[i].area
    }

    /// Normalizer `N_i = 1 / p_i`.
    pub fn window_normalizer(&self, i: usize) -> f64 {
        1.0 / self.windows[i].area
    }

    pub fn window_piece(&self, i: usize) -> usize {
        self.windows[i].piece
    }

    /// Overall span from the first piece's lower end to the last piece's
    /// upper end (piecewise bases include the removed gaps in between).
    pub fn span(&self) -> Domain {
        let lo = self.pieces[0].domain.lo();
        let hi = self.pieces[self.pieces.len() - 1].domain.hi();
        Domain { lo, hi }
    }

    /// Normalized window value `phi_i(x)`; zero off the window's piece.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        let w = &self.windows[i];
        let piece = &self.pieces[w.piece];
        if !piece.domain.contains(x) {
            return 0.0;
        }
        let raw = match &piece.shape {
            PieceShape::Bezier { degree } => {
                let t = (x - piece.domain.lo()) / piece.domain.width();
                bernstein(w.local, *degree, t)
            }
            PieceShape::BSpline { knots } => knots.eval(w.local, x),
        };
        raw / w.area
    }

    /// Indices of samples at which every window vanishes; an empty result
    /// means the fit may proceed.
    pub fn coverage_check(&self, samples: &[f64]) -> Vec<usize> {
        samples
            .iter()
            .enumerate()
            .filter(|(_, &x)| (0..self.window_count()).all(|i| self.eval(i, x) == 0.0))
            .map(|(j, _)| j)
            .collect()
    }

    /// Sorted distinct abscissae at which window `i` changes polynomial
    /// piece, including its support endpoints. Quadrature aligned on these
    /// points stays accurate even for low orders.
    pub fn window_breakpoints(&self, i: usize) -> Vec<f64> {
        let w = &self.windows[i];
        let piece = &self.pieces[w.piece];
        match &piece.shape {
            PieceShape::Bezier { .. } => vec![piece.domain.lo(), piece.domain.hi()],
            PieceShape::BSpline { knots } => {
                let (lo, hi) = knots.support(w.local);
                let mut points: Vec<f64> = knots
                    .knots()
                    .iter()
                    .copied()
                    .filter(|&t| t >= lo && t <= hi)
                    .collect();
                points.dedup();
                points
            }
        }
    }

    /// Distinct polynomial-piece boundaries of one domain piece.
    pub fn piece_breakpoints(&self, p: usize) -> Vec<f64> {
        let piece = &self.pieces[p];
        match &piece.shape {
            PieceShape::Bezier { .. } => vec![piece.domain.lo(), piece.domain.hi()],
            PieceShape::BSpline { knots } => {
                let mut points: Vec<f64> = knots.knots().to_vec();
                points.dedup();
                points
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{integrate_piecewise, simpson};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bezier_eval_endpoint_and_midpoint() {
        assert_eq!(bezier_eval(0, 10, 0.0).unwrap(), 1.0);
        assert_eq!(bezier_eval(1, 2, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn bezier_eval_partition_of_unity() {
        let sum: f64 = (0..=10).map(|i| bezier_eval(i, 10, 0.3).unwrap()).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bezier_eval_rejects_bad_inputs() {
        assert!(bezier_eval(3, 2, 0.5).is_err());
        assert!(bezier_eval(0, 2, 1.5).is_err());
        assert!(bezier_eval(0, 2, -0.1).is_err());
    }

    #[test]
    fn binomial_stays_finite_for_large_degree() {
        // No factorial overflow up to degree 60.
        let c = binomial(60, 30);
        assert!(c.is_finite());
        assert_abs_diff_eq!(c / 118264581564861424.0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bezier_basis_normalization_against_beta_integral() {
        // Oracle: integral of t^i (1-t)^(n-i) over [0,1] is
        // i! (n-i)! / (n+1)!, hence each raw window area is 1/(n+1) and the
        // normalizer is n+1.
        let domain = Domain::new(0.0, 1.0).unwrap();
        let basis = WindowBasis::bezier(domain, 10).unwrap();
        assert_eq!(basis.window_count(), 11);
        for i in 0..basis.window_count() {
            assert_abs_diff_eq!(basis.window_normalizer(i), 11.0, epsilon = 1e-12);
            let integral = simpson(|x| basis.eval(i, x), domain, 4096);
            assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bezier_basis_scales_to_domain() {
        let domain = Domain::new(0.0, 2.0).unwrap();
        let basis = WindowBasis::bezier(domain, 1).unwrap();
        // Normalizer (n+1)/width = 1, so phi_0(0) = B_{0,1}(0) = 1.
        assert_eq!(basis.eval(0, 0.0), 1.0);
        let integral = simpson(|x| basis.eval(0, x), domain, 4096);
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bezier_basis_rejects_degenerate() {
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(Domain::new(2.0, 1.0).is_err());
        let d = Domain::new(0.0, 1.0).unwrap();
        assert!(WindowBasis::bezier(d, 0).is_err());
    }

    #[test]
    fn knots_follow_the_three_rules() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let kv = KnotVector::from_sorted_samples(&x, 3).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(kv.basis_count(), 5);
    }

    #[test]
    fn knots_order_one_specialization() {
        let x = [0.0, 1.0, 2.0];
        let kv = KnotVector::from_sorted_samples(&x, 1).unwrap();
        // t_i = x_i, with the out-of-range rule-3 index clamped to x_m.
        assert_eq!(kv.knots(), &[0.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn knots_allow_duplicates() {
        let x = [0.0, 0.0, 1.0];
        let kv = KnotVector::from_sorted_samples(&x, 2).unwrap();
        assert!(kv.knots().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn knots_reject_unsorted_or_short() {
        assert!(KnotVector::from_sorted_samples(&[1.0, 0.0], 1).is_err());
        assert!(KnotVector::from_sorted_samples(&[0.0, 1.0], 3).is_err());
    }

    #[test]
    fn bspline_eval_order_one_indicator() {
        let kv = KnotVector::new(vec![0.0, 1.0, 2.0], 1).unwrap();
        assert_eq!(kv.eval(0, 0.5), 1.0);
        assert_eq!(kv.eval(0, 1.5), 0.0);
        assert_eq!(kv.eval(1, 1.5), 1.0);
    }

    #[test]
    fn bspline_eval_one_recursion_level() {
        let kv = KnotVector::new(vec![0.0, 1.0, 2.0], 2).unwrap();
        // N_{0,2}(0.5) = (0.5 - 0)/(1 - 0) * N_{0,1}(0.5) = 0.5.
        assert_abs_diff_eq!(kv.eval(0, 0.5), 0.5, epsilon = 0.0);
    }

    #[test]
    fn bspline_eval_zero_over_zero_convention() {
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0], 2).unwrap();
        // Left term is 0/0 and drops; right term is (1 - x)/(1 - 0).
        assert_abs_diff_eq!(kv.eval(0, 0.5), 0.5, epsilon = 0.0);
    }

    #[test]
    fn bspline_eval_closed_at_top() {
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0], 2).unwrap();
        let total: f64 = (0..kv.basis_count()).map(|i| kv.eval(i, 1.0)).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn bspline_area_closed_form_matches_quadrature() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 3.0, 3.0], 3).unwrap();
        assert_abs_diff_eq!(kv.area(0), 1.0 / 3.0, epsilon = 1e-15);
        let domain = Domain::new(0.0, 1.0).unwrap();
        let quad = simpson(|x| kv.eval(0, x), domain, 4096);
        assert_abs_diff_eq!(quad, kv.area(0), epsilon = 1e-10);
        // Middle window spans two spans; integrate over its support.
        let quad2 = simpson(|x| kv.eval(2, x), Domain::new(0.0, 3.0).unwrap(), 8192);
        assert_abs_diff_eq!(quad2, kv.area(2), epsilon = 1e-8);
    }

    #[test]
    fn bspline_area_edge_cases() {
        let kv = KnotVector::new(vec![0.0, 1.0, 2.0], 1).unwrap();
        assert_eq!(kv.area(0), 1.0);
        let repeated = KnotVector::new(vec![0.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(repeated.area(0), 0.0);
    }

    #[test]
    fn bspline_local_support() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 3.0, 3.0], 3).unwrap();
        for i in 0..kv.basis_count() {
            let (lo, hi) = kv.support(i);
            assert_eq!(kv.eval(i, lo - 0.25), 0.0);
            assert_eq!(kv.eval(i, hi + 0.25), 0.0);
        }
    }

    #[test]
    fn bspline_partition_of_unity_on_interior() {
        let samples: Vec<f64> = (0..31)
            .map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.2)
            .collect();
        let mut sorted = samples;
        sorted.sort_by(f64::total_cmp);
        for k in [2usize, 4, 12] {
            let kv = KnotVector::from_sorted_samples(&sorted, k).unwrap();
            let (lo, hi) = kv.unity_range();
            for step in 0..500 {
                let x = lo + (hi - lo) * (step as f64 + 0.5) / 500.0;
                let sum: f64 = (0..kv.basis_count()).map(|i| kv.eval(i, x)).sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bspline_basis_normalizes_every_retained_window() {
        let samples: Vec<f64> = (0..31).map(|i| (i as f64).sqrt() * 1.3).collect();
        let basis = WindowBasis::bspline(&samples, 12, 0.05, None).unwrap();
        assert!(basis.window_count() > 0);
        for i in 0..basis.window_count() {
            assert!(basis.window_area(i) > 0.0);
            let integral =
                integrate_piecewise(|x| basis.eval(i, x), &basis.window_breakpoints(i), 4096);
            assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn bspline_basis_identical_samples_degenerate() {
        let samples = vec![2.0; 40];
        match WindowBasis::bspline(&samples, 12, 0.05, None) {
            Err(Error::DegenerateBasis { .. }) => {}
            other => panic!("expected degenerate basis, got {other:?}"),
        }
    }

    #[test]
    fn bspline_order_one_gives_disjoint_indicators() {
        let samples = [0.0, 1.0, 2.5, 4.0];
        let basis = WindowBasis::bspline(&samples, 1, 0.05, None).unwrap();
        // One indicator per inter-knot span, pairwise disjoint.
        for x in [0.5, 1.7, 3.0] {
            let active: Vec<usize> = (0..basis.window_count())
                .filter(|&i| basis.eval(i, x) > 0.0)
                .collect();
            assert_eq!(active.len(), 1, "x = {x}: {active:?}");
        }
        // Every sample is covered, including both extremes.
        assert!(basis.coverage_check(&samples).is_empty());
    }

    #[test]
    fn coverage_check_reports_outside_points() {
        let domain = Domain::new(0.0, 1.0).unwrap();
        let basis = WindowBasis::bezier(domain, 10).unwrap();
        assert!(basis.coverage_check(&[0.2, 0.5, 0.9]).is_empty());
        assert_eq!(basis.coverage_check(&[0.5, 1.5]), vec![1]);
    }

    #[test]
    fn bspline_coverage_includes_largest_sample() {
        // The closed-right convention on the last span keeps the top of the
        // knot range covered even without extension.
        let samples = [0.0, 1.0, 2.0, 3.0];
        let kv = KnotVector::from_sorted_samples(&samples, 1).unwrap();
        let basis = WindowBasis::bspline_from_knots(kv, None).unwrap();
        assert!(basis.coverage_check(&samples).is_empty());
    }

    #[test]
    fn window_nonnegative_everywhere() {
        let samples: Vec<f64> = (0..20).map(|i| (i as f64 * 0.711).fract() * 5.0).collect();
        let mut sorted = samples;
        sorted.sort_by(f64::total_cmp);
        let basis = WindowBasis::bspline(&sorted, 4, 0.05, None).unwrap();
        let span = basis.span();
        for step in 0..=2000 {
            let x = span.lo() + span.width() * step as f64 / 2000.0;
            for i in 0..basis.window_count() {
                assert!(basis.eval(i, x) >= 0.0);
            }
        }
    }

    #[test]
    fn piecewise_bezier_concatenates_pieces() {
        let d1 = Domain::new(0.0, 1.0).unwrap();
        let d2 = Domain::new(2.0, 3.0).unwrap();
        let basis = WindowBasis::piecewise_bezier(&[d1, d2], 10).unwrap();
        assert_eq!(basis.window_count(), 22);
        assert_eq!(basis.window_piece(0), 0);
        assert_eq!(basis.window_piece(11), 1);
        // A window from piece 0 vanishes on piece 1 and in the gap.
        assert_eq!(basis.eval(0, 1.5), 0.0);
        assert_eq!(basis.eval(0, 2.5), 0.0);
        assert!(basis.eval(12, 2.5) > 0.0);
    }

    #[test]
    fn piecewise_bezier_rejects_overlap() {
        let d1 = Domain::new(0.0, 2.0).unwrap();
        let d2 = Domain::new(1.0, 3.0).unwrap();
        assert!(WindowBasis::piecewise_bezier(&[d1, d2], 10).is_err());
    }
}
