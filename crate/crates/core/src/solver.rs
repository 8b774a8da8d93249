//! Two-level constrained maximum-likelihood iteration.
//!
//! The mixture `f(x) = sum_i u_i v_i phi_i(x)` is fitted under the two
//! quadratic constraints `sum u_i^2 = r` and `sum v_i^2 = r`. The outer
//! loop alternates between solving the u-subproblem at fixed v and
//! rescaling v toward the geometric mean `sqrt(u_i v_i)`; it stops once
//! `sum u_i v_i + eps >= r`, which pins u and v together (at the extremum
//! they coincide, so the coefficients are `c_i = u_i v_i`).
//!
//! The u-subproblem reduces to the nonlinear system
//! `sum_j D_kj alpha_k alpha_j = 1` over one alpha per sample, with
//! `D = (r/m) B^T B` built from the weighted window values. It is solved by
//! a coordinate scheme: repeatedly pick the equation with the largest
//! residual and zero it exactly by moving its own alpha to the positive
//! root of the local quadratic.

use serde::{Deserialize, Serialize};

use crate::basis::WindowBasis;
use crate::config::SolverConfig;
use crate::error::{Error, Result};

/// Weighted window values `b_ij = v_i phi_i(x_j)`, stored row-major with
/// one row per window.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: Vec<f64>,
    windows: usize,
    samples: usize,
}

impl DesignMatrix {
    /// Build from a basis, weight vector and samples. Every column must
    /// keep at least one positive entry, otherwise the corresponding sample
    /// would contribute `log 0` to the likelihood.
    pub fn build(basis: &WindowBasis, v: &[f64], samples: &[f64]) -> Result<Self> {
        assert_eq!(v.len(), basis.window_count(), "weight length mismatch");
        let n = basis.window_count();
        let m = samples.len();
        let mut phi = vec![0.0f64; n * m];
        for i in 0..n {
            for (j, &x) in samples.iter().enumerate() {
                phi[i * m + j] = basis.eval(i, x);
            }
        }
        Self::from_scaled_rows(&phi, n, m, v)
    }

    /// Scale precomputed rows `phi_i(x_j)` by `v_i`; shared by `build` and
    /// the outer loop, which reuses one phi evaluation across iterations.
    /// A column counts as covered only if some entry's square is still
    /// positive, since the gram diagonal is built from those squares.
    pub(crate) fn from_scaled_rows(phi: &[f64], n: usize, m: usize, v: &[f64]) -> Result<Self> {
        let mut values = vec![0.0f64; n * m];
        let mut column_covered = vec![false; m];
        for i in 0..n {
            let vi = v[i];
            for j in 0..m {
                let b = vi * phi[i * m + j];
                values[i * m + j] = b;
                if b * b > 0.0 {
                    column_covered[j] = true;
                }
            }
        }
        if let Some(j) = column_covered.iter().position(|&c| !c) {
            return Err(Error::ZeroColumn { sample: j });
        }
        Ok(Self {
            values,
            windows: n,
            samples: m,
        })
    }

    pub fn window_count(&self) -> usize {
        self.windows
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.samples + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.samples..(i + 1) * self.samples]
    }
}

/// Symmetric sample Gram matrix `D_ij = (r/m) (b_i . b_j)` over design
/// columns, plus its largest entry (used to initialize the inner solver).
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Vec<f64>,
    m: usize,
    max_entry: f64,
}

impl GramMatrix {
    pub fn build(b: &DesignMatrix, r: f64) -> Self {
        let m = b.sample_count();
        let scale = r / m as f64;
        let mut values = vec![0.0f64; m * m];
        for k in 0..b.window_count() {
            let row = b.row(k);
            for i in 0..m {
                let bi = row[i];
                if bi == 0.0 {
                    continue;
                }
                for j in i..m {
                    values[i * m + j] += bi * row[j];
                }
            }
        }
        let mut max_entry = 0.0f64;
        for i in 0..m {
            for j in i..m {
                let v = values[i * m + j] * scale;
                values[i * m + j] = v;
                values[j * m + i] = v;
                if v > max_entry {
                    max_entry = v;
                }
            }
        }
        Self {
            values,
            m,
            max_entry,
        }
    }

    /// Construct directly from entries (tests and small oracles).
    pub fn from_values(values: Vec<f64>, m: usize) -> Self {
        assert_eq!(values.len(), m * m, "gram matrix must be m x m");
        let max_entry = values.iter().copied().fold(0.0f64, f64::max);
        Self {
            values,
            m,
            max_entry,
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn max_entry(&self) -> f64 {
        self.max_entry
    }
}

/// Per-equation residuals `E_i = |sum_j D_ij alpha_i alpha_j - 1|` and
/// their sum.
pub fn compute_residual(d: &GramMatrix, alpha: &[f64]) -> (Vec<f64>, f64) {
    let g = mat_vec(d, alpha);
    let residuals: Vec<f64> = alpha
        .iter()
        .zip(&g)
        .map(|(&a, &gi)| (a * gi - 1.0).abs())
        .collect();
    let total = residuals.iter().sum();
    (residuals, total)
}

fn mat_vec(d: &GramMatrix, alpha: &[f64]) -> Vec<f64> {
    (0..d.size())
        .map(|i| d.row(i).iter().zip(alpha).map(|(&dij, &aj)| dij * aj).sum())
        .collect()
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct AlphaState {
    pub alpha: Vec<f64>,
    pub residuals: Vec<f64>,
    pub total_residual: f64,
    pub updates: u64,
    /// Largest `E_k` observed immediately after a coordinate update; the
    /// update solves its quadratic exactly, so this sits at the rounding
    /// floor (a few ulps).
    pub worst_post_update_residual: f64,
}

/// Recompute the maintained gradient this often to wash out incremental
/// floating-point drift.
const REFRESH_INTERVAL: usize = 4096;

/// Coordinate solver for `sum_j D_kj alpha_k alpha_j = 1`, `k = 1..m`.
///
/// Starts from `alpha_k = sqrt(1 / (Dmax m))` (or a caller-provided warm
/// start), then repeatedly zeroes the largest residual: with
/// `s = sum_{j != k} D_kj alpha_j` the equation for coordinate `k` is
/// `D_kk a^2 + s a = 1`, whose positive root is taken in the
/// cancellation-free form `2 / (s + sqrt(s^2 + 4 D_kk))`. All `D_kk` must
/// be positive; alphas stay positive throughout.
pub fn inner_solve(
    d: &GramMatrix,
    delta: f64,
    max_updates: u64,
    warm_start: Option<&[f64]>,
) -> Result<AlphaState> {
    let m = d.size();
    for k in 0..m {
        if !(d.entry(k, k) > 0.0) {
            return Err(Error::ZeroDiagonal { index: k });
        }
    }
    let mut alpha = match warm_start {
        Some(w) if w.len() == m && w.iter().all(|&a| a > 0.0 && a.is_finite()) => w.to_vec(),
        _ => vec![(1.0 / (d.max_entry() * m as f64)).sqrt(); m],
    };
    let mut g = mat_vec(d, &alpha);
    let mut updates: u64 = 0;
    let mut stale = 0usize;
    let mut worst_post = 0.0f64;

    loop {
        let mut total = 0.0f64;
        let mut k_max = 0usize;
        let mut e_max = -1.0f64;
        for i in 0..m {
            let e = (alpha[i] * g[i] - 1.0).abs();
            total += e;
            if e > e_max {
                e_max = e;
                k_max = i;
            }
        }

        if total <= delta {
            if stale > 0 {
                // Verify against a fresh recompute before accepting.
                g = mat_vec(d, &alpha);
                stale = 0;
                continue;
            }
            let residuals: Vec<f64> = alpha
                .iter()
                .zip(&g)
                .map(|(&a, &gi)| (a * gi - 1.0).abs())
                .collect();
            return Ok(AlphaState {
                alpha,
                residuals,
                total_residual: total,
                updates,
                worst_post_update_residual: worst_post,
            });
        }
        if updates >= max_updates {
            return Err(Error::InnerNonConvergence {
                residual: total,
                delta,
                updates,
            });
        }

        let k = k_max;
        let dkk = d.entry(k, k);
        let s = g[k] - dkk * alpha[k];
        let root = (s * s + 4.0 * dkk).sqrt();
        let mut new_alpha = 2.0 / (s + root);
        // One Newton step keeps the zeroed residual at the rounding floor.
        let res_at = |a: f64| a.mul_add(dkk.mul_add(a, s), -1.0);
        let r0 = res_at(new_alpha);
        let slope = 2.0 * dkk * new_alpha + s;
        if slope > 0.0 {
            let polished = new_alpha - r0 / slope;
            if polished > 0.0 && res_at(polished).abs() < r0.abs() {
                new_alpha = polished;
            }
        }
        debug_assert!(new_alpha > 0.0);
        worst_post = worst_post.max(res_at(new_alpha).abs());

        let step = new_alpha - alpha[k];
        alpha[k] = new_alpha;
        for (gi, &dik) in g.iter_mut().zip(d.row(k)) {
            *gi += step * dik;
        }
        updates += 1;
        stale += 1;
        if stale >= REFRESH_INTERVAL {
            g = mat_vec(d, &alpha);
            stale = 0;
        }
    }
}

/// `u = (r/m) sum_j alpha_j b_j`; nonnegative whenever alpha and b are.
pub fn recover_u(alpha: &[f64], b: &DesignMatrix, r: f64) -> Vec<f64> {
    let scale = r / b.sample_count() as f64;
    (0..b.window_count())
        .map(|k| {
            scale
                * b.row(k)
                    .iter()
                    .zip(alpha)
                    .map(|(&bkj, &aj)| bkj * aj)
                    .sum::<f64>()
        })
        .collect()
}

/// `v'_i = theta sqrt(u_i v_i)` with `theta = sqrt(r / sum u_i v_i)`, so
/// the rescaled weights satisfy `sum v'^2 = r` exactly.
pub fn rescale_v(u: &[f64], v: &[f64], r: f64) -> Result<Vec<f64>> {
    let uv: f64 = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
    if !(uv > 0.0) {
        return Err(Error::MassCollapse);
    }
    let theta = (r / uv).sqrt();
    Ok(u.iter()
        .zip(v)
        .map(|(&a, &b)| theta * (a * b).sqrt())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Stopped because `sum u_i v_i + eps >= r`.
    EpsilonTest,
    /// Outer budget exhausted before the test was met.
    Budget,
}

/// Iteration record of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub outer_iterations: usize,
    pub inner_updates_total: u64,
    pub final_inner_residual: f64,
    pub final_uv_sum: f64,
    /// `sum_i (u_i - v_i)^2` at exit; bounded by `2 eps` at a successful
    /// termination.
    pub final_uv_gap: f64,
    pub uv_sum_trace: Vec<f64>,
    pub inner_residual_trace: Vec<f64>,
    pub loglik_trace: Vec<f64>,
    pub terminated_by: Termination,
}

/// History depth for the extrapolated outer iteration.
const MIX_DEPTH: usize = 4;
/// Largest extrapolation correction allowed, as a multiple of the plain
/// update's length.
const EXTRAPOLATION_CAP: f64 = 200.0;
/// Iterations without a new best merit before a decay jump is attempted.
const STALL_LIMIT: usize = 25;
/// Base power for decay jumps.
const JUMP_BASE: f64 = 32.0;

/// Solve the regularized normal equations `(A^T A + lam I) x = A^T b` for a
/// small column set by Gaussian elimination with partial pivoting.
fn least_squares(cols: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    let mut ata = vec![0.0f64; k * k];
    let mut x = vec![0.0f64; k];
    for i in 0..k {
        for j in i..k {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, c)| a * c).sum();
            ata[i * k + j] = dot;
            ata[j * k + i] = dot;
        }
        x[i] = cols[i].iter().zip(b).map(|(a, c)| a * c).sum();
    }
    let scale = (0..k).map(|i| ata[i * k + i]).fold(0.0f64, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for i in 0..k {
        ata[i * k + i] += 1e-10 * scale;
    }
    for col in 0..k {
        let mut pivot = col;
        for row in col + 1..k {
            if ata[row * k + col].abs() > ata[pivot * k + col].abs() {
                pivot = row;
            }
        }
        if ata[pivot * k + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..k {
                ata.swap(col * k + c, pivot * k + c);
            }
            x.swap(col, pivot);
        }
        for row in col + 1..k {
            let f = ata[row * k + col] / ata[col * k + col];
            for c in col..k {
                ata[row * k + c] -= f * ata[col * k + c];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..k).rev() {
        x[col] /= ata[col * k + col];
        for row in 0..col {
            x[row] -= ata[row * k + col] * x[col];
        }
    }
    x.iter().all(|g| g.is_finite()).then_some(x)
}

/// Clamp to the nonnegative cone and renormalize onto the sphere
/// `sum v^2 = r`; `None` if nothing positive survives.
fn onto_sphere(mut v: Vec<f64>, r: f64) -> Option<Vec<f64>> {
    for x in v.iter_mut() {
        if !(*x >= 0.0) || !x.is_finite() {
            *x = 0.0;
        }
    }
    let norm: f64 = v.iter().map(|&x| x * x).sum();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let s = (r / norm).sqrt();
    for x in v.iter_mut() {
        *x *= s;
    }
    Some(v)
}

/// Extrapolate the weight iteration from its recent history (type-II
/// Anderson mixing on the update residuals). `None` means the caller
/// should fall back to the plain update.
fn mixed_candidate(
    hist_v: &[Vec<f64>],
    hist_g: &[Vec<f64>],
    v_plain: &[f64],
    r: f64,
) -> Option<Vec<f64>> {
    let h = hist_v.len();
    debug_assert!(h >= 2);
    let k = h - 1;
    let latest = &hist_g[h - 1];
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            hist_g[j + 1]
                .iter()
                .zip(&hist_g[j])
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let gamma = least_squares(&cols, latest)?;
    let mut correction = vec![0.0f64; v_plain.len()];
    for (j, &gj) in gamma.iter().enumerate() {
        for (i, c) in correction.iter_mut().enumerate() {
            let dv = hist_v[j + 1][i] - hist_v[j][i];
            *c += gj * (dv + cols[j][i]);
        }
    }
    let g_norm: f64 = latest.iter().map(|&x| x * x).sum::<f64>().sqrt();
    let c_norm: f64 = correction.iter().map(|&x| x * x).sum::<f64>().sqrt();
    if !c_norm.is_finite() {
        return None;
    }
    let shrink = if c_norm > EXTRAPOLATION_CAP * g_norm {
        EXTRAPOLATION_CAP * g_norm / c_norm
    } else {
        1.0
    };
    let cand: Vec<f64> = v_plain
        .iter()
        .zip(&correction)
        .map(|(&p, &c)| p - shrink * c)
        .collect();
    onto_sphere(cand, r)
}

/// Jump the decaying weights ahead: a component whose best-response ratio
/// `u_i / v_i` is below one shrinks geometrically under the plain update,
/// so applying `weight` extra powers of its own observed ratio replays
/// that many future rescales at once. Components holding their own are
/// left at the plain update, keeping the fixed points intact.
fn decay_jump(u: &[f64], v: &[f64], v_plain: &[f64], weight: f64, r: f64) -> Option<Vec<f64>> {
    let cand: Vec<f64> = v_plain
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&p, (&ui, &vi))| {
            if !(vi > 0.0) {
                return p;
            }
            let ratio = ui / vi;
            if ratio < 1.0 {
                p * ratio.powf(weight)
            } else {
                p
            }
        })
        .collect();
    onto_sphere(cand, r)
}

/// Full outer iteration. Returns the coefficients `c_i = u_i v_i` at
/// termination and the iteration record. Coverage must hold for the basis
/// and samples (checked upstream; a zero design column aborts here).
///
/// Each iteration performs one u-solve against the current weights and
/// checks the termination test; the weights then advance by the geometric-
/// mean rescale. With acceleration enabled the rescale sequence is
/// extrapolated from its own recent iterates, and a stalled run jumps its
/// decaying components ahead by powers of their observed contraction
/// ratios. Both moves are safeguarded: a candidate that noticeably
/// regresses the `sum u v` merit or breaks sample coverage is abandoned
/// for the plain update.
pub fn outer_fit(
    basis: &WindowBasis,
    samples: &[f64],
    config: &SolverConfig,
) -> Result<(Vec<f64>, FitReport)> {
    config.validate()?;
    let m = samples.len();
    if m == 0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let n = basis.window_count();
    let r = config.r;
    let delta = config.resolved_delta(m);
    let accelerate = config.accelerate_outer;

    // Window values are fixed across outer iterations; only the row
    // weights v change.
    let mut phi = vec![0.0f64; n * m];
    for i in 0..n {
        for (j, &x) in samples.iter().enumerate() {
            phi[i * m + j] = basis.eval(i, x);
        }
    }

    let mut v = vec![(r / n as f64).sqrt(); n];
    let mut warm: Option<Vec<f64>> = None;
    let mut report = FitReport {
        outer_iterations: 0,
        inner_updates_total: 0,
        final_inner_residual: f64::NAN,
        final_uv_sum: f64::NAN,
        final_uv_gap: f64::NAN,
        uv_sum_trace: Vec::new(),
        inner_residual_trace: Vec::new(),
        loglik_trace: Vec::new(),
        terminated_by: Termination::Budget,
    };
    let mut hist_v: Vec<Vec<f64>> = Vec::new();
    let mut hist_g: Vec<Vec<f64>> = Vec::new();
    let mut best_uv = f64::NEG_INFINITY;
    // Plain steps still owed after a bad candidate, so the history refills
    // with on-path points before the next extrapolation.
    let mut cooldown: usize = 0;
    // Iterations since the merit last improved, and the number of decay
    // jumps attempted at the current level.
    let mut stall: usize = 0;
    let mut jump_level: u32 = 0;

    let mut design =
        DesignMatrix::from_scaled_rows(&phi, n, m, &v).map_err(|cause| Error::SolverFailed {
            outer: 1,
            cause: Box::new(cause),
            report: Box::new(report.clone()),
        })?;

    for outer in 1..=config.max_outer {
        let d = GramMatrix::build(&design, r);
        let state =
            inner_solve(&d, delta, config.max_inner_updates, warm.as_deref()).map_err(|cause| {
                Error::SolverFailed {
                    outer,
                    cause: Box::new(cause),
                    report: Box::new(report.clone()),
                }
            })?;
        let u = recover_u(&state.alpha, &design, r);

        let uv_sum: f64 = u.iter().zip(&v).map(|(&a, &b)| a * b).sum();
        let loglik: f64 = (0..m)
            .map(|j| {
                let fj: f64 = (0..n).map(|i| u[i] * design.value(i, j)).sum();
                fj.ln()
            })
            .sum();
        report.outer_iterations = outer;
        report.inner_updates_total += state.updates;
        report.final_inner_residual = state.total_residual;
        report.uv_sum_trace.push(uv_sum);
        report.inner_residual_trace.push(state.total_residual);
        report.loglik_trace.push(loglik);

        // Two exact-arithmetic invariants are reified under inexact inner
        // solves: `sum uv <= r` keeps the coefficient total from exceeding
        // r, and the threshold is raised by half the inner-residual slack
        // on `sum u^2` so that `sum (u - v)^2 <= 2 eps` holds at exit.
        let slack = 0.5 * r * delta / m as f64;
        let converged = uv_sum + config.eps_outer >= r + slack && uv_sum <= r;
        if converged || outer == config.max_outer {
            report.final_uv_sum = uv_sum;
            report.final_uv_gap = u.iter().zip(&v).map(|(&a, &b)| (a - b) * (a - b)).sum();
            report.terminated_by = if converged {
                Termination::EpsilonTest
            } else {
                Termination::Budget
            };
            let c = u.iter().zip(&v).map(|(&a, &b)| a * b).collect();
            return Ok((c, report));
        }

        let v_plain = rescale_v(&u, &v, r).map_err(|cause| Error::SolverFailed {
            outer,
            cause: Box::new(cause),
            report: Box::new(report.clone()),
        })?;

        let next_v = if !accelerate {
            v_plain.clone()
        } else if uv_sum < best_uv - 3.0 * (r - best_uv) {
            // The last candidate regressed badly: drop the stale history
            // and recover with plain steps. Mild non-monotonicity is left
            // alone; extrapolation usually recovers it within a step.
            hist_v.clear();
            hist_g.clear();
            cooldown = 2;
            stall = 0;
            v_plain.clone()
        } else {
            if uv_sum > best_uv {
                best_uv = uv_sum;
                stall = 0;
                jump_level = 0;
            } else {
                stall += 1;
            }
            let g: Vec<f64> = v_plain.iter().zip(&v).map(|(a, b)| a - b).collect();
            hist_v.push(v.clone());
            hist_g.push(g);
            if hist_v.len() > MIX_DEPTH + 1 {
                hist_v.remove(0);
                hist_g.remove(0);
            }
            if cooldown > 0 {
                cooldown -= 1;
                v_plain.clone()
            } else if stall >= STALL_LIMIT {
                // Extrapolation alone has stopped helping; replay many
                // future rescales of the decaying components in one move.
                stall = 0;
                let weight = JUMP_BASE * f64::from(1u32 << jump_level.min(15));
                jump_level += 1;
                hist_v.clear();
                hist_g.clear();
                decay_jump(&u, &v, &v_plain, weight, r).unwrap_or_else(|| v_plain.clone())
            } else if hist_v.len() >= 2 {
                mixed_candidate(&hist_v, &hist_g, &v_plain, r).unwrap_or_else(|| v_plain.clone())
            } else {
                v_plain.clone()
            }
        };

        // An extrapolated candidate may zero out every window covering some
        // sample; in that case fall back to the plain update, which keeps
        // coverage by construction.
        match DesignMatrix::from_scaled_rows(&phi, n, m, &next_v) {
            Ok(b) => {
                design = b;
                v = next_v;
            }
            Err(cause) => {
                hist_v.clear();
                hist_g.clear();
                cooldown = 2;
                design = DesignMatrix::from_scaled_rows(&phi, n, m, &v_plain).map_err(|_| {
                    Error::SolverFailed {
                        outer,
                        cause: Box::new(cause),
                        report: Box::new(report.clone()),
                    }
                })?;
                v = v_plain;
            }
        }
        warm = Some(state.alpha);
    }
    unreachable!("loop returns at the budget boundary");
}
