//! The transport semigroup and its asymptotics.
//!
//! The flow on a network with unit velocities advances mass along each edge
//! and redistributes it at vertices according to the weighted junction
//! operator `B`.  Writing `t = n + τ` with `n = ⌊t⌋`, the action on an edge
//! profile `f` is
//!
//! ```text
//! (T(t) f)(s) = Bⁿ   f(s + τ)      for s ∈ [0, 1 − τ),
//! (T(t) f)(s) = Bⁿ⁺¹ f(s + τ − 1)  for s ∈ [1 − τ, 1),
//! ```
//!
//! which this module evaluates exactly on step profiles.  On top of it sit
//! the asymptotic diagnostics: the periodicity defect `‖T(t)(I − P)‖`, the
//! defect-slope report, the resolvent of the generator via the truncated
//! Laplace series, and an a-posteriori eigenflow check for peripheral modes.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::operator::{mat_mul_exact, ColumnStochasticOperator, SparseVec};
use crate::ratio::{format_ratio, split_time, to_f64, Q};
use crate::spectral::{one_norm, SpectralDecomposition};
use crate::step::EdgeStepFunction;

/// Defects at or below this threshold are treated as exactly converged when
/// fitting decay slopes.
pub const DEFECT_FLOOR: f64 = 1e-12;

/// Slack allowed between the fitted defect slope and `log ρ`.
pub const SLOPE_SLACK: f64 = 0.05;

/// Hard cap on Laplace-series terms in [`resolvent`].
const MAX_RESOLVENT_TERMS: usize = 2_000_000;

/// Relative residual above which a proposed peripheral pair is rejected.
const EIGENPAIR_RESIDUAL_TOL: f64 = 1e-10;

/// Evaluates `T(t) f` exactly.
///
/// The result is again a step profile: breakpoints are shifted by the
/// fractional part of `t` and values are hit by the appropriate power of the
/// junction operator.
pub fn evaluate_t(
    op: &ColumnStochasticOperator,
    t: &Q,
    f: &EdgeStepFunction,
) -> Result<EdgeStepFunction, Error> {
    if f.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: f.dim() });
    }
    let (n, tau) = split_time(t)?;
    let (breaks, sections) = f.global_sections();
    let lower: Vec<SparseVec> = sections
        .iter()
        .map(|s| op.apply_power(s, n))
        .collect::<Result<_, _>>()?;
    if tau.is_zero() {
        return EdgeStepFunction::from_global_sections(op.dim(), breaks, lower);
    }
    let upper: Vec<SparseVec> = lower
        .iter()
        .map(|s| op.apply(s))
        .collect::<Result<_, _>>()?;

    let one = Q::one();
    let mut new_breaks = Vec::with_capacity(breaks.len() + 1);
    let mut new_sections = Vec::with_capacity(sections.len() + 1);
    // Cells of f inside [τ, 1) slide left onto [0, 1 − τ) and take Bⁿ.
    for (idx, w) in breaks.windows(2).enumerate() {
        let lo = if w[0] < tau { &tau } else { &w[0] };
        if lo < &w[1] {
            new_breaks.push(lo - &tau);
            new_sections.push(lower[idx].clone());
        }
    }
    // Cells of f inside [0, τ) wrap onto [1 − τ, 1) and take Bⁿ⁺¹.
    for (idx, w) in breaks.windows(2).enumerate() {
        let hi = if w[1] > tau { &tau } else { &w[1] };
        if &w[0] < hi {
            new_breaks.push(&w[0] + (&one - &tau));
            new_sections.push(upper[idx].clone());
        }
    }
    new_breaks.push(one);
    EdgeStepFunction::from_global_sections(op.dim(), new_breaks, new_sections)
}

/// The periodicity defect `max(‖Bⁿ(I − P)‖₁, ‖Bⁿ⁺¹(I − P)‖₁)` at `t` with
/// `n = ⌊t⌋`.
///
/// The two matrix powers bracket the operator norm of `T(t)(I − P)` on the
/// `L¹` state space, so this quantity decays like `ρᵗ` exactly when the flow
/// is asymptotically periodic with subdominant modulus `ρ`.  Matrix powers
/// are carried exactly and floated only for the final norm.
pub fn defect(
    op: &ColumnStochasticOperator,
    projection: &DMatrix<f64>,
    t: &Q,
) -> Result<f64, Error> {
    Ok(defect_series(op, projection, std::slice::from_ref(t))?[0])
}

/// Evaluates [`defect`] on many times while sharing the power iteration.
pub fn defect_series(
    op: &ColumnStochasticOperator,
    projection: &DMatrix<f64>,
    times: &[Q],
) -> Result<Vec<f64>, Error> {
    let dim = op.dim();
    if projection.nrows() != dim || projection.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: projection.nrows() });
    }
    let mut floors = Vec::with_capacity(times.len());
    let mut n_max = 0;
    for t in times {
        let (n, _) = split_time(t)?;
        floors.push(n);
        n_max = n_max.max(n + 1);
    }
    let complement = DMatrix::<f64>::identity(dim, dim) - projection;
    let dense = op.to_dense();
    let mut power = crate::operator::identity_dense(dim);
    let mut norms = Vec::with_capacity(n_max + 1);
    for step in 0..=n_max {
        if step > 0 {
            power = mat_mul_exact(&dense, &power);
        }
        let float = DMatrix::from_fn(dim, dim, |i, j| to_f64(&power[i][j]));
        norms.push(one_norm(&(float * &complement)));
    }
    Ok(floors.iter().map(|&n| norms[n].max(norms[n + 1])).collect())
}

/// One sampled point of a defect trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicitySample {
    /// Sample time.
    pub t: f64,
    /// Defect `max(‖Bⁿ(I − P)‖₁, ‖Bⁿ⁺¹(I − P)‖₁)`.
    pub defect: f64,
}

/// Summary of how closely a flow follows its predicted asymptotic period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicityReport {
    /// Asymptotic period (the imprimitivity index for unit velocities).
    pub theta: usize,
    /// Estimated subdominant spectral modulus.
    pub rho: f64,
    /// Sampled defect trace.
    pub samples: Vec<PeriodicitySample>,
    /// Least-squares slope of `ln defect` over the second half of the trace;
    /// `None` when the defect has already collapsed below [`DEFECT_FLOOR`].
    pub fitted_rate: Option<f64>,
    /// Whether the observed decay is at least as fast as `ρᵗ`, up to
    /// [`SLOPE_SLACK`] in the exponent.
    pub passes: bool,
}

/// Samples the periodicity defect and fits its decay rate.
///
/// With no explicit grid the defect is sampled at the multiples of the period
/// `θ` up to `t_max`.  The slope is fitted on the second half of the samples
/// so that transient behaviour does not pollute the asymptotic rate.
pub fn periodicity_report(
    op: &ColumnStochasticOperator,
    decomposition: &SpectralDecomposition,
    t_max: usize,
    grid: Option<&[Q]>,
) -> Result<PeriodicityReport, Error> {
    let theta = decomposition.k;
    let default_grid: Vec<Q>;
    let grid = match grid {
        Some(g) if !g.is_empty() => g,
        _ => {
            let last = t_max.max(theta);
            default_grid = (1..)
                .map(|m| Q::from_integer((m * theta).into()))
                .take_while(|t| *t <= Q::from_integer(last.into()))
                .collect();
            &default_grid
        }
    };
    let defects = defect_series(op, &decomposition.projection, grid)?;
    let samples: Vec<PeriodicitySample> = grid
        .iter()
        .zip(&defects)
        .map(|(t, &d)| PeriodicitySample { t: to_f64(t), defect: d })
        .collect();

    let half = samples.len() / 2;
    let tail: Vec<(f64, f64)> = samples[half..]
        .iter()
        .filter(|s| s.defect > DEFECT_FLOOR)
        .map(|s| (s.t, s.defect.ln()))
        .collect();
    let fitted_rate = fit_slope(&tail);
    let converged = samples.last().map_or(true, |s| s.defect <= 1e-8);
    let passes = match fitted_rate {
        // Exact collapse (finite-dimensional peripheral part reached).
        None => converged,
        Some(slope) => {
            if decomposition.rho > 0.0 {
                slope <= decomposition.rho.ln() + SLOPE_SLACK
            } else {
                converged
            }
        }
    };
    Ok(PeriodicityReport { theta, rho: decomposition.rho, samples, fitted_rate, passes })
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two points
/// or a degenerate abscissa.
fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Some(sxy / sxx)
}

/// One row of a simulated trajectory trace.
#[derive(Debug, Clone)]
pub struct SeriesRow {
    /// Sample time.
    pub t: Q,
    /// `‖T(t) f‖` in `L¹`.
    pub l1: f64,
    /// `‖T(t) f‖` in `L∞(ℓ¹)`.
    pub linf: f64,
    /// Operator defect at `t` (see [`defect`]).
    pub defect: f64,
    /// `‖T(t + θ) f − T(t) f‖₁`: how far the trajectory is from `θ`-periodic.
    pub theta_residual: f64,
}

/// Evaluates a trajectory on a time grid, reporting norms and periodicity
/// residuals per sample.  All function-space computations are exact; values
/// are floated only for the row.
pub fn simulation_series(
    op: &ColumnStochasticOperator,
    decomposition: &SpectralDecomposition,
    f: &EdgeStepFunction,
    times: &[Q],
) -> Result<Vec<SeriesRow>, Error> {
    let theta = Q::from_integer(decomposition.k.into());
    let defects = defect_series(op, &decomposition.projection, times)?;
    let mut rows = Vec::with_capacity(times.len());
    for (t, &d) in times.iter().zip(&defects) {
        let now = evaluate_t(op, t, f)?;
        let later = evaluate_t(op, &(t + &theta), f)?;
        let residual = later.sub(&now)?.l1_norm();
        rows.push(SeriesRow {
            t: t.clone(),
            l1: to_f64(&now.l1_norm()),
            linf: to_f64(&now.linf_norm()),
            defect: d,
            theta_residual: to_f64(&residual),
        });
    }
    Ok(rows)
}

/// The resolvent `R(λ) f` of the flow generator, sampled on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventOutput {
    /// Spectral parameter (real, `λ > 0`).
    pub lambda: f64,
    /// Terms kept in the truncated Laplace series.
    pub n_terms: usize,
    /// Rigorous bound on the truncation error in `L¹`.
    pub tail_bound: f64,
    /// Grid points `s` on `[0, 1]`.
    pub grid: Vec<f64>,
    /// `values[i][j]` is the `j`-th edge component of `(R(λ) f)(sᵢ)`.
    pub values: Vec<Vec<f64>>,
}

/// Evaluates the resolvent `R(λ) f = ∫₀^∞ e^{−λt} T(t) f dt` for real `λ > 0`.
///
/// Unfolding the flow lap by lap gives the closed form
///
/// ```text
/// (R(λ) f)(s) = e^{−λ(1−s)} Σ_{m≥0} e^{−λm} Bᵐ (B g)  +  ∫_s^1 e^{λ(s−u)} f(u) du,
/// g = ∫₀¹ e^{−λu} f(u) du,
/// ```
///
/// and the series is truncated once its geometric tail drops below `tol`.
pub fn resolvent(
    op: &ColumnStochasticOperator,
    lambda: f64,
    f: &EdgeStepFunction,
    grid: &[Q],
    tol: f64,
) -> Result<ResolventOutput, Error> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda { lambda });
    }
    let dim = op.dim();
    if f.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
    }
    for s in grid {
        if s.is_negative() || *s > Q::one() {
            return Err(Error::MalformedTestFunction {
                reason: format!("resolvent grid point {} outside [0, 1]", format_ratio(s)),
            });
        }
    }

    // g = ∫₀¹ e^{−λu} f(u) du, cell by cell in closed form.
    let mut g = DVector::<f64>::zeros(dim);
    for j in f.active_edges() {
        let component = f.component(j).expect("active edge has a component");
        let mut total = 0.0;
        for (a, b, v) in component.cells() {
            let (a, b) = (to_f64(a), to_f64(b));
            total += to_f64(v) * ((-lambda * a).exp() - (-lambda * b).exp()) / lambda;
        }
        g[j] = total;
    }
    let dense = op.to_dense_f64();
    let bg = &dense * g;
    let bg_norm: f64 = bg.iter().map(|x| x.abs()).sum();
    let denom = 1.0 - (-lambda).exp();

    // Smallest N with e^{−λN} ‖Bg‖₁ / (1 − e^{−λ}) < tol.
    let n_terms = if bg_norm == 0.0 {
        0
    } else {
        let raw = ((bg_norm / (denom * tol)).ln() / lambda).ceil();
        let n = if raw.is_finite() && raw > 0.0 { raw as usize } else { 1 };
        if n > MAX_RESOLVENT_TERMS {
            return Err(Error::NonConvergence {
                iterations: MAX_RESOLVENT_TERMS,
                residual: (-lambda * MAX_RESOLVENT_TERMS as f64).exp() * bg_norm / denom,
            });
        }
        n.max(1)
    };
    let tail_bound = if bg_norm == 0.0 {
        0.0
    } else {
        (-lambda * n_terms as f64).exp() * bg_norm / denom
    };

    let mut series = DVector::<f64>::zeros(dim);
    let mut term = bg;
    for m in 0..n_terms {
        series.axpy((-lambda * m as f64).exp(), &term, 1.0);
        if m + 1 < n_terms {
            term = &dense * term;
        }
    }

    let mut values = Vec::with_capacity(grid.len());
    for s in grid {
        let s_f = to_f64(s);
        let prefactor = (-lambda * (1.0 - s_f)).exp();
        let mut row: Vec<f64> = (0..dim).map(|j| prefactor * series[j]).collect();
        for j in f.active_edges() {
            let component = f.component(j).expect("active edge has a component");
            let mut local = 0.0;
            for (a, b, v) in component.cells() {
                if *b <= *s {
                    continue;
                }
                let lo = if *a < *s { s_f } else { to_f64(a) };
                let b_f = to_f64(b);
                local += to_f64(v) * ((lambda * (s_f - lo)).exp() - (lambda * (s_f - b_f)).exp())
                    / lambda;
            }
            row[j] += local;
        }
        values.push(row);
    }
    Ok(ResolventOutput {
        lambda,
        n_terms,
        tail_bound,
        grid: grid.iter().map(to_f64).collect(),
        values,
    })
}

/// Outcome of checking a peripheral eigenpair against the actual flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenflowReport {
    /// Real part of the generator eigenvalue `λ`.
    pub lambda_re: f64,
    /// Imaginary part of `λ`.
    pub lambda_im: f64,
    /// Relative `L¹` deviation `‖T(t) f − e^{λt} f‖₁ / ‖f‖₁` for the sampled
    /// eigenprofile `f(s) = e^{λs} v`.
    pub deviation: f64,
    /// A-priori bound on the deviation caused by step sampling alone.
    pub bound: f64,
    /// Sampling cell width.
    pub grid_step: f64,
    /// Whether the deviation stays within the sampling bound.
    pub ok: bool,
}

/// Verifies that `f(s) = e^{λs} v` behaves as an eigenflow: `T(t) f = e^{λt} f`.
///
/// Requires `B v = e^λ v` up to a small relative residual (otherwise
/// [`Error::NotAnEigenpair`]).  The profile is sampled on `cells` uniform
/// cells, pushed through the exact flow, and compared with `e^{λt} f` in
/// `L¹`.  The reported bound `2 (e^{h|λ|} − 1) e^{|min(0, Re λ)|}` accounts
/// for the sampling error, so `deviation ≤ bound` confirms the eigenrelation
/// up to discretization.
pub fn eigenflow_check(
    op: &ColumnStochasticOperator,
    lambda: (f64, f64),
    v: &[(f64, f64)],
    t: &Q,
    cells: usize,
) -> Result<EigenflowReport, Error> {
    let dim = op.dim();
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    if cells == 0 {
        return Err(Error::MalformedTestFunction { reason: "need at least one sampling cell".into() });
    }
    let (lre, lim) = lambda;

    // Precondition: (e^λ, v) is an eigenpair of B.
    let mu = ((lre).exp() * lim.cos(), (lre).exp() * lim.sin());
    let dense = op.to_dense_f64();
    let mut residual = 0.0;
    let mut v_norm = 0.0;
    for i in 0..dim {
        let mut bv = (0.0, 0.0);
        for j in 0..dim {
            let b = dense[(i, j)];
            bv.0 += b * v[j].0;
            bv.1 += b * v[j].1;
        }
        let target = (mu.0 * v[i].0 - mu.1 * v[i].1, mu.0 * v[i].1 + mu.1 * v[i].0);
        residual += ((bv.0 - target.0).powi(2) + (bv.1 - target.1).powi(2)).sqrt();
        v_norm += (v[i].0.powi(2) + v[i].1.powi(2)).sqrt();
    }
    if v_norm == 0.0 {
        return Err(Error::NotAnEigenpair { residual: f64::INFINITY });
    }
    residual /= v_norm;
    if residual > EIGENPAIR_RESIDUAL_TOL {
        return Err(Error::NotAnEigenpair { residual });
    }

    // Left-endpoint step sampling of f(s) = e^{λs} v, in exact coordinates.
    let cells_q = Q::from_integer((cells as i64).into());
    let breaks: Vec<Q> = (0..=cells)
        .map(|i| Q::from_integer((i as i64).into()) / &cells_q)
        .collect();
    let mut f_re = EdgeStepFunction::zero(dim);
    let mut f_im = EdgeStepFunction::zero(dim);
    let samples: Vec<(f64, f64)> = (0..cells)
        .map(|i| {
            let a = i as f64 / cells as f64;
            ((lre * a).exp() * (lim * a).cos(), (lre * a).exp() * (lim * a).sin())
        })
        .collect();
    for (j, &(vre, vim)) in v.iter().enumerate() {
        let re_vals: Vec<Q> = samples
            .iter()
            .map(|&(er, ei)| exact_from_f64(er * vre - ei * vim))
            .collect();
        let im_vals: Vec<Q> = samples
            .iter()
            .map(|&(er, ei)| exact_from_f64(er * vim + ei * vre))
            .collect();
        f_re.set_component(j, crate::step::StepFunction::new(breaks.clone(), re_vals)?)?;
        f_im.set_component(j, crate::step::StepFunction::new(breaks.clone(), im_vals)?)?;
    }

    let u_re = evaluate_t(op, t, &f_re)?;
    let u_im = evaluate_t(op, t, &f_im)?;

    // e^{λt}
    let t_f = to_f64(t);
    let scale = (lre * t_f).exp();
    let c = (scale * (lim * t_f).cos(), scale * (lim * t_f).sin());

    // Merge partitions and accumulate the complex L¹ norms in float.
    let mut merged: Vec<Q> = Vec::new();
    for part in [&u_re, &u_im, &f_re, &f_im] {
        let (b, _) = part.global_sections();
        merged.extend(b);
    }
    merged.sort();
    merged.dedup();
    let mut num = 0.0;
    let mut den = 0.0;
    for w in merged.windows(2) {
        let width = to_f64(&(&w[1] - &w[0]));
        let pt = &w[0];
        let tr = u_re.section_at(pt)?;
        let ti = u_im.section_at(pt)?;
        let fr = f_re.section_at(pt)?;
        let fi = f_im.section_at(pt)?;
        for j in 0..dim {
            let f_val = (to_f64(&fr.get(j)), to_f64(&fi.get(j)));
            let t_val = (to_f64(&tr.get(j)), to_f64(&ti.get(j)));
            let target = (c.0 * f_val.0 - c.1 * f_val.1, c.0 * f_val.1 + c.1 * f_val.0);
            num += width * ((t_val.0 - target.0).powi(2) + (t_val.1 - target.1).powi(2)).sqrt();
            den += width * (f_val.0.powi(2) + f_val.1.powi(2)).sqrt();
        }
    }
    let deviation = num / den;
    let h = 1.0 / cells as f64;
    let modulus = lre.hypot(lim);
    let bound = 2.0 * ((h * modulus).exp() - 1.0) * (lre.min(0.0)).abs().exp();
    Ok(EigenflowReport {
        lambda_re: lre,
        lambda_im: lim,
        deviation,
        bound,
        grid_step: h,
        ok: deviation <= bound,
    })
}

/// Exact rational value of a finite float.
fn exact_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cycle3, g2, g3};
    use crate::graph::build_operators;
    use crate::ratio::{q, qi};
    use crate::spectral::spectral_projection;
    use crate::step::StepFunction;

    fn op_of(spec: &crate::graph::GraphSpec) -> ColumnStochasticOperator {
        build_operators(spec).unwrap().1
    }

    fn indicator(dim: usize, edge: usize) -> EdgeStepFunction {
        EdgeStepFunction::zero(dim)
            .with_component(edge, StepFunction::constant(qi(1)))
            .unwrap()
    }

    #[test]
    fn unit_time_applies_the_junction_operator() {
        let op = op_of(&g3());
        let f = indicator(4, 0);
        let moved = evaluate_t(&op, &qi(1), &f).unwrap();
        // Column 0 of B feeds edges 1 and 2 with weight 1/2 each.
        assert!(moved.component(0).is_none());
        assert_eq!(moved.component(1).unwrap(), &StepFunction::constant(q(1, 2)));
        assert_eq!(moved.component(2).unwrap(), &StepFunction::constant(q(1, 2)));
    }

    #[test]
    fn fractional_time_splits_the_interval() {
        let op = op_of(&g2());
        let f = indicator(2, 0);
        let moved = evaluate_t(&op, &q(1, 3), &f).unwrap();
        // [0, 2/3) still reads edge 0; [2/3, 1) wrapped through B onto edge 1.
        let c0 = moved.component(0).unwrap();
        assert_eq!(c0.breaks(), &[qi(0), q(2, 3), qi(1)]);
        assert_eq!(c0.values(), &[qi(1), qi(0)]);
        let c1 = moved.component(1).unwrap();
        assert_eq!(c1.breaks(), &[qi(0), q(2, 3), qi(1)]);
        assert_eq!(c1.values(), &[qi(0), qi(1)]);
    }

    #[test]
    fn semigroup_law_holds_exactly() {
        let op = op_of(&g3());
        let f = EdgeStepFunction::zero(4)
            .with_component(0, StepFunction::new(vec![qi(0), q(1, 4), qi(1)], vec![qi(2), q(-1, 3)]).unwrap())
            .unwrap()
            .with_component(3, StepFunction::new(vec![qi(0), q(2, 5), qi(1)], vec![q(1, 7), qi(0)]).unwrap())
            .unwrap();
        for (s, t) in [(q(1, 2), q(5, 3)), (q(7, 4), q(3, 8)), (qi(2), q(1, 6))] {
            let direct = evaluate_t(&op, &(&s + &t), &f).unwrap();
            let staged = evaluate_t(&op, &s, &evaluate_t(&op, &t, &f).unwrap()).unwrap();
            assert_eq!(direct, staged);
        }
    }

    #[test]
    fn positive_mass_is_transported_isometrically() {
        let op = op_of(&g3());
        let f = EdgeStepFunction::zero(4)
            .with_component(1, StepFunction::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(3), q(1, 5)]).unwrap())
            .unwrap();
        let mass = f.l1_norm();
        for t in [q(1, 3), qi(2), q(17, 6)] {
            assert_eq!(evaluate_t(&op, &t, &f).unwrap().l1_norm(), mass);
        }
        // Signed data can only lose mass.
        let signed = EdgeStepFunction::zero(4)
            .with_component(1, StepFunction::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(1), qi(-1)]).unwrap())
            .unwrap();
        let norm = signed.l1_norm();
        for t in [qi(1), q(5, 2), qi(4)] {
            assert!(evaluate_t(&op, &t, &signed).unwrap().l1_norm() <= norm);
        }
    }

    #[test]
    fn rejects_negative_time_and_dimension_mismatch() {
        let op = op_of(&g2());
        let f = indicator(2, 0);
        assert!(matches!(evaluate_t(&op, &q(-1, 2), &f), Err(Error::NegativeTime { .. })));
        let wrong = indicator(3, 0);
        assert!(matches!(
            evaluate_t(&op, &qi(1), &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn defect_vanishes_for_a_periodic_junction() {
        let op = op_of(&g2());
        let decomp = spectral_projection(&op, 1e-10, 200_000).unwrap();
        for t in [qi(0), qi(1), q(7, 2)] {
            assert!(defect(&op, &decomp.projection, &t).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn defect_trace_matches_expected_values() {
        let op = op_of(&g3());
        let decomp = spectral_projection(&op, 1e-10, 200_000).unwrap();
        let times: Vec<Q> = (1..=8).map(qi).collect();
        let expected = [1.6, 1.2, 1.2, 0.8, 0.4, 0.3, 0.3, 0.2];
        let got = defect_series(&op, &decomp.projection, &times).unwrap();
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-6, "defect {g} vs expected {e}");
        }
    }

    #[test]
    fn fitted_decay_rate_matches_the_spectral_gap() {
        let op = op_of(&g3());
        let decomp = spectral_projection(&op, 1e-10, 200_000).unwrap();
        let report = periodicity_report(&op, &decomp, 50, None).unwrap();
        assert_eq!(report.theta, 1);
        let slope = report.fitted_rate.expect("defect stays positive");
        let expected = (0.5f64).sqrt().ln();
        assert!((slope - expected).abs() < 0.05, "slope {slope} vs {expected}");
        assert!(report.passes);
    }

    #[test]
    fn series_rows_report_periodic_convergence() {
        let op = op_of(&g3());
        let decomp = spectral_projection(&op, 1e-10, 200_000).unwrap();
        let f = indicator(4, 0);
        let times: Vec<Q> = (0..=12).map(qi).collect();
        let rows = simulation_series(&op, &decomp, &f, &times).unwrap();
        assert_eq!(rows.len(), 13);
        for row in &rows {
            assert!((row.l1 - 1.0).abs() < 1e-12, "positive mass is conserved");
            assert!(row.linf >= row.l1 - 1e-12);
        }
        // With θ = 1 the residual decays along the trace.
        assert!(rows.last().unwrap().theta_residual < 0.05 * rows[0].theta_residual.max(1e-30) + 1e-9);
    }

    #[test]
    fn resolvent_fixes_perron_data() {
        // f ≡ u with B u = u collapses the resolvent to u / λ.
        let op = op_of(&g3());
        let u = [q(2, 5), q(1, 5), q(1, 5), q(1, 5)];
        let mut f = EdgeStepFunction::zero(4);
        for (j, val) in u.iter().enumerate() {
            f.set_component(j, StepFunction::constant(val.clone())).unwrap();
        }
        let grid: Vec<Q> = vec![qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)];
        for lambda in [0.35, 1.0, 2.5] {
            let out = resolvent(&op, lambda, &f, &grid, 1e-12).unwrap();
            assert!(out.tail_bound < 1e-12);
            for row in &out.values {
                for (j, val) in u.iter().enumerate() {
                    assert!((row[j] - to_f64(val) / lambda).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn resolvent_rejects_bad_lambda() {
        let op = op_of(&g2());
        let f = indicator(2, 0);
        for lambda in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                resolvent(&op, lambda, &f, &[qi(0)], 1e-8),
                Err(Error::NonPositiveLambda { .. })
            ));
        }
    }

    #[test]
    fn cycle_eigenflow_passes_the_check() {
        let op = op_of(&cycle3());
        let theta = 2.0 * std::f64::consts::PI / 3.0;
        let lambda = (0.0, theta);
        // v = (1, ω̄, ω̄²) with ω = e^{iθ} satisfies B v = ω v.
        let v = [
            (1.0, 0.0),
            (theta.cos(), -theta.sin()),
            ((2.0 * theta).cos(), -(2.0 * theta).sin()),
        ];
        let report = eigenflow_check(&op, lambda, &v, &q(5, 4), 256).unwrap();
        assert!(report.ok, "deviation {} vs bound {}", report.deviation, report.bound);
        assert!(report.deviation < report.bound);
        assert!(report.bound < 0.02);
    }

    #[test]
    fn eigenflow_check_rejects_non_eigenpairs() {
        let op = op_of(&cycle3());
        let v = [(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
        assert!(matches!(
            eigenflow_check(&op, (0.0, 1.0), &v, &qi(1), 64),
            Err(Error::NotAnEigenpair { .. })
        ));
    }
}
