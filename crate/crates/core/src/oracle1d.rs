//! Ground-truth engine for one-dimensional densities.
//!
//! In 1-D the advection problem `p − q = −(q u′)′` with vanishing flux at
//! both ends integrates in closed form to `q(x) u′(x) = −(F_p(x) − F_q(x))`,
//! so the Sobolev discrepancy is an explicit quadrature over the CDF gap,
//! and the Wasserstein-2 distance reduces to the L₂ distance between
//! quantile functions. Together they give exact references for the sandwich
//! `√(a/b)·S ≤ W₂ ≤ 2S` that bracket the kernelized estimates.

use crate::error::{Error, Result};
use crate::util::{cumulative_trapezoid, trapezoid};

/// Absolute slack applied to both sides of the W₂ sandwich check.
pub const SANDWICH_TOL: f64 = 1e-4;

/// A pair of tabulated densities on a shared 1-D grid, with the pointwise
/// bounds `0 < a ≤ density ≤ b` the sandwich bounds require.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Vec<f64>,
    p_values: Vec<f64>,
    q_values: Vec<f64>,
    lower_bound_a: f64,
    upper_bound_b: f64,
}

/// Outcome of the Wasserstein-2 sandwich check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsCheck {
    pub s: f64,
    pub w2: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl GridDensity {
    /// Validated constructor: both densities must integrate to one within
    /// 1e-6 and stay inside `[a, b]` with `0 < a < b`.
    pub fn new(
        grid: Vec<f64>,
        p_values: Vec<f64>,
        q_values: Vec<f64>,
        lower_bound_a: f64,
        upper_bound_b: f64,
    ) -> Result<Self> {
        let g = GridDensity::new_unchecked(grid, p_values, q_values, lower_bound_a, upper_bound_b)?;
        if !(lower_bound_a > 0.0 && lower_bound_a < upper_bound_b && upper_bound_b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density bounds must satisfy 0 < a < b, got a={lower_bound_a}, b={upper_bound_b}"
            )));
        }
        for (name, values) in [("p", &g.p_values), ("q", &g.q_values)] {
            let mass = trapezoid(&g.grid, values);
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "density {name} integrates to {mass}, expected 1 within 1e-6"
                )));
            }
            for &v in values.iter() {
                if v < lower_bound_a || v > upper_bound_b {
                    return Err(Error::InvalidParameter(format!(
                        "density {name} value {v} outside bounds [{lower_bound_a}, {upper_bound_b}]"
                    )));
                }
            }
        }
        Ok(g)
    }

    /// Skips the normalization and bound invariants. Needed for inputs that
    /// deliberately violate them, such as a translated uniform whose density
    /// is zero on part of the grid. Shape, finiteness, monotonicity, and
    /// nonnegativity are still enforced.
    pub fn new_unchecked(
        grid: Vec<f64>,
        p_values: Vec<f64>,
        q_values: Vec<f64>,
        lower_bound_a: f64,
        upper_bound_b: f64,
    ) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {}",
                grid.len()
            )));
        }
        if p_values.len() != grid.len() || q_values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} points but p has {} and q has {}",
                grid.len(),
                p_values.len(),
                q_values.len()
            )));
        }
        if grid.iter().any(|v| !v.is_finite())
            || p_values.iter().any(|v| !v.is_finite())
            || q_values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteInput("grid density entry".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "grid must be strictly increasing".into(),
            ));
        }
        if p_values.iter().chain(&q_values).any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter("densities must be nonnegative".into()));
        }
        Ok(GridDensity {
            grid,
            p_values,
            q_values,
            lower_bound_a,
            upper_bound_b,
        })
    }

    /// Validated constructor with `a`, `b` taken from the tabulated values.
    pub fn with_auto_bounds(grid: Vec<f64>, p_values: Vec<f64>, q_values: Vec<f64>) -> Result<Self> {
        let a = p_values
            .iter()
            .chain(&q_values)
            .fold(f64::INFINITY, |acc, &v| acc.min(v));
        let b = p_values
            .iter()
            .chain(&q_values)
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        GridDensity::new(grid, p_values, q_values, a, b)
    }

    /// The instance `q = 1`, `p = 1 + ε(2x − 1)` on `[0, 1]`, for which the
    /// discrepancy has the closed form `ε/√30`.
    pub fn linear_perturbation(epsilon: f64, points: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be in (0, 1), got {epsilon}"
            )));
        }
        let grid: Vec<f64> = (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect();
        let p: Vec<f64> = grid.iter().map(|x| 1.0 + epsilon * (2.0 * x - 1.0)).collect();
        let q = vec![1.0; points];
        GridDensity::new(grid, p, q, 1.0 - epsilon, 1.0 + epsilon)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn lower_bound_a(&self) -> f64 {
        self.lower_bound_a
    }

    pub fn upper_bound_b(&self) -> f64 {
        self.upper_bound_b
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Returns the same densities with the roles of `p` and `q` swapped.
    pub fn swapped(&self) -> GridDensity {
        GridDensity {
            grid: self.grid.clone(),
            p_values: self.q_values.clone(),
            q_values: self.p_values.clone(),
            lower_bound_a: self.lower_bound_a,
            upper_bound_b: self.upper_bound_b,
        }
    }

    fn guard_source_above_lower_bound(&self) -> Result<()> {
        // NaN bounds from the unchecked constructor must fail here too.
        if self.lower_bound_a.is_nan() || self.lower_bound_a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lower bound a = {} must be positive to divide by q",
                self.lower_bound_a
            )));
        }
        if let Some(v) = self.q_values.iter().find(|&&v| v < self.lower_bound_a) {
            return Err(Error::InvalidParameter(format!(
                "source density dips to {v}, below the lower bound {}",
                self.lower_bound_a
            )));
        }
        Ok(())
    }
}

/// Exact 1-D Sobolev discrepancy `S = √(∫ (F_p − F_q)² / q dx)`.
///
/// The integrand is the squared optimal velocity weighted by the source
/// mass: integrating the advection identity once gives
/// `q u′ = −(F_p − F_q)` with zero flux at both ends.
pub fn sobolev_1d(g: &GridDensity) -> Result<f64> {
    g.guard_source_above_lower_bound()?;
    let f_p = cumulative_trapezoid(&g.grid, &g.p_values);
    let f_q = cumulative_trapezoid(&g.grid, &g.q_values);
    let integrand: Vec<f64> = (0..g.len())
        .map(|i| {
            let gap = f_p[i] - f_q[i];
            gap * gap / g.q_values[i]
        })
        .collect();
    Ok(trapezoid(&g.grid, &integrand).max(0.0).sqrt())
}

/// Reconstructs the transport potential `u` with `u(x₀) = 0` by integrating
/// `u′ = −(F_p − F_q)/q`.
pub fn reconstruct_solution(g: &GridDensity) -> Result<Vec<f64>> {
    g.guard_source_above_lower_bound()?;
    let f_p = cumulative_trapezoid(&g.grid, &g.p_values);
    let f_q = cumulative_trapezoid(&g.grid, &g.q_values);
    let slope: Vec<f64> = (0..g.len())
        .map(|i| -(f_p[i] - f_q[i]) / g.q_values[i])
        .collect();
    Ok(cumulative_trapezoid(&g.grid, &slope))
}

/// Max-norm residual of the advection identity `p − q + (q u′)′ = 0` on the
/// interior nodes of a uniform grid, using the conservative second-order
/// stencil with midpoint fluxes.
pub fn pde_residual(g: &GridDensity, u_values: &[f64]) -> Result<f64> {
    let n = g.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "pde_residual needs at least 3 grid points, got {n}"
        )));
    }
    if u_values.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "u has {} values for a {n}-point grid",
            u_values.len()
        )));
    }
    if u_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("u value".into()));
    }
    let h = g.grid[1] - g.grid[0];
    for w in g.grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-8 * h {
            return Err(Error::InvalidParameter(
                "pde_residual requires a uniform grid".into(),
            ));
        }
    }

    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let flux_right = 0.5 * (g.q_values[i] + g.q_values[i + 1]) * (u_values[i + 1] - u_values[i]) / h;
        let flux_left = 0.5 * (g.q_values[i - 1] + g.q_values[i]) * (u_values[i] - u_values[i - 1]) / h;
        let divergence = (flux_right - flux_left) / h;
        worst = worst.max((g.p_values[i] - g.q_values[i] + divergence).abs());
    }
    Ok(worst)
}

/// Quantile by the left-continuous inverse `F⁻¹(t) = inf{x : F(x) ≥ t}` with
/// linear interpolation on the rising segment containing `t`.
fn invert_cdf(grid: &[f64], cdf: &[f64], t: f64) -> f64 {
    let i = cdf.partition_point(|&f| f < t);
    if i == 0 {
        return grid[0];
    }
    if i >= cdf.len() {
        return *grid.last().expect("nonempty grid");
    }
    // cdf[i] >= t > cdf[i-1], so the segment has positive rise.
    let rise = cdf[i] - cdf[i - 1];
    grid[i - 1] + (t - cdf[i - 1]) / rise * (grid[i] - grid[i - 1])
}

fn normalized_cdf(grid: &[f64], values: &[f64], name: &str) -> Result<Vec<f64>> {
    let mut cdf = cumulative_trapezoid(grid, values);
    let mass = *cdf.last().expect("nonempty grid");
    if mass <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "density {name} has nonpositive total mass {mass}"
        )));
    }

    // A zero-mass cell strictly inside the support makes the quantile
    // function jump at an interior t; reject rather than integrate across
    // the jump. Leading and trailing zero-density cells are fine.
    let masses: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
    let first = masses.iter().position(|&m| m > 0.0).unwrap_or(0);
    let last = masses.iter().rposition(|&m| m > 0.0).unwrap_or(0);
    if masses[first..=last].iter().any(|&m| m <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "density {name} has an interior zero-density region; CDF is not invertible"
        )));
    }

    for v in cdf.iter_mut() {
        *v /= mass;
    }
    Ok(cdf)
}

/// Wasserstein-2 distance `√(∫₀¹ (F_p⁻¹(t) − F_q⁻¹(t))² dt)` via
/// piecewise-linear CDF inversion on a `t`-grid matching the spatial
/// resolution.
pub fn wasserstein2_1d(g: &GridDensity) -> Result<f64> {
    let f_p = normalized_cdf(&g.grid, &g.p_values, "p")?;
    let f_q = normalized_cdf(&g.grid, &g.q_values, "q")?;
    let n = g.len();
    let mut acc = 0.0;
    let mut prev = 0.0;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let gap = invert_cdf(&g.grid, &f_p, t) - invert_cdf(&g.grid, &f_q, t);
        let term = gap * gap;
        if k > 0 {
            acc += 0.5 * (prev + term) / (n - 1) as f64;
        }
        prev = term;
    }
    Ok(acc.max(0.0).sqrt())
}

/// Evaluates both oracles and the sandwich `√(a/b)·S ≤ W₂ ≤ 2S`, each side
/// slacked by [`SANDWICH_TOL`].
pub fn check_bounds(g: &GridDensity) -> Result<BoundsCheck> {
    let s = sobolev_1d(g)?;
    let w2 = wasserstein2_1d(g)?;
    let ratio = (g.lower_bound_a / g.upper_bound_b).sqrt();
    Ok(BoundsCheck {
        s,
        w2,
        lower_ok: ratio * s <= w2 + SANDWICH_TOL,
        upper_ok: w2 <= 2.0 * s + SANDWICH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_grid(points: usize, x0: f64, x1: f64) -> Vec<f64> {
        (0..points)
            .map(|i| x0 + (x1 - x0) * i as f64 / (points - 1) as f64)
            .collect()
    }

    #[test]
    fn identical_densities_have_zero_discrepancy() {
        let grid = uniform_grid(101, 0.0, 1.0);
        let ones = vec![1.0; 101];
        let g = GridDensity::new(grid, ones.clone(), ones, 0.9, 1.1).unwrap();
        assert_eq!(sobolev_1d(&g).unwrap(), 0.0);
        assert_eq!(wasserstein2_1d(&g).unwrap(), 0.0);
        let bc = check_bounds(&g).unwrap();
        assert!(bc.lower_ok && bc.upper_ok);
    }

    #[test]
    fn linear_perturbation_matches_symbolic_value() {
        // ∫₀¹ (x² − x)² dx = 1/30, so S = ε/√30.
        let g = GridDensity::linear_perturbation(0.5, 10_000).unwrap();
        let s = sobolev_1d(&g).unwrap();
        let expected = 0.5 / 30f64.sqrt();
        assert!(
            (s - expected).abs() < 1e-6,
            "S = {s}, expected {expected}"
        );
    }

    #[test]
    fn weighted_norm_is_asymmetric() {
        let g = GridDensity::linear_perturbation(0.5, 4001).unwrap();
        let forward = sobolev_1d(&g).unwrap();
        let backward = sobolev_1d(&g.swapped()).unwrap();
        assert!(
            (forward - backward).abs() > 1e-5,
            "expected asymmetry, got {forward} vs {backward}"
        );
    }

    #[test]
    fn perturbation_scaling_is_linear() {
        // p_t = q + t(p − q) makes F_p − F_q linear in t, so S scales with t.
        let base = GridDensity::linear_perturbation(0.8, 2001).unwrap();
        let s_full = sobolev_1d(&base).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let p_t: Vec<f64> = base
                .p_values()
                .iter()
                .zip(base.q_values())
                .map(|(&p, &q)| q + t * (p - q))
                .collect();
            let g = GridDensity::new(
                base.grid().to_vec(),
                p_t,
                base.q_values().to_vec(),
                1.0 - 0.8 * t,
                1.0 + 0.8 * t,
            )
            .unwrap();
            let s_t = sobolev_1d(&g).unwrap();
            let rel = (s_t - t * s_full).abs() / (t * s_full);
            assert!(rel < 1e-8, "t={t}: S={s_t}, expected {}", t * s_full);
        }
    }

    #[test]
    fn rejects_source_below_lower_bound() {
        let grid = uniform_grid(11, 0.0, 1.0);
        let ones = vec![1.0; 11];
        let mut dipped = ones.clone();
        dipped[5] = 0.2;
        // q dips below the declared bound; construct unchecked then compute.
        let g = GridDensity::new_unchecked(grid, ones, dipped, 0.5, 1.5).unwrap();
        assert!(matches!(sobolev_1d(&g), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn residual_is_zero_for_identical_densities() {
        let grid = uniform_grid(101, 0.0, 1.0);
        let ones = vec![1.0; 101];
        let g = GridDensity::new(grid, ones.clone(), ones, 0.9, 1.1).unwrap();
        assert_eq!(pde_residual(&g, &vec![0.0; 101]).unwrap(), 0.0);
    }

    #[test]
    fn residual_of_reconstructed_solution_is_small() {
        let points = 10_000;
        let g = GridDensity::linear_perturbation(0.5, points).unwrap();
        let u = reconstruct_solution(&g).unwrap();
        let r = pde_residual(&g, &u).unwrap();
        assert!(r <= 10.0 / points as f64, "residual {r}");
    }

    #[test]
    fn random_candidate_has_larger_residual_than_reconstruction() {
        let points = 2001;
        let g = GridDensity::linear_perturbation(0.5, points).unwrap();
        let u = reconstruct_solution(&g).unwrap();
        let reconstructed = pde_residual(&g, &u).unwrap();
        let arbitrary: Vec<f64> = (0..points)
            .map(|i| (0.37 * i as f64).sin() * 0.05)
            .collect();
        let r = pde_residual(&g, &arbitrary).unwrap();
        assert!(r > reconstructed, "{r} vs {reconstructed}");
    }

    #[test]
    fn residual_requires_uniform_grid_and_enough_points() {
        let g = GridDensity::new_unchecked(
            vec![0.0, 0.1, 0.5],
            vec![1.0; 3],
            vec![1.0; 3],
            0.5,
            1.5,
        )
        .unwrap();
        assert!(matches!(
            pde_residual(&g, &[0.0, 0.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
        let tiny = GridDensity::new_unchecked(vec![0.0, 1.0], vec![1.0; 2], vec![1.0; 2], 0.5, 1.5)
            .unwrap();
        assert!(matches!(
            pde_residual(&tiny, &[0.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn translated_uniform_recovers_shift() {
        // q uniform on [0,1], p uniform on [0.2, 1.2], tabulated on a common
        // grid with both supports strictly interior so the two tabulations
        // are exact index-shifted copies of each other.
        let points = 1401;
        let grid = uniform_grid(points, -0.1, 1.3);
        // Supports by node index (h = 1e-3): q on nodes 100..=1100, p on
        // nodes 300..=1300, exactly 200 indices (0.2) apart.
        let raw_q: Vec<f64> = (0..points)
            .map(|i| if (100..=1100).contains(&i) { 1.0 } else { 0.0 })
            .collect();
        let raw_p: Vec<f64> = (0..points)
            .map(|i| if (300..=1300).contains(&i) { 1.0 } else { 0.0 })
            .collect();
        let mass_q = trapezoid(&grid, &raw_q);
        let mass_p = trapezoid(&grid, &raw_p);
        let q: Vec<f64> = raw_q.iter().map(|v| v / mass_q).collect();
        let p: Vec<f64> = raw_p.iter().map(|v| v / mass_p).collect();
        let g = GridDensity::new_unchecked(grid, p, q, 0.0, 2.0).unwrap();
        let w2 = wasserstein2_1d(&g).unwrap();
        assert!((w2 - 0.2).abs() < 1e-4, "W2 = {w2}");
    }

    #[test]
    fn interior_gap_is_rejected() {
        let points = 101;
        let grid = uniform_grid(points, 0.0, 1.0);
        let q = vec![1.0; points];
        let mut p = vec![2.0; points];
        for v in p.iter_mut().take(61).skip(40) {
            *v = 0.0;
        }
        let mass = trapezoid(&grid, &p);
        let p: Vec<f64> = p.iter().map(|v| v / mass).collect();
        let g = GridDensity::new_unchecked(grid, p, q, 0.0, 3.0).unwrap();
        assert!(matches!(
            wasserstein2_1d(&g),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn wasserstein_agrees_with_sorted_coupling_oracle() {
        let g = GridDensity::linear_perturbation(0.5, 10_000).unwrap();
        let w2 = wasserstein2_1d(&g).unwrap();

        // Independent quantile-matching oracle with the closed-form inverse
        // CDF of p: x = √(0.25 + 2t) − 0.5 for ε = 0.5.
        let samples = 100_000;
        let mut acc = 0.0;
        for k in 0..samples {
            let t = (k as f64 + 0.5) / samples as f64;
            let xp = (0.25 + 2.0 * t).sqrt() - 0.5;
            let xq = t;
            acc += (xp - xq) * (xp - xq);
        }
        let oracle = (acc / samples as f64).sqrt();
        assert!((w2 - oracle).abs() < 1e-3, "{w2} vs {oracle}");
    }

    #[test]
    fn sandwich_holds_for_linear_perturbations() {
        for eps in [0.5, 0.9] {
            let g = GridDensity::linear_perturbation(eps, 10_000).unwrap();
            let bc = check_bounds(&g).unwrap();
            assert!(bc.lower_ok, "lower bound failed at eps={eps}: {bc:?}");
            assert!(bc.upper_ok, "upper bound failed at eps={eps}: {bc:?}");
        }
    }

    #[test]
    fn grid_refinement_converges() {
        let mut s_values = Vec::new();
        let mut w_values = Vec::new();
        for points in [500usize, 1000, 2000, 4000] {
            let g = GridDensity::linear_perturbation(0.7, points).unwrap();
            s_values.push(sobolev_1d(&g).unwrap());
            w_values.push(wasserstein2_1d(&g).unwrap());
        }
        let s_changes: Vec<f64> = s_values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let w_changes: Vec<f64> = w_values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for pair in s_changes.windows(2) {
            assert!(pair[1] <= 0.35 * pair[0] + 1e-14, "S changes: {s_changes:?}");
        }
        for pair in w_changes.windows(2) {
            assert!(pair[1] <= 0.75 * pair[0] + 1e-12, "W2 changes: {w_changes:?}");
        }
    }

    #[test]
    fn constructor_rejects_bad_inputs() {
        assert!(matches!(
            GridDensity::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0], 0.5, 2.5),
            Err(Error::InvalidParameter(_)) // q mass is 2
        ));
        assert!(matches!(
            GridDensity::new(vec![0.0, 0.0, 1.0], vec![1.0; 3], vec![1.0; 3], 0.5, 1.5),
            Err(Error::InvalidParameter(_)) // non-increasing grid
        ));
        assert!(matches!(
            GridDensity::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], 0.0, 1.5),
            Err(Error::InvalidParameter(_)) // a must be positive
        ));
        assert!(matches!(
            GridDensity::new(vec![0.0, 1.0], vec![1.0], vec![1.0, 1.0], 0.5, 1.5),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
