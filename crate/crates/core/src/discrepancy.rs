//! Closed-form regularized witness and discrepancy value.
//!
//! Maximizing `2⟨u, δ⟩ − uᵀ(D + λI)u` over coefficient vectors gives
//! `u* = (D + λI)⁻¹ δ` and optimal value `δᵀ(D + λI)⁻¹δ`, the squared
//! discrepancy. Its split `uᵀDu + λ‖u‖²` separates the kinetic energy of the
//! induced velocity field from the regularization penalty; the normalized
//! witness is `u*/value`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;
use crate::util::check_square_symmetric;

/// Relative eigenvalue threshold below which a gramian counts as singular:
/// the λ = 0 paths fail when `min_eig ≤ RANK_TOL_FACTOR · max_eig`.
pub const RANK_TOL_FACTOR: f64 = 1e-10;

/// Solution of the regularized witness problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSolution {
    /// u = (D + λI)⁻¹ δ.
    pub coeffs: DVector<f64>,
    pub lambda: f64,
    /// √(δᵀ(D + λI)⁻¹δ), the discrepancy value.
    pub value: f64,
    /// uᵀDu, the expected squared gradient under the source.
    pub kinetic: f64,
    /// λ‖u‖².
    pub penalty: f64,
}

impl WitnessSolution {
    /// The unit-constraint witness f = u / value.
    ///
    /// Fails when the value is zero: the distributions are indistinguishable
    /// in this feature space and the normalization is 0/0.
    pub fn witness_function(&self) -> Result<DVector<f64>> {
        if self.value <= 0.0 {
            return Err(Error::DegenerateWitness);
        }
        Ok(&self.coeffs / self.value)
    }
}

fn check_solve_inputs(gramian: &DMatrix<f64>, delta: &DVector<f64>, lambda: f64) -> Result<()> {
    check_square_symmetric(gramian, 1e-10, "derivative gramian")?;
    if gramian.nrows() != delta.len() {
        return Err(Error::ShapeMismatch(format!(
            "gramian is {}x{} but delta has length {}",
            gramian.nrows(),
            gramian.ncols(),
            delta.len()
        )));
    }
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("embedding difference".into()));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Solves (D + λI)u = δ by symmetric positive-definite factorization.
///
/// λ = 0 is allowed only for numerically nonsingular D; below the rank
/// tolerance the call fails instead of silently pseudo-inverting.
pub fn solve_witness(
    gramian: &DMatrix<f64>,
    delta: &DVector<f64>,
    lambda: f64,
) -> Result<WitnessSolution> {
    check_solve_inputs(gramian, delta, lambda)?;
    let m = gramian.nrows();

    let coeffs = if lambda == 0.0 {
        let eigen = nalgebra::SymmetricEigen::new(gramian.clone());
        let max_eig = eigen.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
        let min_eig = eigen.eigenvalues.min();
        let tolerance = RANK_TOL_FACTOR * max_eig;
        if min_eig <= tolerance {
            return Err(Error::SingularGramian {
                min_eigenvalue: min_eig,
                tolerance,
            });
        }
        match Cholesky::new(gramian.clone()) {
            Some(chol) => chol.solve(delta),
            // Rank check passed, so solve through the decomposition we have.
            None => {
                let projected = eigen.eigenvectors.transpose() * delta;
                let scaled = DVector::from_fn(m, |j, _| projected[j] / eigen.eigenvalues[j]);
                &eigen.eigenvectors * scaled
            }
        }
    } else {
        let mut regularized = gramian.clone();
        for j in 0..m {
            regularized[(j, j)] += lambda;
        }
        match Cholesky::new(regularized) {
            Some(chol) => chol.solve(delta),
            None => {
                // PSD up to rounding plus λ > 0: clamp the spectrum and solve.
                let eigen = nalgebra::SymmetricEigen::new(gramian.clone());
                let projected = eigen.eigenvectors.transpose() * delta;
                let scaled = DVector::from_fn(m, |j, _| {
                    projected[j] / (eigen.eigenvalues[j].max(0.0) + lambda)
                });
                &eigen.eigenvectors * scaled
            }
        }
    };

    let value_sq = delta.dot(&coeffs).max(0.0);
    let kinetic = coeffs.dot(&(gramian * &coeffs));
    let penalty = lambda * coeffs.norm_squared();
    Ok(WitnessSolution {
        coeffs,
        lambda,
        value: value_sq.sqrt(),
        kinetic,
        penalty,
    })
}

/// The variational objective L(u, λ) = 2⟨u, δ⟩ − uᵀ(D + λI)u.
///
/// Its supremum over u equals the squared discrepancy.
pub fn objective(
    gramian: &DMatrix<f64>,
    delta: &DVector<f64>,
    u: &DVector<f64>,
    lambda: f64,
) -> Result<f64> {
    check_solve_inputs(gramian, delta, lambda)?;
    if u.len() != delta.len() {
        return Err(Error::ShapeMismatch(format!(
            "candidate has length {}, expected {}",
            u.len(),
            delta.len()
        )));
    }
    Ok(2.0 * u.dot(delta) - u.dot(&(gramian * u)) - lambda * u.norm_squared())
}

/// √(δᵀ(D + λI)⁻¹δ) without exposing the witness.
pub fn discrepancy_value(
    gramian: &DMatrix<f64>,
    delta: &DVector<f64>,
    lambda: f64,
) -> Result<f64> {
    solve_witness(gramian, delta, lambda).map(|w| w.value)
}

/// Witness evaluation u(x) = ⟨coeffs, Φ(x)⟩.
pub fn evaluate_witness(fm: &FeatureMap, coeffs: &DVector<f64>, x: &[f64]) -> Result<f64> {
    if coeffs.len() != fm.dim_feature() {
        return Err(Error::ShapeMismatch(format!(
            "coefficients have length {}, feature map has {} features",
            coeffs.len(),
            fm.dim_feature()
        )));
    }
    Ok(fm.evaluate(x)?.dot(coeffs))
}

/// Transport velocity ∇u(x) = JΦ(x)·coeffs.
pub fn velocity_field(fm: &FeatureMap, coeffs: &DVector<f64>, x: &[f64]) -> Result<DVector<f64>> {
    if coeffs.len() != fm.dim_feature() {
        return Err(Error::ShapeMismatch(format!(
            "coefficients have length {}, feature map has {} features",
            coeffs.len(),
            fm.dim_feature()
        )));
    }
    Ok(fm.jacobian(x)? * coeffs)
}
