//! Principal transport directions and spectrally filtered velocities.
//!
//! Eigenpairs `(λ_j, ψ_j)` of the derivative gramian give normalized
//! functions `ψ̃_j = ψ_j/√λ_j` whose gradients are orthonormal in
//! `L₂(ν_q)^⊗d`. In that basis the regularized witness velocity is
//! `Σ_j ⟨ψ_j, δ⟩/(λ_j + λ) · JΦ(x)ψ_j`: Tikhonov regularization damps each
//! mode by `1/(λ_j + λ)`, filtering the small-eigenvalue directions.

use nalgebra::{DMatrix, DVector};

use crate::discrepancy::{velocity_field, RANK_TOL_FACTOR};
use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;
use crate::util::check_square_symmetric;

/// Eigendecomposition of a derivative gramian, eigenvalues descending,
/// eigenvector columns orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Shared singularity threshold: 1e-10 times the largest eigenvalue.
    pub fn rank_tolerance(&self) -> f64 {
        RANK_TOL_FACTOR * self.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v))
    }
}

/// Modal coefficients of the witness velocity in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportDecomposition {
    /// c_j = ⟨ψ_j, δ⟩ / (λ_j + λ).
    pub coefficients: DVector<f64>,
    /// ⟨ψ_j, δ⟩; positive sign means the mode is aligned with the desired
    /// transport from source to target.
    pub raw_alignments: DVector<f64>,
    pub lambda: f64,
}

/// Full symmetric eigendecomposition, descending, with eigenvalues within
/// rounding of zero clamped to zero and a deterministic sign convention
/// (largest-magnitude entry of each eigenvector is positive).
pub fn spectral_decomposition(gramian: &DMatrix<f64>) -> Result<Spectrum> {
    check_square_symmetric(gramian, 1e-10, "spectral decomposition")?;
    let m = gramian.nrows();
    let eigen = nalgebra::SymmetricEigen::new(gramian.clone());

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

    let max_eig = eigen.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let clamp_below = -RANK_TOL_FACTOR * max_eig;

    let mut eigenvalues = DVector::zeros(m);
    let mut eigenvectors = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        let v = eigen.eigenvalues[src];
        eigenvalues[dst] = if v < 0.0 && v >= clamp_below { 0.0 } else { v };

        let column = eigen.eigenvectors.column(src);
        let mut dominant = 0;
        for i in 1..m {
            if column[i].abs() > column[dominant].abs() {
                dominant = i;
            }
        }
        let flip = if column[dominant] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            eigenvectors[(i, dst)] = flip * column[i];
        }
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Projects δ on the eigenbasis and applies the resolvent filter
/// 1/(λ_j + λ).
pub fn transport_coefficients(
    spectrum: &Spectrum,
    delta: &DVector<f64>,
    lambda: f64,
) -> Result<TransportDecomposition> {
    if delta.len() != spectrum.len() {
        return Err(Error::ShapeMismatch(format!(
            "delta has length {}, spectrum has {} modes",
            delta.len(),
            spectrum.len()
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    let tolerance = spectrum.rank_tolerance();
    if lambda == 0.0 {
        let min_eig = spectrum.eigenvalues.min();
        if min_eig <= tolerance {
            return Err(Error::SingularGramian {
                min_eigenvalue: min_eig,
                tolerance,
            });
        }
    }
    let raw_alignments = spectrum.eigenvectors.transpose() * delta;
    let coefficients = DVector::from_fn(spectrum.len(), |j, _| {
        raw_alignments[j] / (spectrum.eigenvalues[j] + lambda)
    });
    Ok(TransportDecomposition {
        coefficients,
        raw_alignments,
        lambda,
    })
}

/// The j-th principal transport direction JΦ(x)·(ψ_j/√λ_j) at x.
pub fn principal_direction(
    fm: &FeatureMap,
    spectrum: &Spectrum,
    j: usize,
    x: &[f64],
) -> Result<DVector<f64>> {
    if j >= spectrum.len() {
        return Err(Error::InvalidParameter(format!(
            "direction index {j} out of range for {} modes",
            spectrum.len()
        )));
    }
    if spectrum.len() != fm.dim_feature() {
        return Err(Error::ShapeMismatch(format!(
            "spectrum has {} modes, feature map has {} features",
            spectrum.len(),
            fm.dim_feature()
        )));
    }
    let tolerance = spectrum.rank_tolerance();
    let eigenvalue = spectrum.eigenvalues[j];
    if eigenvalue <= tolerance {
        return Err(Error::DegenerateDirection {
            index: j,
            eigenvalue,
            tolerance,
        });
    }
    let normalized = DVector::from_fn(spectrum.len(), |i, _| {
        spectrum.eigenvectors[(i, j)] / eigenvalue.sqrt()
    });
    Ok(fm.jacobian(x)? * normalized)
}

/// Velocity through the spectral route:
/// Σ_j ⟨ψ_j, δ⟩/(λ_j + λ) · JΦ(x)ψ_j. Matches the direct-solve
/// [`velocity_field`] of the same witness.
pub fn filtered_velocity(
    fm: &FeatureMap,
    spectrum: &Spectrum,
    delta: &DVector<f64>,
    lambda: f64,
    x: &[f64],
) -> Result<DVector<f64>> {
    if spectrum.len() != fm.dim_feature() {
        return Err(Error::ShapeMismatch(format!(
            "spectrum has {} modes, feature map has {} features",
            spectrum.len(),
            fm.dim_feature()
        )));
    }
    let decomposition = transport_coefficients(spectrum, delta, lambda)?;
    let coeffs = &spectrum.eigenvectors * &decomposition.coefficients;
    velocity_field(fm, &coeffs, x)
}
