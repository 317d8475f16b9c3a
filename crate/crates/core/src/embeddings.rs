//! Distribution embeddings in feature space.
//!
//! A distribution is fingerprinted by two objects: the mean embedding
//! `μ(ν) = E_ν Φ(x)` and the derivative gramian `D(ν) = E_ν JΦ(x)ᵀJΦ(x)`,
//! the positive semi-definite operator that measures expected squared
//! gradients. Both come either from samples (empirical averages) or, in one
//! dimension, from trapezoid quadrature against a tabulated density.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;
use crate::oracle1d::GridDensity;
use crate::util::trapezoid_weights;

/// Which density of a [`GridDensity`] pair to embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySide {
    P,
    Q,
}

/// N points in R^d stored row-major, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    dim: usize,
    label: String,
}

impl SampleSet {
    pub fn new(data: Vec<f64>, dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("sample dimension must be positive".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("sample coordinate".into()));
        }
        Ok(SampleSet {
            data,
            dim,
            label: label.into(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter("empty sample set".into()));
        };
        let dim = first.len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        SampleSet::new(data, dim, label)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// The pair (μ̂, D̂) plus the sample or quadrature-node count behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEmbedding {
    pub mu: DVector<f64>,
    pub gramian: DMatrix<f64>,
    pub sample_count: usize,
}

impl DistributionEmbedding {
    /// Empirical embedding: μ̂ = (1/N)ΣΦ(x_i), D̂ = (1/N)ΣJΦ(x_i)ᵀJΦ(x_i).
    pub fn from_samples(fm: &FeatureMap, samples: &SampleSet) -> Result<Self> {
        Ok(DistributionEmbedding {
            mu: mean_embedding(fm, samples)?,
            gramian: derivative_gramian(fm, samples)?,
            sample_count: samples.len(),
        })
    }

    /// Population embedding of one side of a 1-D density pair by trapezoid
    /// quadrature on its grid.
    pub fn from_quadrature(fm: &FeatureMap, g: &GridDensity, side: DensitySide) -> Result<Self> {
        if fm.dim_input() != 1 {
            return Err(Error::UnsupportedDimension(fm.dim_input()));
        }
        let density = match side {
            DensitySide::P => g.p_values(),
            DensitySide::Q => g.q_values(),
        };
        let weights = trapezoid_weights(g.grid());
        let mass: f64 = weights.iter().zip(density).map(|(w, v)| w * v).sum();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "density integrates to {mass}, expected 1 within 1e-6"
            )));
        }

        let m = fm.dim_feature();
        let n = g.len();
        let mut mu = DVector::zeros(m);
        // Rows of `scaled` are √(w_i ρ_i)·JΦ(x_i), so D = scaledᵀ·scaled.
        let mut scaled = DMatrix::zeros(n, m);
        for i in 0..n {
            let x = [g.grid()[i]];
            let weight = weights[i] * density[i];
            mu.axpy(weight, &fm.evaluate(&x)?, 1.0);
            let jac = fm.jacobian(&x)?;
            let root = weight.max(0.0).sqrt();
            for j in 0..m {
                scaled[(i, j)] = root * jac[(0, j)];
            }
        }
        let mut gramian = scaled.transpose() * &scaled;
        symmetrize(&mut gramian);
        Ok(DistributionEmbedding {
            mu,
            gramian,
            sample_count: n,
        })
    }

    /// Combines two embeddings of disjoint sample chunks by
    /// sample-count-weighted averaging. Associative and commutative up to
    /// floating-point rounding.
    pub fn merge(&self, other: &DistributionEmbedding) -> Result<DistributionEmbedding> {
        if self.mu.len() != other.mu.len() {
            return Err(Error::ShapeMismatch(format!(
                "embeddings have feature dimensions {} and {}",
                self.mu.len(),
                other.mu.len()
            )));
        }
        let total = self.sample_count + other.sample_count;
        let wa = self.sample_count as f64 / total as f64;
        let wb = other.sample_count as f64 / total as f64;
        Ok(DistributionEmbedding {
            mu: &self.mu * wa + &other.mu * wb,
            gramian: &self.gramian * wa + &other.gramian * wb,
            sample_count: total,
        })
    }
}

fn check_dims(fm: &FeatureMap, samples: &SampleSet) -> Result<()> {
    if samples.dim() != fm.dim_input() {
        return Err(Error::ShapeMismatch(format!(
            "samples have dimension {}, feature map expects {}",
            samples.dim(),
            fm.dim_input()
        )));
    }
    Ok(())
}

/// Empirical kernel mean embedding μ̂ = (1/N) Σ Φ(x_i).
pub fn mean_embedding(fm: &FeatureMap, samples: &SampleSet) -> Result<DVector<f64>> {
    check_dims(fm, samples)?;
    let mut acc = DVector::zeros(fm.dim_feature());
    for x in samples.rows() {
        acc += fm.evaluate(x)?;
    }
    Ok(acc / samples.len() as f64)
}

/// Empirical derivative gramian D̂ = (1/M) Σ JΦ(y_j)ᵀ JΦ(y_j).
pub fn derivative_gramian(fm: &FeatureMap, samples: &SampleSet) -> Result<DMatrix<f64>> {
    check_dims(fm, samples)?;
    let m = fm.dim_feature();
    let d = fm.dim_input();
    let n = samples.len();
    // Stack all Jacobians into an (N·d) × m block and take one gram product.
    let mut stacked = DMatrix::zeros(n * d, m);
    for (i, x) in samples.rows().enumerate() {
        let jac = fm.jacobian(x)?;
        stacked.rows_mut(i * d, d).copy_from(&jac);
    }
    stacked /= (n as f64).sqrt();
    let mut gramian = stacked.transpose() * &stacked;
    symmetrize(&mut gramian);
    Ok(gramian)
}

/// δ = μ_p − μ_q.
pub fn mean_difference(mu_p: &DVector<f64>, mu_q: &DVector<f64>) -> Result<DVector<f64>> {
    if mu_p.len() != mu_q.len() {
        return Err(Error::ShapeMismatch(format!(
            "mean embeddings have lengths {} and {}",
            mu_p.len(),
            mu_q.len()
        )));
    }
    Ok(mu_p - mu_q)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
