//! Batch commands behind the `rksd` binary.
//!
//! Every command reads CSV/JSON inputs, computes through the library, and
//! writes a machine-readable artifact. Outputs are byte-identical across
//! runs for identical inputs. Exit codes: 0 success, 1 validation failure,
//! 2 input error, 3 numerical singularity.

use std::path::Path;

use crate::config::RunConfig;
use crate::discrepancy::{evaluate_witness, solve_witness, velocity_field};
use crate::embeddings::{derivative_gramian, mean_difference, mean_embedding};
use crate::error::{Error, Result};
use crate::io::{
    self, bounds_check_to_json, witness_to_json, write_directions_csv, write_witness_grid_csv,
    DirectionsRow,
};
use crate::oracle1d::{check_bounds, BoundsCheck};
use crate::transport::{spectral_decomposition, transport_coefficients};
use crate::validation::{run_validation, ValidationReport};

/// Rectangular evaluation grid for witness tabulation, one (min, max,
/// points) triple per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.min.len() != dim || self.max.len() != dim || self.points.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "grid spec covers {} axes, data has dimension {dim}",
                self.min.len()
            )));
        }
        for a in 0..dim {
            if self.min[a].is_nan() || self.max[a].is_nan() || self.min[a] >= self.max[a] {
                return Err(Error::InvalidParameter(format!(
                    "grid axis {a}: min {} must be below max {}",
                    self.min[a], self.max[a]
                )));
            }
            if self.points[a] < 2 {
                return Err(Error::InvalidParameter(format!(
                    "grid axis {a}: need at least 2 points"
                )));
            }
        }
        Ok(())
    }

    fn nodes(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.points[axis];
        let (lo, hi) = (self.min[axis], self.max[axis]);
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }
}

fn load_pair(
    config: &RunConfig,
    samples_p: &Path,
    samples_q: &Path,
) -> Result<(crate::FeatureMap, crate::SampleSet, crate::SampleSet)> {
    let p = io::read_samples_csv(samples_p, "p")?;
    let q = io::read_samples_csv(samples_q, "q")?;
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!(
            "p has dimension {} but q has dimension {}",
            p.dim(),
            q.dim()
        )));
    }
    if config.feature_map.d != p.dim() {
        return Err(Error::ShapeMismatch(format!(
            "config feature map has d = {}, samples have dimension {}",
            config.feature_map.d,
            p.dim()
        )));
    }
    let fm = config.build_feature_map()?;
    Ok((fm, p, q))
}

/// Solves the witness problem for every λ (the grid, or a single explicit
/// override) and writes one JSON record per λ.
pub fn cmd_discrepancy(
    config: &RunConfig,
    samples_p: &Path,
    samples_q: &Path,
    lambda_override: Option<f64>,
    out: &Path,
) -> Result<()> {
    config.validate()?;
    let (fm, p, q) = load_pair(config, samples_p, samples_q)?;
    let delta = mean_difference(&mean_embedding(&fm, &p)?, &mean_embedding(&fm, &q)?)?;
    let gramian = derivative_gramian(&fm, &q)?;

    let lambdas: Vec<f64> = match lambda_override {
        Some(lambda) => vec![lambda],
        None => config.lambda_grid.clone(),
    };
    let mut results = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let w = solve_witness(&gramian, &delta, lambda)?;
        results.push(witness_to_json(&w));
    }
    io::write_json(out, &serde_json::Value::Array(results))
}

/// Tabulates the witness and its velocity field over a 1-D or 2-D grid.
pub fn cmd_witness_grid(
    config: &RunConfig,
    samples_p: &Path,
    samples_q: &Path,
    lambda: f64,
    grid: &GridSpec,
    out: &Path,
) -> Result<()> {
    config.validate()?;
    let (fm, p, q) = load_pair(config, samples_p, samples_q)?;
    let dim = p.dim();
    if dim > 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    grid.validate(dim)?;

    let delta = mean_difference(&mean_embedding(&fm, &p)?, &mean_embedding(&fm, &q)?)?;
    let gramian = derivative_gramian(&fm, &q)?;
    let w = solve_witness(&gramian, &delta, lambda)?;

    let mut rows = Vec::new();
    match dim {
        1 => {
            for x in grid.nodes(0) {
                let point = vec![x];
                let u = evaluate_witness(&fm, &w.coeffs, &point)?;
                let grad = velocity_field(&fm, &w.coeffs, &point)?;
                rows.push((point, u, grad.iter().copied().collect()));
            }
        }
        _ => {
            for x1 in grid.nodes(0) {
                for x2 in grid.nodes(1) {
                    let point = vec![x1, x2];
                    let u = evaluate_witness(&fm, &w.coeffs, &point)?;
                    let grad = velocity_field(&fm, &w.coeffs, &point)?;
                    rows.push((point, u, grad.iter().copied().collect()));
                }
            }
        }
    }
    write_witness_grid_csv(out, dim, &rows)
}

/// Exports the top-k principal transport decomposition per λ, with a
/// reconstruction check row comparing the spectral re-assembly of the
/// witness against the direct solve.
pub fn cmd_directions(
    config: &RunConfig,
    samples_p: &Path,
    samples_q: &Path,
    out: &Path,
) -> Result<()> {
    config.validate()?;
    let (fm, p, q) = load_pair(config, samples_p, samples_q)?;
    let delta = mean_difference(&mean_embedding(&fm, &p)?, &mean_embedding(&fm, &q)?)?;
    let gramian = derivative_gramian(&fm, &q)?;
    let spectrum = spectral_decomposition(&gramian)?;

    let top_k = config.top_k_directions.min(fm.dim_feature());
    let mut rows = Vec::new();
    let mut reconstruction = Vec::new();
    for &lambda in &config.lambda_grid {
        let decomposition = transport_coefficients(&spectrum, &delta, lambda)?;
        for j in 0..top_k {
            rows.push(DirectionsRow {
                lambda,
                mode: j,
                eigenvalue: spectrum.eigenvalues()[j],
                raw_alignment: decomposition.raw_alignments[j],
                filtered_coefficient: decomposition.coefficients[j],
            });
        }
        let rebuilt = spectrum.eigenvectors() * &decomposition.coefficients;
        let direct = solve_witness(&gramian, &delta, lambda)?.coeffs;
        let error = (&rebuilt - &direct).norm() / direct.norm().max(1e-300);
        reconstruction.push((lambda, error));
    }
    write_directions_csv(out, &rows, &reconstruction)
}

/// Runs the full identity suite on synthetic data from the config seed and
/// writes the report. The caller maps `passed()` to the exit code.
pub fn cmd_validate(
    config: &RunConfig,
    tolerance_scale: f64,
    out: &Path,
) -> Result<ValidationReport> {
    config.validate()?;
    let report = run_validation(config, tolerance_scale)?;
    io::write_json(out, &report.to_json())?;
    Ok(report)
}

/// Exact 1-D oracles on a tabulated (x, p, q) density file, with the
/// sandwich verdict.
pub fn cmd_oracle_1d(
    input: &Path,
    bounds: Option<(f64, f64)>,
    out: &Path,
) -> Result<BoundsCheck> {
    let g = io::read_grid_density_csv(input, bounds)?;
    let bc = check_bounds(&g)?;
    io::write_json(out, &bounds_check_to_json(&bc, g.lower_bound_a(), g.upper_bound_b()))?;
    Ok(bc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_validation() {
        let spec = GridSpec {
            min: vec![0.0],
            max: vec![1.0],
            points: vec![11],
        };
        spec.validate(1).unwrap();
        assert!(spec.validate(2).is_err());

        let bad = GridSpec {
            min: vec![1.0],
            max: vec![0.0],
            points: vec![11],
        };
        assert!(bad.validate(1).is_err());

        let single = GridSpec {
            min: vec![0.0],
            max: vec![1.0],
            points: vec![1],
        };
        assert!(single.validate(1).is_err());
    }
}
