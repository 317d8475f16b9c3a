//! Gaussian-enveloped random Fourier feature maps.
//!
//! Each feature is `Φ_j(x) = c · exp(−‖x‖²/(2σ_w²)) · cos(Ω_j·x + b_j)` with
//! frequencies `Ω_j` drawn from a zero-mean Gaussian and phases `b_j` uniform
//! on `[0, 2π)`. The Gaussian envelope makes every feature vanish at infinity
//! while keeping the Jacobian analytic, and `sup_x ‖Φ(x)‖ ≤ c·√m` holds by
//! construction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite feature map Φ: R^d → R^m with analytic Jacobian.
///
/// Immutable after construction; evaluation is pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    dim_input: usize,
    dim_feature: usize,
    frequencies: DMatrix<f64>, // m × d, one frequency row per feature
    phases: DVector<f64>,      // m entries in [0, 2π)
    bandwidth: f64,
    window_scale: f64,
    amplitude: f64,
    seed: u64,
}

/// Grid-probe estimates of the boundedness and decay constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Max of ‖Φ(x)‖ over the probe grid.
    pub kappa1_estimate: f64,
    /// Max over the probe grid and coordinates a of ‖∂_aΦ(x)‖².
    pub kappa2_estimate: f64,
    /// Max of ‖Φ(x)‖ over the boundary shell of the probe box.
    pub boundary_decay: f64,
    pub probe_count: usize,
}

/// Axis-aligned probe domain for [`FeatureMap::verify_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ProbeBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "probe box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFiniteInput("probe box bound".into()));
            }
            if lo >= hi {
                return Err(Error::InvalidParameter(format!(
                    "degenerate probe box: lower {lo} >= upper {hi}"
                )));
            }
        }
        Ok(ProbeBox { lower, upper })
    }

    /// Centered cube [−half, half]^d.
    pub fn centered(dim: usize, half: f64) -> Result<Self> {
        ProbeBox::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Serialized form: frequencies and phases are regenerated from the seed,
/// never stored.
#[derive(Serialize, Deserialize)]
struct PersistedFeatureMap {
    d: usize,
    m: usize,
    bandwidth: f64,
    window_scale: f64,
    seed: u64,
    amplitude: f64,
}

impl FeatureMap {
    /// Draws a feature map with the default amplitude √(2/m).
    ///
    /// Frequencies are i.i.d. N(0, 1/bandwidth²), phases i.i.d. uniform on
    /// [0, 2π); the draw is deterministic given `seed`.
    pub fn new(
        dim_input: usize,
        dim_feature: usize,
        bandwidth: f64,
        window_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        let amplitude = (2.0 / dim_feature.max(1) as f64).sqrt();
        FeatureMap::with_amplitude(dim_input, dim_feature, bandwidth, window_scale, seed, amplitude)
    }

    /// As [`FeatureMap::new`] but with an explicit global scale.
    pub fn with_amplitude(
        dim_input: usize,
        dim_feature: usize,
        bandwidth: f64,
        window_scale: f64,
        seed: u64,
        amplitude: f64,
    ) -> Result<Self> {
        if dim_input == 0 || dim_feature == 0 {
            return Err(Error::InvalidParameter(format!(
                "feature map dimensions must be positive, got d={dim_input}, m={dim_feature}"
            )));
        }
        for (name, v) in [
            ("bandwidth", bandwidth),
            ("window_scale", window_scale),
            ("amplitude", amplitude),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / bandwidth)
            .map_err(|e| Error::InvalidParameter(format!("frequency distribution: {e}")))?;

        // Row-major draw order so the stream layout is part of the contract.
        let mut frequencies = DMatrix::zeros(dim_feature, dim_input);
        for j in 0..dim_feature {
            for a in 0..dim_input {
                frequencies[(j, a)] = normal.sample(&mut rng);
            }
        }
        let phases =
            DVector::from_fn(dim_feature, |_, _| rng.random_range(0.0..std::f64::consts::TAU));

        Ok(FeatureMap {
            dim_input,
            dim_feature,
            frequencies,
            phases,
            bandwidth,
            window_scale,
            amplitude,
            seed,
        })
    }

    pub fn dim_input(&self) -> usize {
        self.dim_input
    }

    pub fn dim_feature(&self) -> usize {
        self.dim_feature
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn window_scale(&self) -> f64 {
        self.window_scale
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frequencies(&self) -> &DMatrix<f64> {
        &self.frequencies
    }

    pub fn phases(&self) -> &DVector<f64> {
        &self.phases
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim_input {
            return Err(Error::ShapeMismatch(format!(
                "point has dimension {}, feature map expects {}",
                x.len(),
                self.dim_input
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("point coordinate".into()));
        }
        Ok(())
    }

    fn envelope(&self, x: &DVector<f64>) -> f64 {
        (-x.norm_squared() / (2.0 * self.window_scale * self.window_scale)).exp()
    }

    /// Evaluates Φ(x) ∈ R^m.
    pub fn evaluate(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        let xv = DVector::from_column_slice(x);
        let env = self.envelope(&xv);
        let scale = self.amplitude * env;
        let mut theta = &self.frequencies * &xv;
        theta += &self.phases;
        Ok(theta.map(|t| scale * t.cos()))
    }

    /// Evaluates the Jacobian JΦ(x) ∈ R^{d×m}, entry (a, j) = ∂Φ_j/∂x_a.
    ///
    /// For any coefficient vector f, the gradient of f(x) = ⟨f, Φ(x)⟩ is
    /// JΦ(x)·f.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let xv = DVector::from_column_slice(x);
        let env = self.envelope(&xv);
        let scale = self.amplitude * env;
        let inv_w2 = 1.0 / (self.window_scale * self.window_scale);

        let mut theta = &self.frequencies * &xv;
        theta += &self.phases;

        // Product rule: envelope gradient −x_a/σ_w² times cos, plus the
        // oscillation gradient −Ω_{j,a} sin.
        let mut jac = DMatrix::zeros(self.dim_input, self.dim_feature);
        for j in 0..self.dim_feature {
            let (sin_t, cos_t) = theta[j].sin_cos();
            for a in 0..self.dim_input {
                jac[(a, j)] =
                    scale * (-xv[a] * inv_w2 * cos_t - self.frequencies[(j, a)] * sin_t);
            }
        }
        Ok(jac)
    }

    /// Probes a tensor grid over `probe_box` and reports the observed
    /// boundedness constants and boundary decay.
    pub fn verify_assumptions(
        &self,
        probe_box: &ProbeBox,
        grid_points_per_axis: usize,
    ) -> Result<AssumptionReport> {
        if probe_box.dim() != self.dim_input {
            return Err(Error::ShapeMismatch(format!(
                "probe box dimension {} does not match feature map dimension {}",
                probe_box.dim(),
                self.dim_input
            )));
        }
        if grid_points_per_axis < 2 {
            return Err(Error::InvalidParameter(
                "grid_points_per_axis must be at least 2".into(),
            ));
        }
        let d = self.dim_input;
        let total = (grid_points_per_axis as u64)
            .checked_pow(d as u32)
            .filter(|&t| t <= 100_000_000)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "probe grid of {grid_points_per_axis}^{d} points is too large"
                ))
            })? as usize;

        let mut kappa1: f64 = 0.0;
        let mut kappa2: f64 = 0.0;
        let mut boundary: f64 = 0.0;
        let mut index = vec![0usize; d];
        let mut point = vec![0.0f64; d];

        for _ in 0..total {
            let mut on_boundary = false;
            for a in 0..d {
                let t = index[a] as f64 / (grid_points_per_axis - 1) as f64;
                point[a] = probe_box.lower[a] + t * (probe_box.upper[a] - probe_box.lower[a]);
                on_boundary |= index[a] == 0 || index[a] == grid_points_per_axis - 1;
            }

            let phi_norm = self.evaluate(&point)?.norm();
            kappa1 = kappa1.max(phi_norm);
            if on_boundary {
                boundary = boundary.max(phi_norm);
            }

            let jac = self.jacobian(&point)?;
            for a in 0..d {
                kappa2 = kappa2.max(jac.row(a).norm_squared());
            }

            // Odometer increment over the tensor grid.
            for slot in index.iter_mut() {
                *slot += 1;
                if *slot < grid_points_per_axis {
                    break;
                }
                *slot = 0;
            }
        }

        Ok(AssumptionReport {
            kappa1_estimate: kappa1,
            kappa2_estimate: kappa2,
            boundary_decay: boundary,
            probe_count: total,
        })
    }

    /// Serializes the construction parameters as JSON. Frequencies and
    /// phases are regenerated from the seed on load, never stored.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PersistedFeatureMap {
            d: self.dim_input,
            m: self.dim_feature,
            bandwidth: self.bandwidth,
            window_scale: self.window_scale,
            seed: self.seed,
            amplitude: self.amplitude,
        })
        .expect("feature map parameters are always serializable")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let p: PersistedFeatureMap = serde_json::from_str(json)?;
        FeatureMap::with_amplitude(p.d, p.m, p.bandwidth, p.window_scale, p.seed, p.amplitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scalar re-implementation of the feature formula.
    fn phi_scalar(fm: &FeatureMap, x: &[f64], j: usize) -> f64 {
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        let env = (-norm_sq / (2.0 * fm.window_scale() * fm.window_scale())).exp();
        let mut arg = fm.phases()[j];
        for (a, xa) in x.iter().enumerate() {
            arg += fm.frequencies()[(j, a)] * xa;
        }
        fm.amplitude() * env * arg.cos()
    }

    #[test]
    fn feature_map_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<FeatureMap>();
    }

    #[test]
    fn construction_is_deterministic() {
        let a = FeatureMap::new(1, 4, 1.0, 10.0, 7).unwrap();
        let b = FeatureMap::new(1, 4, 1.0, 10.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frequencies(), b.frequencies());
        assert_eq!(a.phases(), b.phases());
    }

    #[test]
    fn frequency_shape_contract() {
        let fm = FeatureMap::new(2, 64, 0.5, 5.0, 1).unwrap();
        assert_eq!(fm.frequencies().shape(), (64, 2));
        assert_eq!(fm.phases().len(), 64);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(matches!(
            FeatureMap::new(1, 0, 1.0, 1.0, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            FeatureMap::new(0, 4, 1.0, 1.0, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            FeatureMap::new(1, 4, -1.0, 1.0, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            FeatureMap::new(1, 4, 1.0, 0.0, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn evaluate_at_origin_is_cos_of_phase() {
        let fm = FeatureMap::new(2, 8, 1.0, 3.0, 11).unwrap();
        let phi = fm.evaluate(&[0.0, 0.0]).unwrap();
        for j in 0..8 {
            let expected = fm.amplitude() * fm.phases()[j].cos();
            assert!((phi[j] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_decay_far_from_origin() {
        let fm = FeatureMap::new(1, 16, 1.0, 2.0, 5).unwrap();
        let x = [10.0 * fm.window_scale()];
        let bound = fm.amplitude() * (16f64).sqrt();
        let norm = fm.evaluate(&x).unwrap().norm();
        assert!(norm <= 1e-20 * bound, "norm {norm} exceeds decay bound");
    }

    #[test]
    fn evaluate_matches_scalar_reimplementation() {
        let fm = FeatureMap::new(2, 8, 0.7, 4.0, 3).unwrap();
        let x = [0.31, -1.22];
        let phi = fm.evaluate(&x).unwrap();
        for j in 0..8 {
            let expected = phi_scalar(&fm, &x, j);
            let rel = (phi[j] - expected).abs() / expected.abs().max(1e-300);
            assert!(rel < 1e-12, "feature {j}: {} vs {expected}", phi[j]);
        }
    }

    #[test]
    fn evaluate_rejects_bad_points() {
        let fm = FeatureMap::new(2, 4, 1.0, 1.0, 0).unwrap();
        assert!(matches!(fm.evaluate(&[1.0]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(
            fm.evaluate(&[1.0, f64::NAN]),
            Err(Error::NonFiniteInput(_))
        ));
    }

    #[test]
    fn jacobian_closed_form_at_origin() {
        let fm = FeatureMap::new(3, 6, 1.3, 2.0, 17).unwrap();
        let jac = fm.jacobian(&[0.0, 0.0, 0.0]).unwrap();
        // Envelope gradient vanishes at the origin, leaving −c·sin(b_j)·Ω_j.
        for j in 0..6 {
            for a in 0..3 {
                let expected = -fm.amplitude() * fm.phases()[j].sin() * fm.frequencies()[(j, a)];
                assert!((jac[(a, j)] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobian_zero_frequency_row_is_stationary_at_origin() {
        let mut fm = FeatureMap::new(2, 4, 1.0, 3.0, 9).unwrap();
        fm.frequencies.fill_row(2, 0.0);
        let jac = fm.jacobian(&[0.0, 0.0]).unwrap();
        assert_eq!(jac[(0, 2)], 0.0);
        assert_eq!(jac[(1, 2)], 0.0);
    }

    fn finite_difference_jacobian(fm: &FeatureMap, x: &[f64], step: f64) -> DMatrix<f64> {
        let d = fm.dim_input();
        let m = fm.dim_feature();
        let mut fd = DMatrix::zeros(d, m);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for a in 0..d {
            xp[a] = x[a] + step;
            xm[a] = x[a] - step;
            let hi = fm.evaluate(&xp).unwrap();
            let lo = fm.evaluate(&xm).unwrap();
            for j in 0..m {
                fd[(a, j)] = (hi[j] - lo[j]) / (2.0 * step);
            }
            xp[a] = x[a];
            xm[a] = x[a];
        }
        fd
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let fm = FeatureMap::new(2, 16, 0.8, 3.0, 21).unwrap();
        let points = [[0.4, -0.9], [1.7, 0.2], [-0.3, -0.1]];
        for x in &points {
            let ana = fm.jacobian(x).unwrap();
            let fd = finite_difference_jacobian(&fm, x, 1e-5);
            for j in 0..16 {
                for a in 0..2 {
                    let err = (ana[(a, j)] - fd[(a, j)]).abs() / (1.0 + ana[(a, j)].abs());
                    assert!(err < 1e-5, "entry ({a},{j}): {} vs {}", ana[(a, j)], fd[(a, j)]);
                }
            }
        }
    }

    #[test]
    fn verify_assumptions_respects_global_bound() {
        let fm = FeatureMap::new(1, 8, 1.0, 2.0, 33).unwrap();
        let probe = ProbeBox::centered(1, 5.0 * fm.window_scale()).unwrap();
        let report = fm.verify_assumptions(&probe, 101).unwrap();
        let bound = fm.amplitude() * (8f64).sqrt();
        assert!(report.kappa1_estimate <= bound + 1e-12);
        assert!(report.kappa2_estimate.is_finite() && report.kappa2_estimate >= 0.0);
        assert_eq!(report.probe_count, 101);
    }

    #[test]
    fn verify_assumptions_boundary_decay() {
        let fm = FeatureMap::new(2, 8, 1.0, 1.5, 4).unwrap();
        let probe = ProbeBox::centered(2, 8.0 * fm.window_scale()).unwrap();
        let report = fm.verify_assumptions(&probe, 17).unwrap();
        let bound = fm.amplitude() * (8f64).sqrt();
        assert!(report.boundary_decay <= 1e-10 * bound);
    }

    #[test]
    fn kappa2_matches_brute_force_grid_max() {
        let fm = FeatureMap::new(1, 8, 1.0, 2.0, 2).unwrap();
        let probe = ProbeBox::new(vec![-3.0], vec![3.0]).unwrap();
        let report = fm.verify_assumptions(&probe, 1001).unwrap();

        let mut brute: f64 = 0.0;
        for i in 0..1001 {
            let x = -3.0 + 6.0 * i as f64 / 1000.0;
            let jac = fm.jacobian(&[x]).unwrap();
            brute = brute.max(jac.row(0).norm_squared());
        }
        assert_eq!(report.kappa2_estimate, brute);
    }

    #[test]
    fn degenerate_probe_box_is_rejected() {
        assert!(matches!(
            ProbeBox::new(vec![1.0], vec![1.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn json_round_trip_reproduces_map_bitwise() {
        let fm = FeatureMap::new(3, 12, 0.4, 6.0, 123).unwrap();
        let restored = FeatureMap::from_json(&fm.to_json()).unwrap();
        assert_eq!(fm, restored);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(50))]

            #[test]
            fn jacobian_finite_difference_everywhere(
                seed in 0u64..1000,
                d in 1usize..=3,
                m in 1usize..=64,
                coords in proptest::collection::vec(-2.0f64..2.0, 3),
            ) {
                let fm = FeatureMap::new(d, m, 1.0, 3.0, seed).unwrap();
                let x = &coords[..d];
                let ana = fm.jacobian(x).unwrap();
                let fd = finite_difference_jacobian(&fm, x, 1e-5);
                for j in 0..m {
                    for a in 0..d {
                        let err = (ana[(a, j)] - fd[(a, j)]).abs() / (1.0 + ana[(a, j)].abs());
                        prop_assert!(err < 1e-5);
                    }
                }
            }

            #[test]
            fn norm_obeys_envelope_decay(
                seed in 0u64..1000,
                k in 1.0f64..6.0,
                direction in -1.0f64..1.0,
            ) {
                let fm = FeatureMap::new(1, 16, 1.0, 2.0, seed).unwrap();
                let x = [k * fm.window_scale() * if direction >= 0.0 { 1.0 } else { -1.0 }];
                let bound = fm.amplitude() * 4.0 * (-k * k / 2.0).exp();
                prop_assert!(fm.evaluate(&x).unwrap().norm() <= bound * (1.0 + 1e-12));
            }
        }
    }
}
