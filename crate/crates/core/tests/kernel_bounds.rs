//! The kernelized discrepancy from quadrature embeddings never exceeds the
//! exact 1-D value, whatever the feature map: restricting the critic space
//! can only lose discriminating power.

use rksd::embeddings::{DensitySide, DistributionEmbedding};
use rksd::oracle1d::GridDensity;
use rksd::{discrepancy_value, mean_difference, sobolev_1d, FeatureMap};

#[test]
fn kernel_value_stays_below_exact_value_across_feature_maps() {
    let g = GridDensity::linear_perturbation(0.5, 4001).unwrap();
    let exact = sobolev_1d(&g).unwrap();
    let lambda = 1e-6;

    for (m, bandwidth, window, seed) in [
        (4usize, 0.5f64, 5.0f64, 1u64),
        (16, 0.25, 2.0, 2),
        (16, 2.0, 20.0, 3),
        (32, 1.0, 5.0, 4),
        (64, 0.5, 10.0, 5),
        (64, 4.0, 1.0, 6),
    ] {
        let fm = FeatureMap::new(1, m, bandwidth, window, seed).unwrap();
        let emb_p = DistributionEmbedding::from_quadrature(&fm, &g, DensitySide::P).unwrap();
        let emb_q = DistributionEmbedding::from_quadrature(&fm, &g, DensitySide::Q).unwrap();
        let delta = mean_difference(&emb_p.mu, &emb_q.mu).unwrap();
        let value = discrepancy_value(&emb_q.gramian, &delta, lambda).unwrap();
        assert!(
            value <= exact + 1e-3,
            "m={m} bw={bandwidth} window={window} seed={seed}: {value} vs exact {exact}"
        );
    }
}
