//! Property tests over the public surface: randomized inputs for the
//! invariants that hold exactly (or to stated tolerance) everywhere.

use ksmi::bench::auc_from_scores;
use ksmi::estimator::{mc_error_bound, project_samples};
use ksmi::gaussmodel::{make_isotropic_model, projected_gaussian_mi, sample_joint};
use ksmi::knn_mi::{ksg_mi, KsgConfig};
use ksmi::matkit::{
    digamma, matrix_sqrt_psd, sample_gaussian_matrix, sample_stiefel, Matrix, RngStream,
};
use ksmi::neural_mi::{dv_value, ReluNet};
use ksmi::PairedSamples;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_frames_are_orthonormal(seed in 0u64..1_000_000, d in 1usize..12, k_off in 0usize..12) {
        let k = 1 + k_off % d;
        let mut rng = RngStream::derived(seed, "prop/frames", 0);
        let frame = sample_stiefel(k, d, &mut rng).unwrap();
        prop_assert!(frame.orthonormality_error() < 1e-10);
    }

    #[test]
    fn digamma_recurrence(x in 1e-3f64..50.0) {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        prop_assert!((lhs - 1.0 / x).abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_squares_back(seed in 0u64..1_000_000, d in 1usize..7) {
        let mut rng = RngStream::derived(seed, "prop/psd", 0);
        let g = sample_gaussian_matrix(d, d, &mut rng).unwrap();
        let psd = g.mul(&g.transpose()).unwrap();
        let s = matrix_sqrt_psd(&psd).unwrap();
        let err = s.mul(&s).unwrap().sub(&psd).unwrap().max_abs();
        prop_assert!(err < 1e-8 * psd.max_abs().max(1.0));
    }

    #[test]
    fn auc_swap_and_range(null in prop::collection::vec(-5.0f64..5.0, 1..40),
                          dep in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let fwd = auc_from_scores(&null, &dep).unwrap();
        let rev = auc_from_scores(&dep, &null).unwrap();
        prop_assert!((0.0..=1.0).contains(&fwd));
        prop_assert!((fwd + rev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dv_shift_invariance(seed in 0u64..1_000_000, shift in -20.0f64..20.0) {
        let mut rng = RngStream::derived(seed, "prop/dv", 0);
        let mut net = ReluNet::init(2, 4, 1.0, &mut rng);
        let pos = sample_gaussian_matrix(12, 2, &mut rng).unwrap();
        let neg = sample_gaussian_matrix(12, 2, &mut rng).unwrap();
        let before = dv_value(&net, &pos, &neg).unwrap();
        net.b0 += shift;
        let after = dv_value(&net, &pos, &neg).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn mc_bound_scales_as_inverse_sqrt_m(k in 1usize..4, d in 2usize..30, m in 1usize..10_000) {
        let b1 = mc_error_bound(k.min(d), d, d, m, 1.3, 0.8, 2.0);
        let b4 = mc_error_bound(k.min(d), d, d, 4 * m, 1.3, 0.8, 2.0);
        prop_assert!((b1 / b4 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn projection_never_beats_full_mi(seed in 0u64..100_000, d in 2usize..7) {
        let model = make_isotropic_model(d, 0.6).unwrap();
        let mut rng = RngStream::derived(seed, "prop/frames-ub", 0);
        let a = sample_stiefel(1, d, &mut rng).unwrap();
        let b = sample_stiefel(1, d, &mut rng).unwrap();
        let projected = projected_gaussian_mi(&model, &a, &b).unwrap();
        let full = ksmi::gaussmodel::gaussian_mi(&model).unwrap();
        prop_assert!(projected <= full + 1e-10);
    }

    #[test]
    fn ksg_row_shuffle_invariance(seed in 0u64..100_000, rot in 1usize..60) {
        let n = 80;
        let model = make_isotropic_model(2, 0.4).unwrap();
        let mut rng = RngStream::derived(seed, "prop/ksg", 0);
        let s = sample_joint(&model, n, &mut rng).unwrap();
        let base = ksg_mi(&s, &KsgConfig::default()).unwrap();
        let rot = rot % (n - 1) + 1;
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let mut x = Matrix::zeros(n, 2);
        let mut y = Matrix::zeros(n, 2);
        for (dst, &src) in perm.iter().enumerate() {
            for c in 0..2 {
                x.set(dst, c, s.x().get(src, c));
                y.set(dst, c, s.y().get(src, c));
            }
        }
        let shuffled = PairedSamples::new(x, y).unwrap();
        let est = ksg_mi(&shuffled, &KsgConfig::default()).unwrap();
        prop_assert_eq!(est.to_bits(), base.to_bits());
    }

    #[test]
    fn projected_rows_contract(seed in 0u64..100_000, d in 2usize..8, k_off in 0usize..8) {
        let k = 1 + k_off % d;
        let mut rng = RngStream::derived(seed, "prop/contract", 0);
        let x = sample_gaussian_matrix(20, d, &mut rng).unwrap();
        let y = sample_gaussian_matrix(20, d, &mut rng).unwrap();
        let s = PairedSamples::new(x, y).unwrap();
        let a = sample_stiefel(k, d, &mut rng).unwrap();
        let b = sample_stiefel(k, d, &mut rng).unwrap();
        let p = project_samples(&s, &a, &b).unwrap();
        for i in 0..20 {
            let orig: f64 = s.x().row(i).iter().map(|v| v * v).sum::<f64>();
            let proj: f64 = p.x().row(i).iter().map(|v| v * v).sum::<f64>();
            prop_assert!(proj <= orig + 1e-9);
        }
    }
}
