use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use projreg::analysis::{log_grid, penalty_density_sweep};
use projreg::data::{dataset_from_idx, decode_idx_images, encode_idx_images, IdxImages};
use projreg::numerics::Rng;
use projreg::penalty::{evaluate, PenaltyFamily, PenaltySpec};
use projreg::sampler::{draw_masks, SamplerConfig, SelectionMode};

fn uniform_threshold(experiments: usize) -> SamplerConfig {
    SamplerConfig {
        experiments,
        threshold: 0.5,
        selection: SelectionMode::UniformThreshold,
        ..SamplerConfig::default()
    }
}

#[test]
fn counter_normalized_penalty_is_invariant_to_experiment_count() {
    let mut rng = Rng::new(11);
    let w: Vec<f64> = (0..1000).map(|_| rng.normal()).collect();
    let spec = PenaltySpec::new(PenaltyFamily::ProposedSqrt, 1.0);
    let value = |s: usize| {
        let draw = draw_masks(
            &w,
            &uniform_threshold(s),
            None,
            &mut Rng::new(3).substream(s as u64),
        )
        .unwrap();
        (
            draw.counter.max(),
            evaluate(&w, &spec, &draw.masks, &draw.counter)
                .unwrap()
                .value,
        )
    };
    // The largest of N binomial counts carries a √S excess over S(1−T), so
    // the normalized value drifts slowly upward in S; each doubling stays
    // well inside 10%.
    let mut prev = value(200);
    for s in [400, 800, 1600] {
        let next = value(s);
        assert!(
            (next.1 / prev.1 - 1.0).abs() < 0.10,
            "S={s}: {} vs {}",
            next.1,
            prev.1
        );
        let count_ratio = next.0 as f64 / prev.0 as f64;
        assert!(
            (count_ratio - 2.0).abs() < 0.2,
            "S={s}: count ratio {count_ratio}"
        );
        prev = next;
    }
}

#[test]
fn sweep_l1_grows_and_l2_stays_at_one() {
    let cfg = SamplerConfig {
        experiments: 20,
        ..SamplerConfig::default()
    };
    let rows =
        penalty_density_sweep(1000, &log_grid(0.001, 1.0, 40), &cfg, &mut Rng::new(1)).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].r_l1 >= pair[0].r_l1);
    }
    for row in &rows {
        assert_abs_diff_eq!(row.r_l2, 1.0, epsilon = 1e-12);
    }
    let last = rows.last().unwrap();
    assert_eq!(last.density, 1.0);
    assert_abs_diff_eq!(last.r_l1, 1000f64.sqrt(), epsilon = 1e-9);
}

proptest! {
    #[test]
    fn loaded_features_stay_in_unit_range(pixels in prop::collection::vec(any::<u8>(), 12), labels in prop::collection::vec(0u8..10, 3)) {
        let images = IdxImages { count: 3, rows: 2, cols: 2, pixels };
        let bytes = encode_idx_images(&images);
        let decoded = decode_idx_images(&bytes).unwrap();
        prop_assert_eq!(encode_idx_images(&decoded), bytes);
        let data = dataset_from_idx(&decoded, &labels).unwrap();
        prop_assert!(data.features.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
