//! L1, L2 and projected penalties with their (sub)gradients.
//!
//! Projected penalties are differentiated with the masks held fixed: the
//! indicator has no useful derivative, so only `w` carries gradient.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{central_difference, ensure_finite, l1_norm, l2_norm, max_relative_error};
use crate::sampler::{IndexCounter, ProjectionMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyFamily {
    L1,
    L2,
    /// `Σ_s ||w ⊙ I_s||₂`
    ProposedSqrt,
    /// `Σ_s ||w ⊙ I_s||₂²`
    ProposedSquared,
}

impl PenaltyFamily {
    pub fn is_projected(self) -> bool {
        matches!(
            self,
            PenaltyFamily::ProposedSqrt | PenaltyFamily::ProposedSquared
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PenaltyFamily::L1 => "l1",
            PenaltyFamily::L2 => "l2",
            PenaltyFamily::ProposedSqrt => "proposed-sqrt",
            PenaltyFamily::ProposedSquared => "proposed-squared",
        }
    }
}

impl fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PenaltyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(PenaltyFamily::L1),
            "l2" => Ok(PenaltyFamily::L2),
            "proposed-sqrt" | "sqrt" => Ok(PenaltyFamily::ProposedSqrt),
            "proposed-squared" | "squared" | "proposed" => Ok(PenaltyFamily::ProposedSquared),
            other => Err(Error::InvalidConfig(format!("unknown penalty `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub family: PenaltyFamily,
    /// Base weight λ.
    pub lambda: f64,
    /// Scale λ by `counter_scale / max_j counts[j]`.
    pub normalize_by_counter: bool,
    pub counter_scale: f64,
}

impl PenaltySpec {
    pub fn new(family: PenaltyFamily, lambda: f64) -> Self {
        PenaltySpec {
            family,
            lambda,
            normalize_by_counter: true,
            counter_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty weight must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.counter_scale > 0.0 && self.counter_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "counter scale must be positive, got {}",
                self.counter_scale
            )));
        }
        Ok(())
    }

    /// λ′: the base weight divided by the counter's L∞ norm when enabled.
    /// Falls back to λ when nothing was selected.
    pub fn effective_lambda(&self, counter: &IndexCounter) -> f64 {
        let max = counter.max();
        if self.normalize_by_counter && max > 0 {
            self.counter_scale * self.lambda / max as f64
        } else {
            self.lambda
        }
    }
}

impl Default for PenaltySpec {
    fn default() -> Self {
        PenaltySpec::new(PenaltyFamily::ProposedSquared, 1e-4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyResult {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub lambda_effective: f64,
    pub masks_used: Vec<ProjectionMask>,
}

/// `λ·Σ|w_j|`, gradient `λ·sign(w_j)` with `sign(0) = 0`.
pub fn penalty_l1(w: &[f64], lambda: f64) -> Result<PenaltyResult> {
    ensure_finite(w)?;
    let gradient = w
        .iter()
        .map(|&v| {
            if v > 0.0 {
                lambda
            } else if v < 0.0 {
                -lambda
            } else {
                0.0
            }
        })
        .collect();
    Ok(PenaltyResult {
        value: lambda * l1_norm(w),
        gradient,
        lambda_effective: lambda,
        masks_used: Vec::new(),
    })
}

/// `λ·||w||₂`, gradient `λ·w/||w||₂` (zero at the origin).
pub fn penalty_l2(w: &[f64], lambda: f64) -> Result<PenaltyResult> {
    ensure_finite(w)?;
    let norm = l2_norm(w);
    let gradient = if norm > 0.0 {
        w.iter().map(|v| lambda * v / norm).collect()
    } else {
        vec![0.0; w.len()]
    };
    Ok(PenaltyResult {
        value: lambda * norm,
        gradient,
        lambda_effective: lambda,
        masks_used: Vec::new(),
    })
}

fn check_masks(w: &[f64], masks: &[ProjectionMask]) -> Result<()> {
    match masks.iter().find(|m| m.len() != w.len()) {
        Some(m) => Err(Error::LengthMismatch {
            expected: w.len(),
            found: m.len(),
        }),
        None => Ok(()),
    }
}

/// Projected penalty value with an explicit λ′; masks are assumed to match.
fn projected_value(w: &[f64], masks: &[ProjectionMask], squared: bool, lambda_eff: f64) -> f64 {
    let total: f64 = masks
        .iter()
        .map(|m| {
            let sq = m.projected_sq_norm(w);
            if squared {
                sq
            } else {
                sq.sqrt()
            }
        })
        .sum();
    lambda_eff * total
}

/// Sum over the masks of the projected L2 norm (sqrt variant) or its square,
/// weighted by λ′.
pub fn penalty_proposed(
    w: &[f64],
    masks: &[ProjectionMask],
    counter: &IndexCounter,
    spec: &PenaltySpec,
) -> Result<PenaltyResult> {
    if !spec.family.is_projected() {
        return Err(Error::InvalidConfig(format!(
            "penalty_proposed called with family {}",
            spec.family
        )));
    }
    ensure_finite(w)?;
    check_masks(w, masks)?;
    if counter.counts().len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            found: counter.counts().len(),
        });
    }
    let lambda_eff = spec.effective_lambda(counter);
    let squared = spec.family == PenaltyFamily::ProposedSquared;
    let mut gradient = vec![0.0; w.len()];
    let mut total = 0.0;
    for mask in masks {
        let sq = mask.projected_sq_norm(w);
        if squared {
            total += sq;
            for &j in mask.selected() {
                gradient[j] += 2.0 * lambda_eff * w[j];
            }
        } else {
            let norm = sq.sqrt();
            total += norm;
            if norm > 0.0 {
                for &j in mask.selected() {
                    gradient[j] += lambda_eff * w[j] / norm;
                }
            }
        }
    }
    Ok(PenaltyResult {
        value: lambda_eff * total,
        gradient,
        lambda_effective: lambda_eff,
        masks_used: masks.to_vec(),
    })
}

/// Dispatches on the family. L1/L2 ignore `masks` and `counter`.
pub fn evaluate(
    w: &[f64],
    spec: &PenaltySpec,
    masks: &[ProjectionMask],
    counter: &IndexCounter,
) -> Result<PenaltyResult> {
    match spec.family {
        PenaltyFamily::L1 => penalty_l1(w, spec.lambda),
        PenaltyFamily::L2 => penalty_l2(w, spec.lambda),
        _ => penalty_proposed(w, masks, counter, spec),
    }
}

/// Maximum relative error between the analytic gradient and central finite
/// differences (step `1e-6·max(1, |w_j|)`), masks and λ′ held fixed.
pub fn penalty_gradient_check(
    w: &[f64],
    masks: &[ProjectionMask],
    spec: &PenaltySpec,
) -> Result<f64> {
    let counter = IndexCounter::from_masks(w.len(), masks)?;
    let analytic = evaluate(w, spec, masks, &counter)?;
    let lambda_eff = analytic.lambda_effective;
    let value = |x: &[f64]| match spec.family {
        PenaltyFamily::L1 => spec.lambda * l1_norm(x),
        PenaltyFamily::L2 => spec.lambda * l2_norm(x),
        PenaltyFamily::ProposedSqrt => projected_value(x, masks, false, lambda_eff),
        PenaltyFamily::ProposedSquared => projected_value(x, masks, true, lambda_eff),
    };
    let numeric = central_difference(value, w, 1e-6);
    Ok(max_relative_error(&analytic.gradient, &numeric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn mask(bits: &[u8]) -> ProjectionMask {
        ProjectionMask::from_indicators(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn raw(family: PenaltyFamily, lambda: f64) -> PenaltySpec {
        PenaltySpec {
            normalize_by_counter: false,
            ..PenaltySpec::new(family, lambda)
        }
    }

    fn proposed(w: &[f64], masks: &[ProjectionMask], spec: &PenaltySpec) -> PenaltyResult {
        let counter = IndexCounter::from_masks(w.len(), masks).unwrap();
        penalty_proposed(w, masks, &counter, spec).unwrap()
    }

    #[test]
    fn l1_examples() {
        let r = penalty_l1(&[3.0, -4.0], 1.0).unwrap();
        assert_eq!(r.value, 7.0);
        let r = penalty_l1(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!((r.value, r.gradient), (0.0, vec![0.0, 0.0]));
        assert_eq!(penalty_l1(&[3.0, -4.0], 0.5).unwrap().gradient, [0.5, -0.5]);
    }

    #[test]
    fn l2_examples() {
        let r = penalty_l2(&[3.0, 4.0], 1.0).unwrap();
        assert_eq!(r.value, 5.0);
        assert_abs_diff_eq!(r.gradient[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.gradient[1], 0.8, epsilon = 1e-15);
        let r = penalty_l2(&[0.0; 3], 1.0).unwrap();
        assert_eq!((r.value, r.gradient), (0.0, vec![0.0; 3]));
    }

    #[test]
    fn basis_masks_reduce_to_l1() {
        let w = [3.0, -4.0];
        let r = proposed(
            &w,
            &[mask(&[1, 0]), mask(&[0, 1])],
            &raw(PenaltyFamily::ProposedSqrt, 1.0),
        );
        assert_eq!(r.value, 7.0);
    }

    #[test]
    fn full_mask_reduces_to_l2() {
        let r = proposed(
            &[3.0, -4.0],
            &[mask(&[1, 1])],
            &raw(PenaltyFamily::ProposedSqrt, 1.0),
        );
        assert_eq!(r.value, 5.0);
    }

    #[test]
    fn squared_variant_examples() {
        let w = [3.0, -4.0];
        let r = proposed(
            &w,
            &[mask(&[1, 0]), mask(&[1, 1])],
            &raw(PenaltyFamily::ProposedSquared, 1.0),
        );
        assert_eq!(r.value, 34.0);
        let r = proposed(
            &w,
            &[mask(&[1, 0])],
            &raw(PenaltyFamily::ProposedSquared, 0.5),
        );
        assert_eq!(r.gradient, [3.0, 0.0]);
    }

    #[test]
    fn counter_normalization() {
        let w = [3.0, -4.0];
        let masks = [mask(&[1, 0]), mask(&[1, 1])];
        let spec = PenaltySpec::new(PenaltyFamily::ProposedSquared, 1.0);
        let r = proposed(&w, &masks, &spec);
        // coordinate 0 is selected twice
        assert_eq!(r.lambda_effective, 0.5);
        assert_eq!(r.value, 17.0);
        assert_eq!(r.masks_used.len(), 2);
    }

    #[test]
    fn empty_counter_falls_back_to_lambda() {
        let w = [1.0, 2.0];
        let spec = PenaltySpec::new(PenaltyFamily::ProposedSqrt, 0.7);
        let r = proposed(&w, &[mask(&[0, 0])], &spec);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.lambda_effective, 0.7);
        assert_eq!(r.gradient, [0.0, 0.0]);
    }

    #[test]
    fn mask_length_mismatch() {
        let w = [1.0, 2.0, 3.0];
        let counter = IndexCounter::new(3);
        let r = penalty_proposed(&w, &[mask(&[1, 0])], &counter, &PenaltySpec::default());
        assert!(matches!(
            r,
            Err(Error::LengthMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn sqrt_singular_mask_contributes_zero_gradient() {
        let w = [0.0, 0.0, 2.0];
        let r = proposed(
            &w,
            &[mask(&[1, 1, 0]), mask(&[0, 0, 1])],
            &raw(PenaltyFamily::ProposedSqrt, 1.0),
        );
        assert_eq!(r.gradient, [0.0, 0.0, 1.0]);
        assert_eq!(r.value, 2.0);
    }

    fn random_masks(n: usize, count: usize, rng: &mut Rng) -> Vec<ProjectionMask> {
        (0..count)
            .map(|_| {
                let bits: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.4).collect();
                ProjectionMask::from_indicators(&bits)
            })
            .collect()
    }

    #[test]
    fn gradient_checks() {
        let mut rng = Rng::new(7);
        let w: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
        let masks = random_masks(50, 8, &mut rng);
        let err = penalty_gradient_check(
            &w,
            &masks,
            &PenaltySpec::new(PenaltyFamily::ProposedSquared, 0.3),
        )
        .unwrap();
        assert!(err < 1e-6, "{err}");
        // keep away from zero so every projected norm is well above 1e-8
        let w: Vec<f64> = w.iter().map(|v| v.signum() * (v.abs() + 0.5)).collect();
        let err = penalty_gradient_check(
            &w,
            &masks,
            &PenaltySpec::new(PenaltyFamily::ProposedSqrt, 0.3),
        )
        .unwrap();
        assert!(err < 1e-5, "{err}");
        let err = penalty_gradient_check(&[3.0, 4.0], &[], &raw(PenaltyFamily::L2, 1.0)).unwrap();
        assert!(err < 1e-7, "{err}");
        let err = penalty_gradient_check(&w, &[], &raw(PenaltyFamily::L1, 0.2)).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    fn vec_and_masks() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<bool>>)> {
        (1usize..20).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..8),
            )
        })
    }

    fn to_masks(bits: &[Vec<bool>]) -> Vec<ProjectionMask> {
        bits.iter()
            .map(|b| ProjectionMask::from_indicators(b))
            .collect()
    }

    proptest! {
        #[test]
        fn penalties_are_non_negative((w, bits) in vec_and_masks(), lambda in 0.0f64..5.0) {
            let masks = to_masks(&bits);
            for family in [PenaltyFamily::L1, PenaltyFamily::L2, PenaltyFamily::ProposedSqrt, PenaltyFamily::ProposedSquared] {
                let spec = PenaltySpec::new(family, lambda);
                let counter = IndexCounter::from_masks(w.len(), &masks).unwrap();
                let r = evaluate(&w, &spec, &masks, &counter).unwrap();
                prop_assert!(r.value >= 0.0);
                prop_assert!(r.gradient.iter().all(|g| g.is_finite()));
            }
        }

        #[test]
        fn fixed_mask_homogeneity((w, bits) in vec_and_masks(), c in -4.0f64..4.0) {
            let masks = to_masks(&bits);
            let scaled: Vec<f64> = w.iter().map(|v| c * v).collect();
            let sqrt = raw(PenaltyFamily::ProposedSqrt, 1.0);
            let sq = raw(PenaltyFamily::ProposedSquared, 1.0);
            let a = proposed(&w, &masks, &sqrt).value;
            let b = proposed(&scaled, &masks, &sqrt).value;
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * b.abs().max(1.0));
            let a = proposed(&w, &masks, &sq).value;
            let b = proposed(&scaled, &masks, &sq).value;
            prop_assert!((b - c * c * a).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn sqrt_variant_is_subadditive((u, bits) in vec_and_masks(), seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let v: Vec<f64> = u.iter().map(|_| 10.0 * rng.normal()).collect();
            let masks = to_masks(&bits);
            let spec = raw(PenaltyFamily::ProposedSqrt, 1.0);
            let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let lhs = proposed(&sum, &masks, &spec).value;
            let rhs = proposed(&u, &masks, &spec).value + proposed(&v, &masks, &spec).value;
            prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn limiting_cases(w in prop::collection::vec(-10.0f64..10.0, 1..30)) {
            let n = w.len();
            let spec = raw(PenaltyFamily::ProposedSqrt, 1.0);
            let basis: Vec<ProjectionMask> = (0..n)
                .map(|j| ProjectionMask::from_sorted_indices(n, vec![j]).unwrap())
                .collect();
            let l1 = l1_norm(&w);
            prop_assert!((proposed(&w, &basis, &spec).value - l1).abs() <= 1e-12 * l1.max(1e-300));
            let l2 = l2_norm(&w);
            prop_assert!((proposed(&w, &[ProjectionMask::full(n)], &spec).value - l2).abs() <= 1e-12 * l2.max(1e-300));
        }

        #[test]
        fn adding_a_mask_never_decreases((w, bits) in vec_and_masks(), extra in prop::collection::vec(any::<bool>(), 20)) {
            let mut masks = to_masks(&bits);
            for family in [PenaltyFamily::ProposedSqrt, PenaltyFamily::ProposedSquared] {
                let spec = raw(family, 1.0);
                let before = proposed(&w, &masks, &spec).value;
                masks.push(ProjectionMask::from_indicators(&extra[..w.len()]));
                let after = proposed(&w, &masks, &spec).value;
                masks.pop();
                prop_assert!(after >= before);
            }
        }
    }

    #[test]
    fn homogeneity_exact_example() {
        let w = [1.5, -2.0, 0.25];
        let masks = [mask(&[1, 1, 0]), mask(&[0, 1, 1])];
        let spec = raw(PenaltyFamily::ProposedSquared, 2.0);
        let base = proposed(&w, &masks, &spec).value;
        let scaled: Vec<f64> = w.iter().map(|v| -3.0 * v).collect();
        assert_relative_eq!(
            proposed(&scaled, &masks, &spec).value,
            9.0 * base,
            max_relative = 1e-12
        );
    }
}
