// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Photon-count distributions and the thresholded readout fidelity.
//!
//! Detected counts are Poissonian with the protocol's mean (coherent-state
//! photodetection; deterministic efficiencies thin a Poissonian into a
//! Poissonian). Spectral diffusion produces convex mixtures of Poissonians.
//!
//! The readout fidelity for a threshold `M` is
//! `F = 1/2 [ P(dark, k<M) + 0.5 P(dark, k=M) + P(bright, k>M) + 0.5 P(bright, k=M) ]`
//! with the bright state being the one with the larger mean; the returned
//! threshold maximizes `F` (smallest such `M` on ties).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistributionKind {
    Poisson { mean: f64 },
    Mixture,
}

/// Discrete distribution over detected photon number `k`, truncated at a
/// support bound `k_max >= mean + 12 sqrt(mean)` (tail mass < 1e-10).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    /// `probabilities[k]` is the probability of detecting `k` photons.
    pub probabilities: Vec<f64>,
    pub kind: DistributionKind,
}

impl CountDistribution {
    pub fn prob(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn k_max(&self) -> usize {
        self.probabilities.len().saturating_sub(1)
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }
}

/// ln k! — exact product for small k, Stirling series beyond.
fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 20 {
        let mut acc = 0.0f64;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        return acc;
    }
    let x = k as f64;
    let x2 = x * x;
    (x + 0.5) * x.ln() - x + 0.5 * (std::f64::consts::TAU).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// Poisson distribution with the given mean over the truncated support.
pub fn poisson(mean: f64) -> CountDistribution {
    assert!(mean >= 0.0, "Poisson mean must be non-negative");
    if mean == 0.0 {
        return CountDistribution {
            probabilities: vec![1.0],
            kind: DistributionKind::Poisson { mean },
        };
    }
    let k_max = (mean + 12.0 * mean.sqrt()).ceil() as usize + 10;
    let ln_mean = mean.ln();
    let probabilities: Vec<f64> = (0..=k_max)
        .map(|k| (k as f64 * ln_mean - mean - ln_factorial(k)).exp())
        .collect();
    CountDistribution {
        probabilities,
        kind: DistributionKind::Poisson { mean },
    }
}

/// Poisson signal plus an additive detector dark-count mean (kept at zero in
/// the protocol pipelines; available for sensitivity studies).
pub fn poisson_with_dark(signal_mean: f64, dark_mean: f64) -> CountDistribution {
    poisson(signal_mean + dark_mean)
}

/// Pointwise convex combination of distributions.
pub fn mixture(weighted: &[(f64, CountDistribution)]) -> Result<CountDistribution> {
    let wsum: f64 = weighted.iter().map(|(w, _)| *w).sum();
    if weighted.iter().any(|(w, _)| *w < 0.0) || (wsum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(wsum));
    }
    let len = weighted
        .iter()
        .map(|(_, d)| d.probabilities.len())
        .max()
        .unwrap_or(1);
    let mut probabilities = vec![0.0; len];
    for (w, d) in weighted {
        for (k, p) in d.probabilities.iter().enumerate() {
            probabilities[k] += w * p;
        }
    }
    Ok(CountDistribution {
        probabilities,
        kind: DistributionKind::Mixture,
    })
}

/// Thresholded single-shot readout outcome.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReadoutResult {
    /// Probability of assigning the spin correctly.
    pub fidelity: f64,
    /// Optimal photon-number threshold.
    pub threshold_m: u32,
    /// Mean detected counts given the spin-up initialization.
    pub mean_up: f64,
    /// Mean detected counts given the spin-down initialization.
    pub mean_down: f64,
    /// Total readout duration, seconds (filled by the protocol layer).
    pub duration: f64,
}

impl ReadoutResult {
    pub fn with_duration(self, duration: f64) -> Self {
        Self { duration, ..self }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Fidelity at a fixed threshold with fixed dark/bright roles.
pub fn fidelity_at(dark: &CountDistribution, bright: &CountDistribution, m: usize) -> f64 {
    let mut dark_below = 0.0;
    for k in 0..m {
        dark_below += dark.prob(k);
    }
    let mut bright_above = 0.0;
    for k in (m + 1)..=bright.k_max().max(m) {
        bright_above += bright.prob(k);
    }
    0.5 * (dark_below + 0.5 * dark.prob(m) + bright_above + 0.5 * bright.prob(m))
}

/// Scan all thresholds and return the maximizing one (smallest on ties).
/// The bright/dark role assignment follows the larger mean.
pub fn fidelity(dist_up: &CountDistribution, dist_down: &CountDistribution) -> ReadoutResult {
    let mean_up = dist_up.mean();
    let mean_down = dist_down.mean();
    let (dark, bright) = if mean_down >= mean_up {
        (dist_up, dist_down)
    } else {
        (dist_down, dist_up)
    };

    let k_top = dark.k_max().max(bright.k_max()) + 1;
    // cumulative sums let the scan run in O(k_top)
    let mut dark_below = 0.0; // sum_{k < m} dark(k)
    let mut bright_above: f64 = (0..=k_top).map(|k| bright.prob(k)).sum(); // sum_{k > m-1}
    let mut best_f = f64::MIN;
    let mut best_m = 0usize;
    for m in 0..=k_top {
        bright_above -= bright.prob(m);
        let f = 0.5 * (dark_below + 0.5 * dark.prob(m) + bright_above + 0.5 * bright.prob(m));
        if f > best_f + 1e-15 {
            best_f = f;
            best_m = m;
        }
        dark_below += dark.prob(m);
    }

    ReadoutResult {
        fidelity: best_f.clamp(0.0, 1.0),
        threshold_m: best_m as u32,
        mean_up,
        mean_down,
        duration: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn poisson_zero_mean_is_delta() {
        let d = poisson(0.0);
        assert_eq!(d.prob(0), 1.0);
        assert_eq!(d.prob(1), 0.0);
        assert_abs_diff_eq!(d.mean(), 0.0);
    }

    #[test]
    fn poisson_unit_mean_closed_form() {
        let d = poisson(1.0);
        let e_inv = (-1.0f64).exp();
        assert_relative_eq!(d.prob(0), e_inv, max_relative = 1e-12);
        assert_relative_eq!(d.prob(1), e_inv, max_relative = 1e-12);
        assert_relative_eq!(d.prob(2), e_inv / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn poisson_mean_by_summation() {
        for mean in [0.1, 1.0, 7.3, 120.0, 3000.0] {
            let d = poisson(mean);
            assert_abs_diff_eq!(d.mean(), mean, epsilon = 1e-9 * mean.max(1.0));
            assert_abs_diff_eq!(d.total_mass(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn poisson_support_rule() {
        for mean in [0.5, 10.0, 500.0] {
            let d = poisson(mean);
            assert!(d.k_max() as f64 >= mean + 12.0 * mean.sqrt());
        }
    }

    #[test]
    fn dark_counts_shift_the_mean() {
        let d = poisson_with_dark(2.0, 0.5);
        assert_abs_diff_eq!(d.mean(), 2.5, epsilon = 1e-9);
    }

    #[test]
    fn mixture_single_component_is_identity() {
        let d = poisson(3.0);
        let m = mixture(&[(1.0, d.clone())]).unwrap();
        for k in 0..=d.k_max() {
            assert_abs_diff_eq!(m.prob(k), d.prob(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn mixture_closed_form_at_zero() {
        let m = mixture(&[(0.5, poisson(0.0)), (0.5, poisson(2.0))]).unwrap();
        let want = (1.0 + (-2.0f64).exp()) / 2.0;
        assert_relative_eq!(m.prob(0), want, max_relative = 1e-12);
    }

    #[test]
    fn mixture_mean_is_weighted_sum() {
        let m = mixture(&[
            (0.2, poisson(1.0)),
            (0.3, poisson(4.0)),
            (0.5, poisson(9.0)),
        ])
        .unwrap();
        assert_abs_diff_eq!(m.mean(), 0.2 + 1.2 + 4.5, epsilon = 1e-9);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        assert!(matches!(
            mixture(&[(0.7, poisson(1.0)), (0.4, poisson(2.0))]),
            Err(Error::WeightSum(_))
        ));
    }

    #[test]
    fn identical_distributions_give_chance() {
        let d = poisson(4.0);
        let r = fidelity(&d, &d);
        assert_abs_diff_eq!(r.fidelity, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_supports_give_unit_fidelity() {
        let r = fidelity(&poisson(0.0), &poisson(100.0));
        assert!(r.fidelity > 1.0 - 1e-6);
        assert!(r.threshold_m >= 1);
    }

    /// Independent oracle: fresh Poisson pmf by direct multiplication and a
    /// naive full threshold scan.
    fn brute_force_fidelity(mean_a: f64, mean_b: f64, k_top: usize) -> f64 {
        let pmf = |mean: f64, k: usize| -> f64 {
            let mut p = (-mean).exp();
            for i in 1..=k {
                p *= mean / i as f64;
            }
            p
        };
        let (dark, bright) = if mean_b >= mean_a {
            (mean_a, mean_b)
        } else {
            (mean_b, mean_a)
        };
        let mut best = f64::MIN;
        for m in 0..=k_top {
            let dark_below: f64 = (0..m).map(|k| pmf(dark, k)).sum();
            let bright_above: f64 = (m + 1..=k_top).map(|k| pmf(bright, k)).sum();
            let f = 0.5 * (dark_below + 0.5 * pmf(dark, m) + bright_above + 0.5 * pmf(bright, m));
            best = best.max(f);
        }
        best
    }

    #[test]
    fn matches_brute_force_enumeration() {
        let r = fidelity(&poisson(0.1), &poisson(5.0));
        let want = brute_force_fidelity(0.1, 5.0, 60);
        assert_abs_diff_eq!(r.fidelity, want, epsilon = 1e-10);
    }

    #[test]
    fn brute_force_agreement_over_mean_grid() {
        // deterministic pseudo-random mean pairs
        let mut state = 31u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let a = 20.0 * next();
            let b = 20.0 * next();
            let r = fidelity(&poisson(a), &poisson(b));
            let want = brute_force_fidelity(a, b, 120);
            assert_abs_diff_eq!(r.fidelity, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn fidelity_is_symmetric_under_swap() {
        let (a, b) = (poisson(0.3), poisson(6.0));
        let r1 = fidelity(&a, &b);
        let r2 = fidelity(&b, &a);
        assert_abs_diff_eq!(r1.fidelity, r2.fidelity, epsilon = 1e-13);
        assert_eq!(r1.threshold_m, r2.threshold_m);
    }

    #[test]
    fn threshold_is_a_local_maximum() {
        let (a, b) = (poisson(0.8), poisson(11.0));
        let r = fidelity(&a, &b);
        let m = r.threshold_m as usize;
        let f_at = |mm: usize| fidelity_at(&a, &b, mm);
        assert!(f_at(m) >= f_at(m + 1) - 1e-13);
        if m > 0 {
            assert!(f_at(m) >= f_at(m - 1) - 1e-13);
        }
        assert_abs_diff_eq!(f_at(m), r.fidelity, epsilon = 1e-13);
    }

    #[test]
    fn separation_improves_fidelity() {
        let base = poisson(1.0);
        let mut prev = 0.4;
        for mean in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let f = fidelity(&base, &poisson(mean)).fidelity;
            assert!(
                f + 1e-12 >= prev,
                "fidelity should not decrease with separation: {f} < {prev}"
            );
            prev = f;
        }
    }
}
