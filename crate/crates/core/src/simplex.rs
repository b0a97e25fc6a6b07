// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bounded Nelder-Mead simplex minimizer. Deterministic: no randomness,
//! stable ordering, coordinates clipped into the box before evaluation.

/// Minimize `f` inside `[lo, hi]` starting from `start` with initial step
/// sizes `step`. Returns the best point and value found.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    assert!(dim > 0 && step.len() == dim && lo.len() == dim && hi.len() == dim);

    let clip = |p: &mut [f64]| {
        for d in 0..dim {
            p[d] = p[d].clamp(lo[d], hi[d]);
        }
    };

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut p0 = start.to_vec();
    clip(&mut p0);
    simplex.push(p0);
    for d in 0..dim {
        let mut p = simplex[0].clone();
        p[d] += step[d];
        clip(&mut p);
        simplex.push(p);
    }
    let mut scores: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (scores[worst] - scores[best]).abs() <= tol {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[i][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let mut reflected: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + alpha * (centroid[d] - simplex[worst][d]))
            .collect();
        clip(&mut reflected);
        let f_r = f(&reflected);

        if f_r < scores[best] {
            let mut expanded: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + gamma * (reflected[d] - centroid[d]))
                .collect();
            clip(&mut expanded);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                scores[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                scores[worst] = f_r;
            }
            continue;
        }
        if f_r < scores[second_worst] {
            simplex[worst] = reflected;
            scores[worst] = f_r;
            continue;
        }

        let mut contracted: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + rho * (simplex[worst][d] - centroid[d]))
            .collect();
        clip(&mut contracted);
        let f_c = f(&contracted);
        if f_c < scores[worst] {
            simplex[worst] = contracted;
            scores[worst] = f_c;
            continue;
        }

        // shrink toward the best vertex
        let best_point = simplex[best].clone();
        for &i in order.iter().skip(1) {
            for d in 0..dim {
                simplex[i][d] = best_point[d] + sigma * (simplex[i][d] - best_point[d]);
            }
            scores[i] = f(&simplex[i]);
        }
    }

    let mut best_i = 0;
    for i in 1..=dim {
        if scores[i] < scores[best_i] {
            best_i = i;
        }
    }
    (simplex[best_i].clone(), scores[best_i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |p: &[f64]| (p[0] - 1.3).powi(2) + 2.0 * (p[1] + 0.4).powi(2);
        let (p, v) = nelder_mead(
            f,
            &[0.0, 0.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            300,
            1e-14,
        );
        assert!((p[0] - 1.3).abs() < 1e-5, "{p:?}");
        assert!((p[1] + 0.4).abs() < 1e-5, "{p:?}");
        assert!(v < 1e-9);
    }

    #[test]
    fn respects_bounds() {
        // unconstrained minimum at (3, 0) sits outside the box
        let f = |p: &[f64]| (p[0] - 3.0).powi(2) + p[1] * p[1];
        let (p, _) = nelder_mead(
            f,
            &[0.0, 0.5],
            &[0.3, 0.3],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            300,
            1e-14,
        );
        assert!(p[0] <= 1.0 + 1e-12);
        assert!((p[0] - 1.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn rosenbrock_2d() {
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let (p, _) = nelder_mead(
            f,
            &[-0.5, 0.5],
            &[0.2, 0.2],
            &[-2.0, -2.0],
            &[2.0, 2.0],
            2000,
            1e-16,
        );
        assert!(
            (p[0] - 1.0).abs() < 1e-3 && (p[1] - 1.0).abs() < 1e-3,
            "{p:?}"
        );
    }

    #[test]
    fn deterministic_across_runs() {
        let f = |p: &[f64]| p[0].sin() * p[1].cos() + 0.1 * (p[0] * p[0] + p[1] * p[1]);
        let run = || {
            nelder_mead(
                f,
                &[1.0, -1.0],
                &[0.7, 0.7],
                &[-4.0, -4.0],
                &[4.0, 4.0],
                500,
                1e-12,
            )
        };
        let (p1, v1) = run();
        let (p2, v2) = run();
        assert_eq!(p1, p2);
        assert_eq!(v1.to_bits(), v2.to_bits());
    }
}
