// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Liouvillian assembly and time evolution.
//!
//! The master equation
//! `drho/dt = -i[H, rho] + sum_i (c_i rho c_i' - 1/2 {c_i'c_i, rho})`
//! is represented as a dense superoperator acting on the vectorized density
//! matrix. Vectorization is column-major: `vec(rho)[j*n + i] = rho[i, j]`,
//! so `A rho B <-> kron(B^T, A) vec(rho)`.
//!
//! Pulses are square, so every segment evolves under a constant Liouvillian:
//! propagation is `exp(L t)` by scaling-and-squaring, or through the
//! eigenbasis of `L` when many time points of the same segment are needed.
//! The spectral path is self-verifying and falls back to stepwise `exp`
//! if the eigenbasis is ill-conditioned.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{self, kron, matmul, matvec};
use crate::operators::{expectation, DensityMatrix, HilbertLayout, QOperator};

/// Gate below which a propagated state is declared numerically broken.
pub const POSITIVITY_FAILURE: f64 = -1e-6;

/// Column-major vectorization.
pub fn vectorize(rho: &Array2<C64>) -> Vec<C64> {
    let n = rho.nrows();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            v[j * n + i] = rho[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            m[[i, j]] = v[j * n + i];
        }
    }
    m
}

/// Superoperator matrix for `rho -> A rho B` under column-major vectorization.
fn sandwich(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    kron(&b.t().to_owned(), a)
}

/// Dense Lindblad generator on the vectorized state space.
pub struct Liouvillian {
    pub layout: HilbertLayout,
    /// total_dim^2 x total_dim^2 generator.
    pub matrix: Array2<C64>,
}

impl Liouvillian {
    /// Assemble `L` from a Hermitian Hamiltonian and collapse operators.
    pub fn build(h: &QOperator, collapse: &[QOperator]) -> Result<Self> {
        let defect = h.hermiticity_defect();
        let scale = linalg::max_abs(&h.matrix).max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::NonHermitian(defect / scale));
        }
        let layout = h.layout;
        let n = layout.total_dim();
        let eye = Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0));
        let mi = C64::new(0.0, -1.0);

        let mut l = (sandwich(&h.matrix, &eye) - sandwich(&eye, &h.matrix)).mapv(|z| z * mi);
        let half = C64::new(0.5, 0.0);
        for c in collapse {
            assert_eq!(c.layout, layout, "collapse operators must share the layout");
            let cdag = linalg::dagger(&c.matrix);
            let cdc = matmul(&cdag, &c.matrix);
            let jump = sandwich(&c.matrix, &cdag);
            let anti = (sandwich(&cdc, &eye) + sandwich(&eye, &cdc)).mapv(|z| z * half);
            l = l + jump - anti;
        }
        Ok(Self { layout, matrix: l })
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// `L[rho]` as a matrix (the time derivative of `rho`).
    pub fn apply(&self, rho: &DensityMatrix) -> Array2<C64> {
        let v = vectorize(&rho.matrix);
        let w = matvec(&self.matrix, &v);
        unvectorize(&w, self.dim())
    }

    /// `rho(t) = exp(L t)[rho0]` for one time point.
    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        assert!(t >= 0.0, "propagation time must be non-negative");
        assert_eq!(rho0.layout, self.layout);
        let e = expm(&self.matrix.mapv(|z| z * C64::new(t, 0.0)))?;
        let v = matvec(&e, &vectorize(&rho0.matrix));
        let rho = DensityMatrix::new(self.layout, unvectorize(&v, self.dim()))?;
        check_physical(&rho, t)?;
        Ok(rho)
    }

    /// Reusable propagator for a fixed time step.
    pub fn stepper(&self, dt: f64) -> Result<Stepper> {
        assert!(dt >= 0.0);
        Ok(Stepper {
            layout: self.layout,
            matrix: expm(&self.matrix.mapv(|z| z * C64::new(dt, 0.0)))?,
            dt,
        })
    }

    /// Eigenbasis propagator; `Err` signals the caller should fall back.
    pub fn spectral(&self) -> Result<Spectral> {
        Spectral::new(self)
    }
}

fn check_physical(rho: &DensityMatrix, t: f64) -> Result<()> {
    let min_eig = rho.min_eigenvalue()?;
    if min_eig < POSITIVITY_FAILURE {
        return Err(Error::PositivityLoss {
            min_eig,
            t,
            trace: rho.trace().re,
        });
    }
    Ok(())
}

/// Fixed-step propagator `exp(L dt)` applied repeatedly.
pub struct Stepper {
    layout: HilbertLayout,
    matrix: Array2<C64>,
    pub dt: f64,
}

impl Stepper {
    pub fn step_vec(&self, v: &[C64]) -> Vec<C64> {
        matvec(&self.matrix, v)
    }

    pub fn step(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let v = self.step_vec(&vectorize(&rho.matrix));
        DensityMatrix::new(self.layout, unvectorize(&v, self.layout.total_dim()))
    }
}

/// Propagation through the eigenbasis of `L`: one decomposition, then each
/// time point costs two dense matrix-vector products.
pub struct Spectral {
    layout: HilbertLayout,
    values: Vec<C64>,
    vectors: Array2<C64>,
}

impl Spectral {
    fn new(l: &Liouvillian) -> Result<Self> {
        let scale = linalg::norm_one(&l.matrix).max(1e-300);
        let decomp = linalg::eig(&l.matrix)?;
        // residual check against a defective eigenbasis
        let n2 = l.matrix.nrows();
        let lv = matmul(&l.matrix, &decomp.vectors);
        let mut worst = 0.0f64;
        for j in 0..n2 {
            for i in 0..n2 {
                let r = (lv[[i, j]] - decomp.values[j] * decomp.vectors[[i, j]]).norm();
                worst = worst.max(r);
            }
        }
        if worst > 1e-10 * scale {
            return Err(Error::EigFailure(-1));
        }
        // a Lindblad generator is dissipative; shave eigensolver roundoff
        // that would otherwise exponentially grow over long pulses
        let values = decomp
            .values
            .iter()
            .map(|w| {
                if w.re > 0.0 && w.re < 1e-6 * scale {
                    C64::new(0.0, w.im)
                } else {
                    *w
                }
            })
            .collect();
        Ok(Self {
            layout: l.layout,
            values,
            vectors: decomp.vectors,
        })
    }

    /// Expand an initial state in the eigenbasis; verifies the expansion
    /// reproduces the state so an ill-conditioned basis is caught here.
    pub fn prepare(&self, rho0: &DensityMatrix) -> Result<SpectralState> {
        assert_eq!(rho0.layout, self.layout);
        let v0 = vectorize(&rho0.matrix);
        let n2 = v0.len();
        let rhs = Array2::from_shape_fn((n2, 1), |(i, _)| v0[i]);
        let coeffs = linalg::solve(&self.vectors, &rhs)?;
        let coeffs: Vec<C64> = (0..n2).map(|i| coeffs[[i, 0]]).collect();
        let back = matvec(&self.vectors, &coeffs);
        let mut err = 0.0f64;
        for i in 0..n2 {
            err = err.max((back[i] - v0[i]).norm());
        }
        if err > 1e-9 {
            return Err(Error::EigFailure(-2));
        }
        Ok(SpectralState { coeffs })
    }

    pub fn state_at(&self, st: &SpectralState, t: f64) -> Result<DensityMatrix> {
        let n2 = st.coeffs.len();
        let mut w = vec![C64::new(0.0, 0.0); n2];
        for i in 0..n2 {
            w[i] = st.coeffs[i] * (self.values[i] * t).exp();
        }
        let v = matvec(&self.vectors, &w);
        DensityMatrix::new(self.layout, unvectorize(&v, self.layout.total_dim()))
    }

    /// Eigenvalues plus per-mode weights of the linear functional
    /// `Tr(op rho)` expanded over the prepared state:
    /// `Tr(op rho(t)) = sum_j weights[j] exp(values[j] t)`.
    pub fn functional_weights(
        &self,
        st: &SpectralState,
        op: &QOperator,
    ) -> (Vec<C64>, Vec<C64>) {
        assert_eq!(op.layout, self.layout);
        let n = self.layout.total_dim();
        let n2 = st.coeffs.len();
        let mut values = Vec::with_capacity(n2);
        let mut weights = Vec::with_capacity(n2);
        for j in 0..n2 {
            // Tr(op * unvec(v_j)) with column-major vectorization:
            // element (row, col) of the mode matrix sits at v_j[col*n + row]
            let mut tr = C64::new(0.0, 0.0);
            for col in 0..n {
                for row in 0..n {
                    tr += op.matrix[[col, row]] * self.vectors[[col * n + row, j]];
                }
            }
            values.push(self.values[j]);
            weights.push(st.coeffs[j] * tr);
        }
        (values, weights)
    }
}

pub struct SpectralState {
    coeffs: Vec<C64>,
}

/// Time series of states and named expectation values.
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub observables: BTreeMap<String, Vec<C64>>,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Result<&[C64]> {
        self.observables
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }
}

fn grid_is_uniform(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return None;
    }
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
    uniform.then_some(dt)
}

/// Evolve `rho0` over a sorted time grid, recording states and the given
/// observables at every point. Uniform grids reuse one `exp(L dt)`;
/// non-uniform grids go through the eigenbasis with a stepwise fallback.
pub fn evolve_observed(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    observables: &[(&str, &QOperator)],
) -> Result<Trajectory> {
    assert!(!times.is_empty(), "time grid must be non-empty");
    assert!(times[0] >= 0.0, "time grid must start at t >= 0");
    assert!(
        times.windows(2).all(|w| w[1] > w[0]),
        "time grid must be strictly increasing"
    );

    let states = if let Some(dt) = grid_is_uniform(times) {
        let stepper = l.stepper(dt)?;
        let mut v = vectorize(&rho0.matrix);
        if times[0] > 0.0 {
            let first = l.stepper(times[0])?;
            v = first.step_vec(&v);
        }
        let n = l.dim();
        let mut out = Vec::with_capacity(times.len());
        out.push(DensityMatrix::new(l.layout, unvectorize(&v, n))?);
        for _ in 1..times.len() {
            v = stepper.step_vec(&v);
            out.push(DensityMatrix::new(l.layout, unvectorize(&v, n))?);
        }
        out
    } else {
        match l.spectral().and_then(|sp| {
            let st = sp.prepare(rho0)?;
            times
                .iter()
                .map(|&t| sp.state_at(&st, t))
                .collect::<Result<Vec<_>>>()
        }) {
            Ok(states) => states,
            Err(Error::EigFailure(_)) => {
                // stepwise fallback: one exp per (irregular) step
                let mut out = Vec::with_capacity(times.len());
                let mut rho = if times[0] > 0.0 {
                    l.propagate(rho0, times[0])?
                } else {
                    rho0.clone()
                };
                out.push(rho.clone());
                for w in times.windows(2) {
                    rho = l.propagate(&rho, w[1] - w[0])?;
                    out.push(rho.clone());
                }
                out
            }
            Err(e) => return Err(e),
        }
    };

    if let Some(last) = states.last() {
        check_physical(last, *times.last().unwrap())?;
    }

    let mut obs: BTreeMap<String, Vec<C64>> = BTreeMap::new();
    for (name, op) in observables {
        let mut vals = Vec::with_capacity(states.len());
        for s in &states {
            vals.push(expectation(op, s)?);
        }
        obs.insert((*name).to_string(), vals);
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        observables: obs,
    })
}

/// Quasi-steady state by fixed-point iteration of `exp(L T)`.
///
/// Convergence is declared when the probe expectation changes by less than
/// `tol` (relative) between successive intervals, or — because weak optical
/// pumping superimposes a slow secular drift that never meets the raw
/// criterion — when the second difference of the probe does.
pub fn quasi_steady(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    probe: &QOperator,
    interval: f64,
    tol: f64,
    max_time: f64,
) -> Result<DensityMatrix> {
    let stepper = l.stepper(interval)?;
    let mut v = vectorize(&rho0.matrix);
    let n = l.dim();

    let mut a_prev = expectation(probe, rho0)?;
    let mut delta_prev: Option<C64> = None;
    let mut t = 0.0;
    while t < max_time {
        v = stepper.step_vec(&v);
        t += interval;
        let rho = DensityMatrix::new(l.layout, unvectorize(&v, n))?;
        let a = expectation(probe, &rho)?;
        let delta = a - a_prev;
        let scale = a.norm().max(1e-30);
        if delta.norm() <= tol * scale {
            return Ok(rho);
        }
        if let Some(dp) = delta_prev {
            if (delta - dp).norm() <= tol * scale {
                return Ok(rho);
            }
        }
        delta_prev = Some(delta);
        a_prev = a;
    }
    Err(Error::NoSteadyState(max_time / interval))
}

/// Least-squares exponential decay rate of a strictly positive observable:
/// the negated slope of `ln y` against `t`. Rejects fits with R^2 < 0.999.
pub fn fit_decay_rate(traj: &Trajectory, observable: &str) -> Result<f64> {
    let series = traj.series(observable)?;
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    for (t, v) in traj.times.iter().zip(series) {
        if v.re <= 0.0 {
            break;
        }
        xs.push(*t);
        ys.push(v.re.ln());
    }
    let n = xs.len();
    if n < 4 {
        return Err(Error::FitQuality {
            r_squared: 0.0,
            points: n,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 1e-300 {
        1.0 - ss_res / ss_tot
    } else {
        0.0
    };
    if r_squared < 0.999 {
        return Err(Error::FitQuality {
            r_squared,
            points: n,
        });
    }
    Ok(-slope)
}

/// Result of the Fock-truncation search.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct FockConvergence {
    /// Smallest dimension whose headline scalar moves by < 1e-4 when the
    /// truncation is raised by one.
    pub fock_dim: usize,
    /// The observed change at that step.
    pub delta: f64,
}

pub const FOCK_CONVERGENCE_TOL: f64 = 1e-4;
pub const FOCK_DIM_MAX: usize = 16;

/// Find the smallest Fock dimension at which a scenario's headline scalar
/// stops moving (change < 1e-4 absolute under `dim -> dim + 1`).
pub fn fock_convergence(
    mut eval: impl FnMut(usize) -> Result<f64>,
    start_dim: usize,
) -> Result<FockConvergence> {
    assert!(start_dim >= 2);
    let mut prev = eval(start_dim)?;
    for dim in start_dim..FOCK_DIM_MAX {
        let next = eval(dim + 1)?;
        let delta = (next - prev).abs();
        if delta < FOCK_CONVERGENCE_TOL {
            return Ok(FockConvergence {
                fock_dim: dim,
                delta,
            });
        }
        prev = next;
    }
    Err(Error::NoFockConvergence(FOCK_DIM_MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_collapse_ops, build_hamiltonian, derive_rates, DriveParams, SystemParams, TWO_PI,
    };
    use crate::operators::{annihilation, atomic_sigma};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bare_cavity(layout: HilbertLayout, kappa: f64) -> Liouvillian {
        let h = QOperator::zeros(layout);
        let a = annihilation(layout).scaled(c(kappa.sqrt(), 0.0));
        Liouvillian::build(&h, &[a]).unwrap()
    }

    #[test]
    fn vectorization_sandwich_identity() {
        // kron(B^T, A) vec(rho) == vec(A rho B) pins the convention
        let mut state = 11u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let n = 3;
        let a = Array2::from_shape_fn((n, n), |_| c(next(), next()));
        let b = Array2::from_shape_fn((n, n), |_| c(next(), next()));
        let rho = Array2::from_shape_fn((n, n), |_| c(next(), next()));
        let direct = matmul(&matmul(&a, &rho), &b);
        let via_super = unvectorize(&matvec(&sandwich(&a, &b), &vectorize(&rho)), n);
        assert!(linalg::max_abs(&(&direct - &via_super)) < 1e-12);
    }

    #[test]
    fn bare_cavity_photon_decay_rate() {
        let layout = HilbertLayout::new(3);
        let kappa = 2.0e9;
        let l = bare_cavity(layout, kappa);
        let rho = DensityMatrix::pure(layout, 0, 1);
        let drho = l.apply(&rho);
        let a = annihilation(layout);
        let n_op = a.dag().dot(&a);
        // d<n>/dt = Tr(N L[rho]) = -kappa <n>
        let mut dn = c(0.0, 0.0);
        for i in 0..layout.total_dim() {
            for j in 0..layout.total_dim() {
                dn += drho[[i, j]] * n_op.matrix[[j, i]];
            }
        }
        assert_relative_eq!(dn.re, -kappa, max_relative = 1e-12);
    }

    #[test]
    fn dephasing_fixes_diagonal_states() {
        let layout = HilbertLayout::new(2);
        let h = QOperator::zeros(layout);
        let gd = 1e8;
        let amp = c((gd / 2.0f64).sqrt(), 0.0);
        let sz1 = atomic_sigma(layout, 2, 2)
            .unwrap()
            .add(&atomic_sigma(layout, 0, 0).unwrap().scaled(c(-1.0, 0.0)))
            .scaled(amp);
        let sz2 = atomic_sigma(layout, 3, 3)
            .unwrap()
            .add(&atomic_sigma(layout, 1, 1).unwrap().scaled(c(-1.0, 0.0)))
            .scaled(amp);
        let l = Liouvillian::build(&h, &[sz1, sz2]).unwrap();
        let rho = DensityMatrix::maximally_mixed(layout);
        let drho = l.apply(&rho);
        assert!(linalg::max_abs(&drho) < 1e-12 * gd);
    }

    #[test]
    fn full_collapse_set_preserves_trace() {
        let p = SystemParams::table3();
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(3);
        let drive = DriveParams {
            p_in: 10e-12,
            delta_a: TWO_PI * 0.4e9,
            delta_c: -TWO_PI * 0.2e9,
            t_pulse: 1e-8,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();

        // random Hermitian unit-trace rho
        let mut state = 5u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let n = layout.total_dim();
        let m = Array2::from_shape_fn((n, n), |_| c(next(), next()));
        let mut herm = (&m + &linalg::dagger(&m)).mapv(|z| z * 0.5);
        let tr: C64 = herm.diag().iter().sum();
        herm = herm.mapv(|z| z / tr);
        let rho = DensityMatrix::new(layout, herm).unwrap();

        let drho = l.apply(&rho);
        let dtr: C64 = drho.diag().iter().sum();
        assert!(dtr.norm() < 1e-10 * linalg::max_abs(&drho) * n as f64 + 1e-12);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let layout = HilbertLayout::new(2);
        let mut m = QOperator::zeros(layout).matrix;
        m[[0, 1]] = c(1.0, 0.0); // no conjugate partner
        let h = QOperator::new(layout, m).unwrap();
        assert!(matches!(
            Liouvillian::build(&h, &[]),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let layout = HilbertLayout::new(3);
        let l = bare_cavity(layout, 1e9);
        let rho0 = DensityMatrix::pure(layout, 2, 1);
        let rho = l.propagate(&rho0, 0.0).unwrap();
        assert!(linalg::max_abs(&(&rho.matrix - &rho0.matrix)) < 1e-14);
    }

    #[test]
    fn cavity_decay_matches_analytic_exponential() {
        let layout = HilbertLayout::new(3);
        let kappa = 2.0 * TWO_PI * 1e9;
        let l = bare_cavity(layout, kappa);
        let rho0 = DensityMatrix::pure(layout, 0, 1);
        let a = annihilation(layout);
        let n_op = a.dag().dot(&a);
        for t in [1e-11, 1e-10, 5e-10, 2e-9] {
            let rho = l.propagate(&rho0, t).unwrap();
            let got = expectation(&n_op, &rho).unwrap().re;
            let want = (-kappa * t).exp();
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn spontaneous_emission_rate_without_cavity() {
        // g_sim = 0 removes the cavity; population of |2> decays at gamma0
        let p = SystemParams {
            g_sim: 0.0,
            gamma: TWO_PI * 169.3e3, // no dephasing either
            ..SystemParams::table3()
        };
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(2);
        let drive = DriveParams {
            p_in: 0.0,
            delta_a: 0.0,
            delta_c: 0.0,
            t_pulse: 1e-8,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();
        let rho0 = DensityMatrix::pure(layout, 2, 0);
        let t = 0.4 / p.gamma0;
        let rho = l.propagate(&rho0, t).unwrap();
        let got = rho.atom_population(2);
        assert_relative_eq!(got, (-p.gamma0 * t).exp(), max_relative = 1e-8);
    }

    #[test]
    fn semigroup_property() {
        let p = SystemParams::table3();
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(2);
        let drive = DriveParams {
            p_in: 20e-12,
            delta_a: TWO_PI * 0.1e9,
            delta_c: 0.0,
            t_pulse: 1e-8,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();
        let rho0 = DensityMatrix::pure(layout, 0, 0);
        let (t1, t2) = (3.7e-9, 9.1e-9);
        let once = l.propagate(&rho0, t1 + t2).unwrap();
        let twice = l.propagate(&l.propagate(&rho0, t1).unwrap(), t2).unwrap();
        assert!(linalg::max_abs(&(&once.matrix - &twice.matrix)) < 1e-9);
    }

    #[test]
    fn evolve_constant_identity_and_population_sum() {
        let p = SystemParams::fig2a();
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(3);
        let drive = DriveParams {
            p_in: 100e-12,
            delta_a: crate::model::delta_a_resonant_with_a(&p),
            delta_c: 0.0,
            t_pulse: 1e-8,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();
        let rho0 = DensityMatrix::pure(layout, 0, 0);
        let eye = QOperator::identity(layout);
        let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.25e-9).collect();
        let traj = evolve_observed(&l, &rho0, &times, &[("one", &eye)]).unwrap();
        for v in traj.series("one").unwrap() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
        }
        for s in &traj.states {
            let pops: f64 = (0..4).map(|lvl| s.atom_population(lvl)).sum();
            assert_abs_diff_eq!(pops, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn spectral_and_expm_paths_agree_on_irregular_grid() {
        let p = SystemParams::table3();
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(2);
        let drive = DriveParams {
            p_in: 5e-12,
            delta_a: TWO_PI * 0.3e9,
            delta_c: TWO_PI * 0.8e9,
            t_pulse: 1e-8,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();
        let rho0 = DensityMatrix::pure(layout, 1, 0);

        let t_probe = 2.3e-9;
        let direct = l.propagate(&rho0, t_probe).unwrap();
        let sp = l.spectral().unwrap();
        let st = sp.prepare(&rho0).unwrap();
        let via_spectral = sp.state_at(&st, t_probe).unwrap();
        assert!(linalg::max_abs(&(&direct.matrix - &via_spectral.matrix)) < 1e-9);
    }

    #[test]
    fn weak_drive_plateau_matches_quasi_steady() {
        // resonant weak drive of transition A from |0>: P_22 rises to a
        // plateau that the fixed-point iteration reproduces
        let p = SystemParams::table3();
        let r = derive_rates(&p);
        let layout = HilbertLayout::new(3);
        let drive = DriveParams {
            p_in: 0.05e-12,
            delta_a: crate::model::delta_a_resonant_with_a(&p),
            delta_c: 0.0,
            t_pulse: 1e-6,
        };
        let h = build_hamiltonian(&p, &r, &drive, layout).unwrap();
        let collapse = build_collapse_ops(&p, &r, layout).unwrap();
        let l = Liouvillian::build(&h, &collapse).unwrap();
        let rho0 = DensityMatrix::pure(layout, 0, 0);

        let p22 = atomic_sigma(layout, 2, 2).unwrap();
        let horizon = 60.0 / p.gamma;
        let times: Vec<f64> = (1..=300).map(|k| k as f64 * horizon / 300.0).collect();
        let traj = evolve_observed(&l, &rho0, &times, &[("p22", &p22)]).unwrap();
        let plateau = traj.series("p22").unwrap().last().unwrap().re;

        let a = annihilation(layout);
        let qss = quasi_steady(&l, &rho0, &a, 10.0 / p.gamma, 1e-8, 4e4 / r.kappa).unwrap();
        let qss_p22 = qss.atom_population(2);
        assert!(plateau > 0.0);
        assert_abs_diff_eq!(plateau, qss_p22, epsilon = 1e-6);
    }

    #[test]
    fn fit_recovers_synthetic_exponential() {
        let layout = HilbertLayout::new(2);
        let kappa = 3.1e8;
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 3e-11).collect();
        let series: Vec<C64> = times.iter().map(|t| c((-kappa * t).exp(), 0.0)).collect();
        let mut obs = BTreeMap::new();
        obs.insert("y".to_string(), series);
        let traj = Trajectory {
            times: times.clone(),
            states: vec![DensityMatrix::pure(layout, 0, 0); times.len()],
            observables: obs,
        };
        let rate = fit_decay_rate(&traj, "y").unwrap();
        assert_relative_eq!(rate, kappa, max_relative = 1e-6);
    }

    #[test]
    fn fit_rejects_non_exponential_signal() {
        let layout = HilbertLayout::new(2);
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 1e-9).collect();
        let series: Vec<C64> = times
            .iter()
            .map(|t| c(1.0 / (1.0 + (t / 1e-8) * (t / 1e-8)), 0.0))
            .collect();
        let mut obs = BTreeMap::new();
        obs.insert("y".to_string(), series);
        let traj = Trajectory {
            times: times.clone(),
            states: vec![DensityMatrix::pure(layout, 0, 0); times.len()],
            observables: obs,
        };
        assert!(matches!(
            fit_decay_rate(&traj, "y"),
            Err(Error::FitQuality { .. })
        ));
    }

    #[test]
    fn fock_convergence_simple_scalars() {
        // scalar stops moving as soon as dim >= 3
        let conv = fock_convergence(
            |d| Ok(if d < 3 { d as f64 } else { 3.0 + 1e-9 * d as f64 }),
            2,
        )
        .unwrap();
        assert_eq!(conv.fock_dim, 3);

        // never converges
        assert!(matches!(
            fock_convergence(|d| Ok(d as f64), 2),
            Err(Error::NoFockConvergence(_))
        ));

        // exactly constant scalar converges at the start dimension
        let conv = fock_convergence(|_| Ok(1.0), 2).unwrap();
        assert_eq!(conv.fock_dim, 2);
        assert_eq!(conv.delta, 0.0);
    }
}
