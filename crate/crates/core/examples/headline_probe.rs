use readout_core::counts::{fidelity, poisson};
use readout_core::model::*;
use readout_core::reflection::*;

fn main() {
    let sys = SystemParams::table3();
    let opt = optimize_detunings(&sys, WEAK_PROBE_POWER, OPTIMIZER_GRID_N).unwrap();
    for p_pw in [3.8, 16.0, 23.4] {
        let drive = DriveParams {
            p_in: p_pw * 1e-12,
            delta_a: opt.delta_a,
            delta_c: opt.delta_c,
            t_pulse: 0.0,
        };
        let up = PulseEvaluator::new(&sys, &drive, Spin::Up, 4).unwrap();
        let down = PulseEvaluator::new(&sys, &drive, Spin::Down, 4).unwrap();
        let f_at = |t: f64| {
            let n_up = up.counts(t).unwrap();
            let n_down = down.counts(t).unwrap();
            fidelity(&poisson(n_up), &poisson(n_down)).fidelity
        };
        let mut best = (0.0f64, 0.0f64);
        for k in 0..33 {
            let t = 2e-6 * (100.0f64 / 2.0).powf(k as f64 / 32.0);
            let f = f_at(t);
            if f > best.0 { best = (f, t); }
        }
        println!(
            "P = {p_pw:5.1} pW: best F = {:.5} @ {:5.1} us; F(47) = {:.5}, F(8.7) = {:.5}, F(11) = {:.5}",
            best.0, best.1 * 1e6, f_at(47e-6), f_at(8.7e-6), f_at(11e-6)
        );
    }
}
