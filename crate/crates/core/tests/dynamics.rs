use cqec_core::analysis::{fit_power_law, observables, reduced_observables};
use cqec_core::closed_forms::alpha_nonmarkov_1q;
use cqec_core::dynamics::{integrate, jump_monte_carlo, IntegratorConfig, Method};
use cqec_core::reduced::{expand_reduced, extract_reduced, propagate_reduced};
use cqec_core::tensor::{ket_bra, vectorize};
use cqec_core::{DensityMatrix, ModelParams, QubitRegister, ReducedState, Scenario};

fn reference() -> DensityMatrix {
    let code = Scenario::from_name("hamiltonian-3q").unwrap().code_spec();
    DensityMatrix::pure(QubitRegister::system(3).unwrap(), &code.logical_zero).unwrap()
}

#[test]
fn full_and_reduced_models_agree() {
    let sc = Scenario::from_name("hamiltonian-3q").unwrap();
    let r = 3.0;
    let gen = sc.total_generator(&ModelParams::hamiltonian(1.0, r)).unwrap();
    let full = integrate(&gen, &sc.initial_state(), 2.0, &IntegratorConfig { samples: 21, ..Default::default() }).unwrap();
    let red = propagate_reduced(r, 1.0, &ReducedState::initial(), &full.times).unwrap();
    let rho0 = reference();
    for (s, c) in full.states.iter().zip(&red.states) {
        let x = extract_reduced(s, &rho0).unwrap();
        for (a, b) in x.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).abs() < 1e-7);
        }
        let back = expand_reduced(c, &rho0).unwrap();
        assert!((back.matrix() - s.matrix()).norm() < 1e-6);
    }
    let code = sc.code_spec();
    let full_obs = observables(&full, &code, &code.logical_zero).unwrap();
    let red_obs = reduced_observables(&red).unwrap();
    for (a, b) in full_obs.iter().zip(&red_obs) {
        assert!((a.f_cw - b.f_cw).abs() < 1e-7);
        assert!((a.p_cs - b.p_cs).abs() < 1e-7);
    }
}

#[test]
fn markovian_short_time_error_orders() {
    let sc = Scenario::from_name("markovian-3q").unwrap();
    let gen = sc.total_generator(&ModelParams::markovian(1.0, 0.0)).unwrap();
    let cfg = IntegratorConfig { method: Method::Spectral, samples: 101, ..Default::default() };
    let traj = integrate(&gen, &sc.initial_state(), 1e-2, &cfg).unwrap();
    let weight = |s: &DensityMatrix, flips: u32| -> f64 {
        (0..8usize).filter(|i| i.count_ones() == flips).map(|i| s.matrix()[(i, i)].re).sum()
    };
    let window = |flips: u32| -> Vec<(f64, f64)> {
        traj.times
            .iter()
            .zip(&traj.states)
            .filter(|(&t, _)| t >= 1e-4)
            .map(|(&t, s)| (t, weight(s, flips)))
            .collect()
    };
    let single = fit_power_law(&window(1)).unwrap().param("slope");
    let triple = fit_power_law(&window(3)).unwrap().param("slope");
    assert!((single - 1.0).abs() <= 0.02, "{single}");
    assert!(triple >= 2.9, "{triple}");
}

#[test]
fn spectral_and_adaptive_agree_on_three_qubit_markov() {
    let sc = Scenario::from_name("markovian-3q").unwrap();
    let gen = sc.total_generator(&ModelParams::markovian(1.0, 20.0)).unwrap();
    let a = integrate(&gen, &sc.initial_state(), 3.0, &IntegratorConfig { samples: 31, ..Default::default() }).unwrap();
    let s = integrate(
        &gen,
        &sc.initial_state(),
        3.0,
        &IntegratorConfig { method: Method::Spectral, samples: 31, ..Default::default() },
    )
    .unwrap();
    for (x, y) in a.states.iter().zip(&s.states) {
        assert!((vectorize(x.matrix()) - vectorize(y.matrix())).norm() < 1e-8);
    }
}

#[test]
fn monte_carlo_error_shrinks_with_ensemble_size() {
    let sc = Scenario::from_name("hamiltonian-1q").unwrap();
    let params = ModelParams::hamiltonian(1.0, 4.0);
    let h = sc.hamiltonian(&params);
    let code = sc.code_spec();
    let rho0 = sc.initial_state();
    let small = jump_monte_carlo(&rho0, &h, &code, 4.0, 2.0, 11, 500, 7).unwrap();
    let large = jump_monte_carlo(&rho0, &h, &code, 4.0, 2.0, 11, 8000, 7).unwrap();
    // Standard error scales as n^{-1/2}: a factor 4 for 16× more trajectories.
    let ratio = small.fidelity_stderr[10] / large.fidelity_stderr[10];
    assert!((3.0..5.3).contains(&ratio), "{ratio}");
    for (i, &t) in large.mean.times.iter().enumerate() {
        let exact = alpha_nonmarkov_1q(t, 1.0, 4.0);
        assert!((large.fidelity[i] - exact).abs() <= 4.0 * large.fidelity_stderr[i] + 1e-12);
    }
    let projector = ket_bra(&code.logical_zero, &code.logical_zero);
    for s in &large.mean.states {
        assert!((s.trace().re - 1.0).abs() < 1e-12);
        assert!(s.system_expectation(&projector) <= 1.0 + 1e-12);
    }
}
