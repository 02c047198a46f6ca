use fockramp::dynamics::{fidelity, propagate, propagate_with_dump, superposition_fidelity, TrajectoryDump, Wavefunction};
use fockramp::schedule::{linear_schedule, reverse, Method, Schedule};
use fockramp::spectral::eigensolve;
use fockramp::{DeformationPath, Error, SpatialGrid};
use num_complex::Complex64;

/// Static trap V = x²/2 (ω = 1) held for `t_f`.
fn static_harmonic(t_f: f64) -> Schedule {
    let path = DeformationPath::custom(0.5, 0.6, 0.0, -1.0, 0.0, 0.0, 0).unwrap();
    Schedule::from_samples(path, Method::Linear, None, vec![0.0, t_f], vec![0.5, 0.5]).unwrap()
}

fn harmonic_grid() -> SpatialGrid {
    SpatialGrid::new(-12.0, 12.0, 256).unwrap()
}

fn gaussian(grid: SpatialGrid, x0: f64) -> Wavefunction {
    let amps = grid.nodes().map(|x| Complex64::new((-(x - x0).powi(2) / 2.0).exp(), 0.0)).collect();
    Wavefunction::normalized(grid, amps).unwrap()
}

fn mini_path() -> DeformationPath {
    DeformationPath::new(-0.25, 0.5, 1.953125e-3, -400.0 / 3.0, 0.05, 0.09375, 2).unwrap()
}

fn mini_grid() -> SpatialGrid {
    SpatialGrid::new(-20.0, 20.0, 512).unwrap()
}

#[test]
fn stationary_ground_state_is_preserved() {
    let grid = harmonic_grid();
    let s = static_harmonic(10.0);
    let eig = eigensolve(&s.params_at(0.0), &grid, 1).unwrap();
    let psi0 = Wavefunction::from_eigenstate(&eig, 0).unwrap();
    let out = propagate(&psi0, &s, 0.005).unwrap();
    let f = fidelity(&out.final_state, &psi0).unwrap();
    assert!((1.0 - f).abs() < 1e-6, "{f}");
    // Phase e^{-iEt}, E = 1/2, up to the O(dt²) splitting shift.
    let overlap = psi0.inner(&out.final_state).unwrap();
    assert!((overlap - Complex64::cis(-5.0)).norm() < 1e-4, "{overlap}");
}

#[test]
fn displaced_ground_state_oscillates_classically() {
    let grid = harmonic_grid();
    let s = static_harmonic(2.0 * std::f64::consts::PI);
    let psi0 = gaussian(grid, 2.0);
    let mut dump = TrajectoryDump { every: 10, target: None, out: Vec::new() };
    propagate_with_dump(&psi0, &s, 0.005, &mut dump).unwrap();
    let text = String::from_utf8(dump.out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,norm,mean_x,fidelity"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').take(3).map(|c| c.parse().unwrap()).collect();
        let (t, mean_x) = (cols[0], cols[2]);
        assert!((mean_x - 2.0 * t.cos()).abs() < 1e-4, "t={t}: {mean_x}");
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn norm_is_conserved_over_long_runs() {
    let grid = harmonic_grid();
    let psi0 = gaussian(grid, 1.0);
    let s = static_harmonic(500.0);
    let out = propagate(&psi0, &s, 0.005).unwrap();
    assert_eq!(out.steps, 100_000);
    assert!(out.norm_drift < 1e-10, "{}", out.norm_drift);
    assert!((out.final_state.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn step_halving_converges() {
    let path = mini_path();
    let grid = mini_grid();
    let s = linear_schedule(&path, 20.0, 401).unwrap();
    let start = eigensolve(&path.initial(), &grid, 5).unwrap();
    let end = eigensolve(&path.final_params(), &grid, 5).unwrap();
    let psi0 = Wavefunction::from_eigenstate(&start, 2).unwrap();
    let target = Wavefunction::from_eigenstate(&end, 2).unwrap();
    let f1 = fidelity(&propagate(&psi0, &s, 0.005).unwrap().final_state, &target).unwrap();
    let f2 = fidelity(&propagate(&psi0, &s, 0.0025).unwrap().final_state, &target).unwrap();
    assert!((f1 - f2).abs() < 1e-6, "{f1} vs {f2}");
}

#[test]
fn reversed_protocol_has_equal_fidelity() {
    let path = mini_path();
    let grid = mini_grid();
    let s = linear_schedule(&path, 30.0, 301).unwrap();
    let start = eigensolve(&path.initial(), &grid, 5).unwrap();
    let end = eigensolve(&path.final_params(), &grid, 5).unwrap();
    let well = Wavefunction::from_eigenstate(&start, 2).unwrap();
    let fock = Wavefunction::from_eigenstate(&end, 2).unwrap();
    let fwd = fidelity(&propagate(&well, &s, 0.005).unwrap().final_state, &fock).unwrap();
    let bwd = fidelity(&propagate(&fock, &reverse(&s), 0.005).unwrap().final_state, &well).unwrap();
    assert!(fwd > 0.0 && fwd < 1.0);
    assert!((fwd - bwd).abs() < 1e-10, "{fwd} vs {bwd}");
}

#[test]
fn oversized_step_is_rejected() {
    let grid = harmonic_grid();
    let err = propagate(&gaussian(grid, 0.0), &static_harmonic(1.0), 0.05).unwrap_err();
    assert!(matches!(err, Error::StepTooLarge { .. }), "{err}");
}

#[test]
fn wave_reaching_the_box_edge_is_reported() {
    let grid = SpatialGrid::new(-6.0, 6.0, 128).unwrap();
    let err = propagate(&gaussian(grid, 4.0), &static_harmonic(1.0), 0.005).unwrap_err();
    assert!(matches!(err, Error::Reflection { .. }), "{err}");
}

#[test]
fn grid_mismatch_is_an_error() {
    let a = gaussian(harmonic_grid(), 0.0);
    let b = gaussian(SpatialGrid::new(-12.0, 12.0, 128).unwrap(), 0.0);
    assert!(matches!(fidelity(&a, &b), Err(Error::GridMismatch)));
    assert_eq!(superposition_fidelity(0.98, 1.0), 0.99);
}
