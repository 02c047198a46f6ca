use std::sync::{Mutex, OnceLock};

use fockramp::dynamics::{fidelity, propagate, Wavefunction};
use fockramp::experiments::{emit_csv, read_csv, CsvStream, Preset, Protocol};
use fockramp::schedule::{faquad_profile, uniform_lambda_grid, AdiabaticityProfile, Method, Schedule};
use fockramp::spectral::eigensolve;
use fockramp::{DeformationPath, SpatialGrid};

fn mini() -> &'static Preset {
    static P: OnceLock<Preset> = OnceLock::new();
    P.get_or_init(|| Preset::mini().unwrap())
}

fn coarse_faquad() -> &'static AdiabaticityProfile {
    static P: OnceLock<AdiabaticityProfile> = OnceLock::new();
    P.get_or_init(|| {
        let p = mini();
        faquad_profile(&p.path, &p.grid, 2, &uniform_lambda_grid(p.path.a0, p.path.af, 256)).unwrap()
    })
}

#[test]
fn mini_preset_is_consistent() {
    let p = mini();
    assert_eq!(p.path.c, 0.09375);
    assert_eq!(p.k, 5);
    assert_eq!(p.seconds_per_unit(), None);
    assert!(Preset::mini_n(0).is_err());
}

#[test]
fn be_trap_preset_converts_from_si() {
    let p = Preset::paper(4).unwrap();
    assert!((p.path.a0 + 0.25).abs() < 1e-12);
    assert!((p.path.af - 0.5).abs() < 1e-12);
    assert!((p.path.kappa + 133.3).abs() < 0.2, "{}", p.path.kappa);
    assert!((p.path.eps - 0.0532).abs() < 1e-3, "{}", p.path.eps);
    let t = p.seconds_per_unit().unwrap();
    assert!((1.0 / (t * 2.0 * std::f64::consts::PI) / 5.641e6 - 1.0).abs() < 1e-3);
}

#[test]
fn profile_reuse_matches_fresh_design() {
    let p = mini();
    let shared = Protocol::with_profile(p, Method::Faquad, Some(coarse_faquad().clone())).unwrap();
    for t_f in [30.0, 45.0] {
        let fresh_profile = faquad_profile(&p.path, &p.grid, 2, &uniform_lambda_grid(p.path.a0, p.path.af, 256)).unwrap();
        let fresh = Protocol::with_profile(p, Method::Faquad, Some(fresh_profile)).unwrap();
        let (a, b) = (shared.row(t_f, false).f_n.unwrap(), fresh.row(t_f, false).f_n.unwrap());
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn demultiplexing_mirrors_multiplexing() {
    let proto = Protocol::with_profile(mini(), Method::Faquad, Some(coarse_faquad().clone())).unwrap();
    let (fwd, bwd) = proto.demultiplexing(40.0).unwrap();
    assert!(fwd > 0.1 && fwd < 1.0);
    assert!((fwd - bwd).abs() < 1e-6, "{fwd} vs {bwd}");
    let back = fockramp::schedule::reverse(&proto.schedule(40.0).unwrap());
    assert_eq!(back.start_a(), mini().path.af);
}

#[test]
fn scan_rows_are_ordered_bounded_and_streamed() {
    let proto = Protocol::with_profile(mini(), Method::Linear, None).unwrap();
    let seen = Mutex::new(Vec::new());
    let stream = CsvStream::new(Vec::new(), &Method::Linear, 2, None).unwrap();
    let r = proto
        .scan_with(&[20.0, 5.0, 10.0], true, |i, row| {
            seen.lock().unwrap().push(i);
            stream.push(i, row);
        })
        .unwrap();
    assert_eq!(r.rows.iter().map(|r| r.t_f).collect::<Vec<_>>(), vec![5.0, 10.0, 20.0]);
    for row in &r.rows {
        for f in [row.f_n, row.f_0, row.f_avg] {
            let f = f.unwrap();
            assert!((0.0..=1.0).contains(&f));
        }
        assert_eq!(row.c, None);
        assert!((row.f_avg.unwrap() - 0.5 * (row.f_0.unwrap() + row.f_n.unwrap())).abs() < 1e-15);
    }
    assert_eq!(seen.into_inner().unwrap().len(), 3);
    let streamed = stream.finish().unwrap();
    let mut whole = Vec::new();
    emit_csv(&r, &mut whole).unwrap();
    assert_eq!(streamed, whole);
    let parsed = read_csv(whole.as_slice()).unwrap();
    for (a, b) in parsed.iter().zip(&r.rows) {
        assert!((a.f_n.unwrap() - b.f_n.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn failing_rows_are_flagged_and_scan_continues() {
    let mut p = mini().clone();
    p.dt = 0.5;
    let proto = Protocol::with_profile(&p, Method::Linear, None).unwrap();
    let r = proto.scan(&[5.0, 6.0], false).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows.iter().all(|row| row.f_n.is_none() && row.error.as_deref().is_some_and(|e| e.contains("step"))));
    let mut out = Vec::new();
    emit_csv(&r, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().filter(|l| l.starts_with("# failed")).count(), 2);
}

#[test]
fn static_harmonic_trap_preserves_both_states() {
    // No deformation: F_0 = F_n = 1.
    let grid = SpatialGrid::new(-12.0, 12.0, 256).unwrap();
    let path = DeformationPath::custom(0.5, 0.6, 0.0, -1.0, 0.0, 0.0, 2).unwrap();
    let s = Schedule::from_samples(path, Method::Linear, None, vec![0.0, 20.0], vec![0.5, 0.5]).unwrap();
    let eig = eigensolve(&path.initial(), &grid, 5).unwrap();
    for n in [0, 2] {
        let psi = Wavefunction::from_eigenstate(&eig, n).unwrap();
        let f = fidelity(&propagate(&psi, &s, 0.005).unwrap().final_state, &psi).unwrap();
        assert!((1.0 - f).abs() < 1e-6);
    }
}
