use num_complex::Complex64 as C64;

use stirap::dynamics::{
    eta_from_bed, from_bed, propagate, to_bed, transfer, transfer_bed, transfer_rk4, BedState, IntegratorSettings,
    StateVector, TRAJECTORY_CSV_HEADER,
};
use stirap::pulses::{interaction_window, PulseConfig};

fn cfgs() -> Vec<PulseConfig> {
    vec![
        PulseConfig::exact_case(20.0, 0.0),
        PulseConfig::new(2, 1.0, 0.5, 30.0, 30.0, 0.0).unwrap(),
        PulseConfig::new(1, 1.0, 0.4, 15.0, 45.0, 10.0).unwrap(),
        PulseConfig::new(2, 1.0, 0.6, 40.0, 25.0, 40.0).unwrap(),
    ]
}

#[test]
fn tolerance_halving_converges() {
    for cfg in cfgs() {
        let base = IntegratorSettings::default();
        let half = IntegratorSettings { rel_tol: base.rel_tol / 2.0, abs_tol: base.abs_tol / 2.0, ..base };
        let a = transfer(&cfg, &base).unwrap().n3();
        let b = transfer(&cfg, &half).unwrap().n3();
        assert!((a - b).abs() < 10.0 * base.rel_tol, "{cfg:?}: {a} vs {b}");
    }
}

#[test]
fn rk4_cross_check() {
    for cfg in cfgs() {
        let dp = transfer(&cfg, &IntegratorSettings::default()).unwrap().at_t_f;
        let rk = transfer_rk4(&cfg, 20_000).unwrap();
        assert!((dp.to_vector() - rk.to_vector()).norm() < 1e-8, "{cfg:?}");
    }
}

#[test]
fn target_population_frozen_after_stokes() {
    for cfg in cfgs() {
        let run = transfer(&cfg, &IntegratorSettings::default()).unwrap();
        assert!((run.at_t_f.c3.norm_sqr() - run.at_end.c3.norm_sqr()).abs() < 1e-12);
    }
}

#[test]
fn norm_is_monotone_with_decay() {
    let s = IntegratorSettings { sample_count: 501, ..Default::default() };
    for cfg in cfgs() {
        let (a, b) = cfg.field_span();
        let tr = propagate(&cfg, a, b, &StateVector::ground(), &s).unwrap();
        assert_eq!(tr.samples.len(), 501);
        assert_eq!((tr.samples[0].t, tr.samples[500].t), (a, b));
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        for w in tr.samples.windows(2) {
            assert!(w[1].state.norm_sqr() <= w[0].state.norm_sqr() + 1e-9);
        }
        if cfg.gamma == 0.0 {
            assert!((tr.final_state().norm_sqr() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn hermitian_limit_conserves_norm_up_to_large_area() {
    let cfg = PulseConfig::new(2, 1.0, 0.5, 100.0, 100.0, 0.0).unwrap();
    let run = transfer(&cfg, &IntegratorSettings::default()).unwrap();
    assert!((run.at_end.norm_sqr() - 1.0).abs() < 1e-9);
}

#[test]
fn stokes_only_leaves_ground_untouched() {
    let cfg = PulseConfig::exact_case(20.0, 0.0);
    let (start, _) = cfg.field_span();
    let t_i = interaction_window(&cfg).t_i;
    let tr = propagate(&cfg, start, t_i, &StateVector::ground(), &IntegratorSettings::default()).unwrap();
    assert_eq!(tr.final_state(), StateVector::ground());
}

#[test]
fn bed_and_bare_agree_on_all_populations() {
    for gamma in [0.0, 10.0, 40.0] {
        let cfg = PulseConfig::new(1, 1.0, 0.5, 25.0, 35.0, gamma).unwrap();
        let s = IntegratorSettings::default();
        let bare = transfer(&cfg, &s).unwrap();
        let bed = transfer_bed(&cfg, &s).unwrap();
        for (x, y) in [
            (bare.at_t_f.c1.norm_sqr(), bed.at_t_f.c1.norm_sqr()),
            (bare.at_t_f.c2.norm_sqr(), bed.at_t_f.c2.norm_sqr()),
            (bare.at_t_f.c3.norm_sqr(), bed.at_t_f.c3.norm_sqr()),
        ] {
            assert!((x - y).abs() < 1e-8, "gamma {gamma}: {x} vs {y}");
        }
        let (_, _, eta_d) = eta_from_bed(&bed.bed_at_t_f).unwrap();
        assert!(((2.0 * eta_d.re).exp() - bed.bed_at_t_f.c_d.norm_sqr()).abs() < 1e-12);
        // the dark state is |3> up to sign at Stokes turn-off
        assert!((bed.bed_at_t_f.c_d.norm_sqr() - bare.n3()).abs() < 1e-8);
    }
}

#[test]
fn bed_round_trip() {
    let cfg = PulseConfig::new(2, 1.0, 0.5, 20.0, 20.0, 0.0).unwrap();
    let psi = StateVector::new(C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.0, -0.4));
    let win = interaction_window(&cfg);
    for k in 0..=8 {
        let t = win.t_i + (win.t_f - win.t_i) * k as f64 / 8.0;
        let bed = to_bed(&cfg, t, &psi).unwrap();
        assert!((bed.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
        let back = from_bed(&cfg, t, &bed).unwrap();
        assert!((back.to_vector() - psi.to_vector()).norm() < 1e-14);
    }
    let b = BedState { c_b: C64::new(0.1, 0.0), c_e: C64::new(0.0, 0.0), c_d: C64::new(1.0, 0.0) };
    let (eb, ee, ed) = eta_from_bed(&b).unwrap();
    assert_eq!((eb, ee, ed), (C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
}

#[test]
fn trajectory_csv_layout() {
    let cfg = PulseConfig::exact_case(10.0, 0.0);
    let (a, b) = cfg.field_span();
    let s = IntegratorSettings { sample_count: 5, ..Default::default() };
    let tr = propagate(&cfg, a, b, &StateVector::ground(), &s).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
    assert_eq!(lines.len(), 6);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 10);
    assert_eq!(first[1], "1.0000000000000000e0");
    let t0: f64 = first[0].parse().unwrap();
    assert_eq!(t0, a);
}
