use num_complex::Complex64;
use photoemission::volterra::{residual, solve, BoundaryTrace, IntegralCheck, SolverOptions};
use photoemission::{Error, PhysicalConfig};

fn config(field: f64) -> PhysicalConfig {
    PhysicalConfig::new(4.5, 5.5, field, 1.55).unwrap()
}

fn stationary(trace: &BoundaryTrace, t: f64) -> Complex64 {
    let c = &trace.ctx;
    Complex64::from_polar(1.0, -0.5 * c.k * c.k * t) * c.t0
}

#[test]
fn field_free_trace_is_stationary() {
    let cfg = config(0.0);
    let tr = solve(&cfg, 3.0 * cfg.period, &SolverOptions::default()).unwrap();
    let mut err: f64 = 0.0;
    let mut derr: f64 = 0.0;
    let mut jmax: f64 = 0.0;
    for i in 0..=2000 {
        let t = tr.t_end() * i as f64 / 2000.0;
        let ex = stationary(&tr, t);
        err = err.max((tr.psi0(t).unwrap() - ex).norm());
        derr = derr.max((tr.dx_psi0(t).unwrap() + tr.ctx.kappa0 * ex).norm());
        jmax = jmax.max(tr.current(t).unwrap().abs());
    }
    assert!(err < 1e-10, "{err}");
    assert!(derr < 1e-9, "{derr}");
    assert!(jmax < 1e-10 * tr.ctx.k, "{jmax}");
}

#[test]
fn starts_from_the_initial_boundary_value() {
    let cfg = config(15.0);
    let tr = solve(&cfg, 0.25 * cfg.period, &SolverOptions::default()).unwrap();
    let p = tr.psi0(0.0).unwrap();
    assert!((p - tr.ctx.t0).norm() < 1e-10);
    assert!((p.norm_sqr() - 1.8).abs() < 1e-10);
    assert!((tr.ctx.t0.norm_sqr() - 4.0 * cfg.fermi_energy_ev / (cfg.fermi_energy_ev + cfg.work_function_ev)).abs() < 1e-12);
    let (coll, tail, jump) = tr.worst_diagnostics();
    assert!(coll < 1e-9 && tail < 1e-6 && jump < 1e-9, "{coll} {tail} {jump}");
}

#[test]
fn short_time_onset() {
    let cfg = config(15.0);
    let tr = solve(&cfg, 0.05 * cfg.period, &SolverOptions::default()).unwrap();
    let dev = |f: f64| {
        let t = f * cfg.period;
        (tr.psi0(t).unwrap() - stationary(&tr, t)).norm()
    };
    let slope = (dev(1e-4) / dev(1e-6)).ln() / 100f64.ln();
    assert!((slope - 1.5).abs() < 0.1, "{slope}");
    for i in 1..=50 {
        let t = 1e-5 * cfg.period * i as f64 / 50.0;
        assert!(tr.current(t).unwrap().abs() / tr.ctx.k < 1e-3);
    }
    assert!(tr.current(0.0).unwrap().abs() < 1e-8 * tr.ctx.k);
}

#[test]
fn satisfies_the_integral_equation() {
    let cfg = config(30.0);
    let tr = solve(&cfg, 1.5 * cfg.period, &SolverOptions::default()).unwrap();
    let times: Vec<f64> = (1..=5).map(|i| tr.t_end() * i as f64 / 5.0).collect();
    let r = residual(&tr, &times).unwrap();
    assert!(r < 1e-8, "{r}");
    // The check is sensitive to a perturbation of the trace.
    let check = IntegralCheck::for_trace(&tr);
    let bumped = check
        .residual(
            |s| tr.psi0(s).unwrap() + Complex64::new(1e-6 * (s / tr.t_end()).powi(2), 0.0),
            &times,
        )
        .unwrap();
    assert!(bumped > 1e-7, "{bumped}");
}

#[test]
fn extending_is_causal() {
    let cfg = config(15.0);
    let opts = SolverOptions::default();
    let mut a = solve(&cfg, 0.4 * cfg.period, &opts).unwrap();
    let early = a.psi0(0.3 * cfg.period).unwrap();
    a.extend(1.1 * cfg.period).unwrap();
    let b = solve(&cfg, 1.1 * cfg.period, &opts).unwrap();
    assert_eq!(a.psi0(0.3 * cfg.period).unwrap(), early);
    for i in 0..=40 {
        let t = 0.375 * cfg.period * i as f64 / 40.0;
        assert_eq!(a.psi0(t).unwrap(), b.psi0(t).unwrap());
    }
    for i in 0..=40 {
        let t = b.t_end() * i as f64 / 40.0;
        assert!((a.psi0(t).unwrap() - b.psi0(t).unwrap()).norm() < 1e-13);
    }
}

#[test]
fn interface_derivative_at_the_origin() {
    let cfg = config(15.0);
    let tr = solve(&cfg, 0.01 * cfg.period, &SolverOptions::default()).unwrap();
    let d0 = -tr.ctx.kappa0 * tr.ctx.t0;
    assert!((tr.dx_psi0(0.0).unwrap() - d0).norm() < 1e-8);
    assert!((tr.dx_psi0(1e-9).unwrap() - d0).norm() < 1e-6);
}

#[test]
fn csv_has_header_and_full_precision() {
    let cfg = config(15.0);
    let tr = solve(&cfg, 0.1 * cfg.period, &SolverOptions::default()).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf, 10).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_au,t_over_period,re_psi0,im_psi0,re_dxpsi0,im_dxpsi0");
    assert_eq!(lines.len(), 12);
    assert!(!text.contains('\r'));
    let fields: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(fields[0], 0.0);
    assert!((fields[2] - tr.ctx.t0.re).abs() < 1e-14);
    let mantissa = lines[3].split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18);
}

#[test]
fn rejects_bad_requests() {
    let cfg = config(15.0);
    assert!(matches!(solve(&cfg, -1.0, &SolverOptions::default()), Err(Error::Validation { .. })));
    let bad = SolverOptions {
        degree: 2,
        ..SolverOptions::default()
    };
    assert!(solve(&cfg, 1.0, &bad).is_err());
    let tr = solve(&cfg, 10.0, &SolverOptions::default()).unwrap();
    assert!(matches!(tr.psi0(11.0), Err(Error::Domain { .. })));
    assert!(tr.psi0(-1.0).is_err());
}
