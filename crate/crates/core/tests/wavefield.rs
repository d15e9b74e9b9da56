use num_complex::Complex64;
use photoemission::volterra::{solve, BoundaryTrace, SolverOptions};
use photoemission::wavefield::{write_csv, x_grid_nm, Wavefield};
use photoemission::{Error, PhysicalConfig};
use std::sync::OnceLock;

fn trace(field: f64) -> &'static BoundaryTrace {
    static FREE: OnceLock<BoundaryTrace> = OnceLock::new();
    static DRIVEN: OnceLock<BoundaryTrace> = OnceLock::new();
    let cell = if field == 0.0 { &FREE } else { &DRIVEN };
    cell.get_or_init(|| {
        let cfg = PhysicalConfig::new(4.5, 5.5, field, 1.55).unwrap();
        solve(&cfg, cfg.period, &SolverOptions::default()).unwrap()
    })
}

#[test]
fn field_free_state_on_both_sides() {
    let tr = trace(0.0);
    let wf = Wavefield::new(tr).unwrap();
    let c = &tr.ctx;
    for &x in &[-8.0, -2.5, -0.3, -1e-3, 1e-3, 0.4, 2.0, 6.0] {
        for &f in &[0.01, 0.37, 1.0] {
            let t = f * c.period();
            let phase = Complex64::from_polar(1.0, -0.5 * c.k * c.k * t);
            let s = wf.sample(x, t).unwrap();
            assert!((s.psi - phase * c.phi0(x)).norm() < 1e-8, "{x} {f}");
            assert!(s.j.abs() < 1e-10 * c.k, "{x} {f} {}", s.j);
            if x > 0.0 {
                assert!((s.dpsi + c.kappa0 * s.psi).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn continuous_across_the_interface() {
    let tr = trace(15.0);
    let wf = Wavefield::new(tr).unwrap();
    let eps = 1e-7;
    for &f in &[1e-3, 0.2, 0.55, 0.9] {
        let t = f * tr.ctx.period();
        let left = wf.sample(-eps, t).unwrap();
        let right = wf.sample(eps, t).unwrap();
        let p0 = tr.psi0(t).unwrap();
        let d0 = tr.dx_psi0(t).unwrap();
        assert!((left.psi - p0).norm() < 1e-6 && (right.psi - p0).norm() < 1e-6);
        assert!((left.dpsi - right.dpsi).norm() < 1e-6, "{f}");
        assert!((right.dpsi - d0).norm() < 1e-6, "{f}");
        assert_eq!(wf.psi_plus(0.0, t).unwrap(), p0);
        assert_eq!(wf.psi_minus(0.0, t).unwrap(), p0);
    }
}

#[test]
fn analytic_derivative_matches_finite_differences() {
    let tr = trace(15.0);
    let wf = Wavefield::new(tr).unwrap();
    let h = 1e-4;
    for &(x, f) in &[(-4.0, 0.3), (-0.7, 0.81), (0.6, 0.5), (3.0, 0.12), (7.0, 0.95)] {
        let t = f * tr.ctx.period();
        let fd = (wf.psi(x + h, t).unwrap() - wf.psi(x - h, t).unwrap()) / (2.0 * h);
        let d = wf.dpsi_dx(x, t).unwrap();
        assert!((fd - d).norm() < 1e-6, "{x} {f}");
    }
}

#[test]
fn gauge_paths_agree() {
    let tr = trace(15.0);
    let wf = Wavefield::new(tr).unwrap();
    for &(x, f) in &[(0.5, 0.3), (2.0, 0.7), (7.0, 0.2)] {
        let t = f * tr.ctx.period();
        let a = wf.current(x, t).unwrap();
        let b = wf.current_stripped_gauge(x, t).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-6), "{a} {b}");
    }
}

#[test]
fn initial_instant_is_the_initial_state() {
    let tr = trace(15.0);
    let wf = Wavefield::new(tr).unwrap();
    for &x in &[-3.0, -0.2, 0.2, 3.0] {
        let s = wf.sample(x, 0.0).unwrap();
        assert_eq!(s.psi, tr.ctx.phi0(x));
        assert!(s.j.abs() < 1e-15);
        assert!(wf.current(x, 1e-3).unwrap().abs() < 1e-3 * tr.ctx.k);
    }
}

#[test]
fn csv_and_domain_errors() {
    let tr = trace(15.0);
    let wf = Wavefield::new(tr).unwrap();
    let xs = x_grid_nm(-0.2, 0.2, 5);
    assert!((xs[4] - 0.2 / 0.0529177210903).abs() < 1e-12);
    let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 10.0)).collect();
    let samples = wf.samples(&pts).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &samples, &tr.ctx).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x_au,x_nm,t_au,t_over_period,re_psi,im_psi,j_over_k\n"));
    assert_eq!(text.lines().count(), 6);
    assert!(matches!(wf.psi_minus(1.0, 10.0), Err(Error::Domain { .. })));
    assert!(matches!(wf.psi_plus(-1.0, 10.0), Err(Error::Domain { .. })));
    assert!(wf.psi(0.0, 2.0 * tr.t_end()).is_err());
}
