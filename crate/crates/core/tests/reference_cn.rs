use photoemission::reference_cn::*;
use photoemission::volterra::{solve, BoundaryTrace, SolverOptions};
use photoemission::PhysicalConfig;
use std::sync::OnceLock;

fn config(field: f64) -> PhysicalConfig {
    PhysicalConfig::new(4.5, 5.5, field, 1.55).unwrap()
}

fn exact_trace() -> &'static BoundaryTrace {
    static TRACE: OnceLock<BoundaryTrace> = OnceLock::new();
    TRACE.get_or_init(|| {
        let cfg = config(15.0);
        solve(&cfg, cfg.period, &SolverOptions::default()).unwrap()
    })
}

/// Largest deviation of the CN surface current from the exact one over the
/// second half of the first period, relative to the exact maximum there.
fn deviation(run: &CnRun, cfg: &PhysicalConfig) -> f64 {
    let trace = exact_trace();
    let (mut dev, mut peak) = (0.0f64, 0.0f64);
    for (t, j) in run.times.iter().zip(&run.current) {
        if *t >= 0.5 * cfg.period {
            let exact = trace.current(t.min(cfg.period)).unwrap();
            dev = dev.max((j - exact).abs());
            peak = peak.max(exact.abs());
        }
    }
    dev / peak
}

fn run(cfg: &PhysicalConfig, a: f64, dx: f64, dt: f64, options: &CnOptions) -> CnRun {
    let grid = CnGrid::new(a, dx, dt)
        .unwrap()
        .aligned(cfg, options.initial, options.surface)
        .unwrap();
    cn_evolve(cfg, &grid, cfg.period, options).unwrap()
}

#[test]
fn discrete_stationary_state_stays_put() {
    let cfg = config(0.0);
    let t_end = 2.0 * cfg.period;
    for surface in [SurfaceNode::Vacuum, SurfaceNode::Midpoint] {
        let opts = CnOptions {
            initial: InitialState::DiscreteStationary,
            surface,
            sample_every: 20,
            ..Default::default()
        };
        let a = 2.0 * cfg.k * t_end + BOX_MARGIN + 1.0;
        let grid = CnGrid::new(a, a / (a / 0.1).round(), 0.01)
            .unwrap()
            .aligned(&cfg, opts.initial, surface)
            .unwrap();
        let out = cn_evolve(&cfg, &grid, t_end, &opts).unwrap();
        let jmax = out.current.iter().fold(0.0f64, |m, j| m.max(j.abs()));
        assert!(jmax < 1e-6 * cfg.k, "{surface:?}: {jmax}");
        assert!(out.norm_drift() < 1e-10);
        assert!(out.warning.is_none());
    }
}

#[test]
fn free_packet_spreads_as_predicted() {
    let cfg = config(0.0);
    let sigma = 2.0;
    let opts = CnOptions {
        initial: InitialState::Gaussian {
            center: 0.0,
            sigma,
            momentum: 0.3,
        },
        snapshots: vec![0.0, 20.0],
        ..Default::default()
    };
    let grid = CnGrid::new(80.0, 0.02, 2e-3).unwrap();
    let out = cn_evolve(&cfg, &grid, 20.0, &opts).unwrap();
    let (t, psi) = &out.snapshots[1];
    assert!((t - 20.0).abs() < 1e-9);
    let predicted = sigma * (1.0 + t * t / (4.0 * sigma.powi(4))).sqrt();
    let width = out.width(psi);
    assert!((width / predicted - 1.0).abs() < 1e-3, "{width} vs {predicted}");
    assert!((out.width(&out.snapshots[0].1) / sigma - 1.0).abs() < 1e-6);
    assert!(out.norm_drift() < 1e-10);
}

#[test]
fn agrees_with_the_exact_solver_after_half_a_period() {
    let cfg = config(15.0);
    let opts = CnOptions {
        sample_every: 5,
        ..Default::default()
    };
    let out = run(&cfg, 139.0, 0.04, 2e-3, &opts);
    assert!(out.norm_drift() < 1e-10);
    assert!(deviation(&out, &cfg) < 0.05);
    // Early on, the sampled state with V(0) = U overshoots downwards while
    // the exact current is non-negative.
    let early: Vec<(f64, f64)> = out
        .times
        .iter()
        .zip(&out.current)
        .filter(|(t, _)| **t / cfg.period < 5e-4)
        .map(|(t, j)| (*t, *j))
        .collect();
    assert!(early.iter().any(|&(_, j)| j < -1e-5 * cfg.k));
    let trace = exact_trace();
    assert!(early.iter().all(|&(t, _)| trace.current(t).unwrap() >= -1e-12));
}

#[test]
fn convergence_order_depends_on_the_surface_node() {
    let cfg = config(15.0);
    let ratio = |surface| {
        let opts = CnOptions {
            surface,
            sample_every: 2,
            ..Default::default()
        };
        let coarse = deviation(&run(&cfg, 300.8, 0.32, 1.6e-2, &opts), &cfg);
        let fine = deviation(&run(&cfg, 300.8, 0.16, 8e-3, &opts), &cfg);
        coarse / fine
    };
    let midpoint = ratio(SurfaceNode::Midpoint);
    assert!(midpoint > 3.0, "{midpoint}");
    let vacuum = ratio(SurfaceNode::Vacuum);
    assert!(vacuum < 2.5, "{vacuum}");
}

#[test]
fn disturbance_at_the_probes_is_flagged() {
    let cfg = config(30.0);
    let opts = CnOptions {
        probe_threshold: 1e-4,
        ..Default::default()
    };
    let grid = CnGrid::new(40.0, 0.08, 4e-3).unwrap();
    assert!(grid.admits(&cfg, 26.0));
    let out = cn_evolve(&cfg, &grid, 26.0, &opts).unwrap();
    assert!(out.warning.is_some());
}

#[test]
fn grid_validation() {
    let cfg = config(15.0);
    assert!(CnGrid::new(10.0, 0.03, 1e-3).is_err());
    assert!(CnGrid::new(10.0, 0.0, 1e-3).is_err());
    assert!(CnGrid::new(10.0, 0.1, -1.0).is_err());
    let grid = CnGrid::new(50.0, 0.1, 1e-2).unwrap();
    assert_eq!(grid.points(), 1001);
    assert!((grid.x(500)).abs() < 1e-15);
    assert!(!grid.admits(&cfg, cfg.period));
    assert!(cn_evolve(&cfg, &grid, cfg.period, &CnOptions::default()).is_err());
    let aligned = CnGrid::default()
        .aligned(&cfg, InitialState::Sampled, SurfaceNode::Vacuum)
        .unwrap();
    assert!((aligned.half_width - 160.0).abs() < 3.0);
    assert!((aligned.dx / 0.02 - 1.0).abs() < 1e-3);
}

#[test]
fn csv_output() {
    let cfg = config(15.0);
    let grid = CnGrid::new(12.0, 0.1, 1e-2).unwrap();
    let opts = CnOptions {
        snapshots: vec![0.5],
        ..Default::default()
    };
    let out = cn_evolve(&cfg, &grid, 1.0, &opts).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf, &cfg).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t_au,t_over_period,j_over_k_cn\n"));
    assert_eq!(text.lines().count(), out.times.len() + 1);
    let mut buf = Vec::new();
    out.write_snapshot(&mut buf, 0).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x_au,re_psi,im_psi\n"));
    assert_eq!(text.lines().count(), grid.points() + 1);
}
