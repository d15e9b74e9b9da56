use photoemission::observables::*;
use photoemission::PhysicalConfig;
use std::f64::consts::PI;

fn synthetic(omega: f64, periods: f64, f: impl Fn(f64) -> f64 + Sync) -> (CurrentSeries, f64) {
    let tau = 2.0 * PI / omega;
    let dt = tau / SAMPLES_PER_PERIOD as f64;
    let s = CurrentSeries::sample(0.0, periods * tau, dt, |t| Ok(f(t))).unwrap();
    (s, tau)
}

#[test]
fn running_average_of_simple_signals() {
    let (s, tau) = synthetic(0.7, 3.0, |_| 2.5);
    let avg = running_average(&s, tau).unwrap();
    assert!((avg.t0 - tau).abs() < 1e-12);
    assert!(avg.j.iter().all(|v| (v - 2.5).abs() < 1e-13));

    let (s, tau) = synthetic(0.7, 3.0, |t| (0.7 * t).cos());
    let avg = running_average(&s, tau).unwrap();
    assert!(avg.j.iter().all(|v| v.abs() < 1e-10));

    let (s, tau) = synthetic(0.7, 3.0, |t| t);
    let avg = running_average(&s, tau).unwrap();
    for (i, v) in avg.j.iter().enumerate() {
        assert!((v - (avg.t(i) - 0.5 * tau)).abs() < 1e-11);
    }
}

#[test]
fn averages_reject_short_series() {
    let (s, tau) = synthetic(1.0, 0.5, |_| 1.0);
    assert!(running_average(&s, tau).is_err());
    let (s, tau) = synthetic(1.0, 1.5, |_| 1.0);
    assert!(double_average(&s, 1.5 * tau, tau).is_err());
    assert!(running_average(&s, tau * 0.3337).is_err());
}

#[test]
fn double_average_removes_oscillation() {
    let (s, tau) = synthetic(1.3, 4.0, |_| 0.8);
    assert!((double_average(&s, 4.0 * tau, tau).unwrap() - 0.8).abs() < 1e-12);
    let (s, tau) = synthetic(1.3, 4.0, |t| 0.8 + 0.1 * (1.3 * t).cos() + 0.05 * (2.6 * t).sin());
    assert!((double_average(&s, 4.0 * tau, tau).unwrap() - 0.8).abs() < 1e-10);
    assert!((double_average(&s, 3.0 * tau, tau).unwrap() - 0.8).abs() < 1e-10);
}

#[test]
fn planted_power_law_is_recovered() {
    let w = 0.22;
    // The average itself is planted. Spreads are placed at the period ends,
    // so the first periods bias the slope; the fit starts at period 10 and
    // still spans two decades.
    let tau = 2.0 * PI / w;
    let dt = tau / SAMPLES_PER_PERIOD as f64;
    let n_end = 1000.0;
    let avg_samples: Vec<f64> = (0..=((n_end - 1.0) * SAMPLES_PER_PERIOD as f64) as usize)
        .map(|i| {
            let t = tau + i as f64 * dt;
            0.2 + 0.003 * (t / tau).powf(-1.5) * (w * t).sin()
        })
        .collect();
    let avg = CurrentSeries::new(0.0, tau, dt, avg_samples).unwrap();
    let fit = decay_fit(&avg, tau, 10, 1.0).unwrap();
    assert!((fit.slope + 1.5).abs() < 0.02, "{}", fit.slope);
    assert!((fit.prefactor - 0.006).abs() < 0.0003, "{}", fit.prefactor);
    assert!((fit.prefactor_three_halves - 0.006).abs() < 0.0003, "{}", fit.prefactor_three_halves);
    assert_eq!(fit.excluded, 0);
    assert_eq!(fit.points.len(), 991);
}

#[test]
fn flat_average_yields_no_fit_points() {
    let tau = 10.0;
    let dt = tau / 64.0;
    let avg = CurrentSeries::new(0.0, tau, dt, vec![1.0; 64 * 10 + 1]).unwrap();
    let r = decay_fit(&avg, tau, 2, 1.0);
    assert!(r.is_err());
    let short = CurrentSeries::new(0.0, tau, dt, vec![1.0; 64 * 3 + 1]).unwrap();
    assert!(decay_fit(&short, tau, 2, 1.0).is_err());
}

#[test]
fn counting_maxima() {
    let (s, tau) = synthetic(1.0, 3.0, |t| (t + 0.3).cos());
    for p in 1..=3 {
        assert_eq!(count_maxima_per_period(&s, tau, p).unwrap(), 1);
    }
    let (s, tau) = synthetic(1.0, 2.0, |t| 0.1 * t.cos() + (7.0 * t).cos());
    assert_eq!(count_maxima_per_period(&s, tau, 2).unwrap(), 7);
    assert!(count_maxima_per_period(&s, tau, 0).is_err());
    assert!(count_maxima_per_period(&s, tau, 3).is_err());
    assert_eq!(count_maxima(&[0.0, 1e-9, 0.0, 2.0, 0.0], 1e-6), 1);
}

#[test]
fn subperiod_structure() {
    let (s, tau) = synthetic(1.0, 2.0, |t| 1.0 + t.cos() + 0.2 * (2.0 * t).sin());
    assert!(subperiod_amplitude(&s, tau, 2, 2).unwrap() < 1e-12);
    let (s, tau) = synthetic(1.0, 2.0, |t| t.cos() + 0.05 * (9.0 * t).cos());
    assert!((subperiod_amplitude(&s, tau, 1, 2).unwrap() - 0.05).abs() < 1e-9);
}

#[test]
fn threshold_frequency_fixed_point() {
    let cfg = PhysicalConfig::new(4.5, 5.5, 10.0, 6.0).unwrap();
    for offset in [-0.3, 0.0, 0.3] {
        let w = threshold_photon_energy(&cfg, offset).unwrap();
        let at = cfg.with_photon_energy(w).unwrap();
        let wc = photoemission::units::hartree_to_ev(at.thresholds().omega_c);
        assert!((w - wc - offset).abs() < 1e-10, "{offset}: {w} {wc}");
    }
    let free = PhysicalConfig::new(4.5, 5.5, 0.0, 6.0).unwrap();
    assert!((threshold_photon_energy(&free, 0.25).unwrap() - 5.75).abs() < 1e-12);
}

#[test]
fn extrapolation_of_a_planted_tail() {
    let (s, tau) = synthetic(0.5, 40.0, |t| {
        let n = t * 0.5 / (2.0 * PI);
        0.31 + 0.02 * (n + 1.0).powf(-1.5) * (1.0 + 0.5 * (0.5 * t).cos())
    });
    let j = extrapolate_average(&s, tau, 12..=40).unwrap();
    assert!((j - 0.31).abs() < 1e-5, "{j}");
}

#[test]
fn series_validation_and_csv() {
    assert!(CurrentSeries::new(0.0, 0.0, 0.0, vec![1.0, 2.0]).is_err());
    assert!(CurrentSeries::new(0.0, 0.0, 1.0, vec![1.0]).is_err());
    assert!(CurrentSeries::new(0.0, 0.0, 1.0, vec![1.0, f64::NAN]).is_err());
    let cfg = PhysicalConfig::new(4.5, 5.5, 10.0, 6.0).unwrap();
    let s = CurrentSeries::new(0.0, 0.0, 0.5, vec![cfg.k, 0.0]).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf, &cfg).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_au,t_over_period,j_over_k"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0]);
}
