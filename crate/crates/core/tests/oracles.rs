use num_complex::Complex64;
use photoemission::oracles::*;

#[test]
fn every_reference_check_passes() {
    let reports = run_oracles();
    assert!(reports.len() > 50);
    for r in &reports {
        let err = match r.measure {
            Measure::Absolute => r.abs_error,
            Measure::Relative => r.rel_error,
        };
        println!("{} {:<60} err {err:.2e} tol {:.0e}", if r.pass { "ok  " } else { "FAIL" }, r.quantity, r.tolerance);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.quantity.as_str()).collect();
    assert!(failed.is_empty(), "{failed:?}");
}

#[test]
fn oracles_agree_with_known_values() {
    // erfc(2) and erfc(5): the series and the continued fraction each.
    let two = erfc_reference(Complex64::new(2.0, 0.0)).re;
    assert!((two - 4.677734981047266e-3).abs() < 1e-17, "{two:e}");
    assert!((erfc_reference(Complex64::new(5.0, 0.0)).re / 1.5374597944280349e-12 - 1.0).abs() < 1e-14);
    assert!((bessel_reference(0, 1.0) - 0.7651976865579666).abs() < 1e-16);
    assert!((bessel_reference(-1, 1.0) + 0.44005058574493355).abs() < 1e-16);
    let table = conversion_table();
    assert!((table.hartree_ev / 27.211386245988 - 1.0).abs() < 1e-12);
}

#[test]
fn report_csv() {
    let reports = vec![OracleReport::new("x", Complex64::new(1.0, 0.0), Complex64::new(1.0, 1e-13), 1e-12, Measure::Absolute)];
    assert!(reports[0].pass);
    let mut buf = Vec::new();
    write_report_csv(&mut buf, &reports).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("quantity,oracle_re"));
    assert!(text.lines().nth(1).unwrap().ends_with(",abs,true"));
}
