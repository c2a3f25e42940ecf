use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::calibration::{verify_static, Calibration};
use crate::error::Error;
use crate::fields::{PeriodicGrid, Spectral, VectorField};
use crate::phasefield::{energies, init_well_prepared, varifold_proxy, PhaseFieldSolver};
use crate::sharpinterface::Curve;

const C: [f64; 2] = [0.5, 0.5];

struct Pairing {
    proxy: VarifoldProxy,
    chi: ScalarField,
    fraction: ScalarField,
    cal: Calibration,
    e_s: f64,
}

fn circle_pairing(n: usize, eps: f64) -> Pairing {
    let grid = PeriodicGrid::new(n, 1.0).unwrap();
    let curve = Curve::circle(C, 0.25, 256).unwrap();
    let state = init_well_prepared(grid, &curve, eps, 0.5).unwrap();
    let solver = PhaseFieldSolver::new(grid);
    let rhs = solver.rhs(&state).unwrap();
    let proxy = varifold_proxy(solver.spectral(), &state, &rhs).unwrap();
    let (e_s, _) = energies(solver.spectral(), &state).unwrap();
    let v = vec![0.0; curve.len()];
    let cal = Calibration::build(solver.spectral(), &curve, Some(&v), None, 0.0).unwrap();
    Pairing {
        proxy,
        chi: phase_indicator(&state.u),
        fraction: phase_fraction(solver.spectral(), &state.u).unwrap(),
        cal,
        e_s,
    }
}

#[test]
fn well_prepared_circle_against_its_calibration() {
    let p = circle_pairing(256, 0.04);
    let (e, alt) = relative_entropy(&p.proxy, &p.fraction, &p.cal).unwrap();
    eprintln!("E_rel {e:e}, alt {alt:e}, E_S {}", p.e_s);
    assert!(e >= -NEGATIVITY_TOL && e < 0.1 * p.e_s);
    assert!((e - alt).abs() < 0.05 * e + 1e-3, "{e} vs {alt}");
    let res = verify_static(&Spectral::new(*p.chi.grid()), &p.cal).unwrap();
    let report = coercivity_report(0.0, &p.proxy, &p.chi, &p.fraction, &p.cal, &res).unwrap();
    for (name, c) in INEQUALITIES.iter().zip(&report.coercivity) {
        eprintln!("{name}: {:e} <= {:e}", c.lhs, c.rhs);
    }
    assert!(report.violations().is_empty(), "{:?}", report.violations());
}

fn without_xi(cal: &Calibration) -> Calibration {
    let mut c = cal.clone();
    c.xi = VectorField::zeros(*cal.grid());
    c.div_xi = ScalarField::constant(*cal.grid(), 0.0).unwrap();
    c
}

#[test]
fn empty_calibration_gives_the_mass() {
    let p = circle_pairing(64, 0.08);
    let cal = without_xi(&p.cal);
    let (e, alt) = relative_entropy(&p.proxy, &p.chi, &cal).unwrap();
    let mass = p.proxy.omega.integrate();
    assert!((e - mass).abs() < 1e-12 * mass && (alt - mass).abs() < 1e-12 * mass);
    let res = verify_static(&Spectral::new(*p.chi.grid()), &cal).unwrap();
    let r = coercivity_report(0.0, &p.proxy, &p.chi, &p.fraction, &cal, &res).unwrap();
    let c1 = r.coercivity[0];
    assert!((c1.lhs - mass).abs() < 1e-12 * mass && (c1.rhs - 2.0 * mass).abs() < 1e-12 * mass);
    assert!(c1.holds());
}

#[test]
fn flipped_normals_still_satisfy_the_tilt_bound() {
    let mut p = circle_pairing(64, 0.08);
    let g = *p.chi.grid();
    let (x, y): (Vec<f64>, Vec<f64>) = (0..g.len())
        .map(|k| (-p.proxy.normal.x()[k], -p.proxy.normal.y()[k]))
        .unzip();
    p.proxy.normal = VectorField::new(g, x, y).unwrap();
    let res = verify_static(&Spectral::new(g), &p.cal).unwrap();
    let r = coercivity_report(0.0, &p.proxy, &p.chi, &p.fraction, &p.cal, &res).unwrap();
    assert!(r.coercivity[0].holds() && r.coercivity[5].holds());
    assert!(r.e_rel > p.proxy.omega.integrate());
}

#[test]
fn bulk_error_of_matching_and_shifted_phases() {
    let sp = Spectral::new(PeriodicGrid::new(256, 1.0).unwrap());
    let curve = Curve::circle(C, 0.25, 256).unwrap();
    let cal = Calibration::build(&sp, &curve, None, None, 0.0).unwrap();
    let same = bulk_error(&cal.chi(), &cal).unwrap();
    assert_eq!(same.modulus, 0.0);
    let a = 0.02;
    let grown = ScalarField::from_fn(*sp.grid(), |x, y| {
        if (x - C[0]).hypot(y - C[1]) < 0.25 + a {
            1.0
        } else {
            0.0
        }
    })
    .unwrap();
    let b = bulk_error(&grown, &cal).unwrap();
    let ring = 2.0 * PI * (a * a * 0.25 / 2.0 + a * a * a / 3.0);
    assert!((b.modulus - ring).abs() < 0.05 * ring, "{} vs {ring}", b.modulus);
    assert_eq!(b.modulus, b.signed);
    assert!(b.consistent());
}

#[test]
fn monitor_rejects_empty_and_fits_constants() {
    assert!(matches!(stability_monitor(&[], &[], &[]), Err(Error::EmptySeries(_))));
    let rep = |t: f64, e: f64| EntropyReport {
        t,
        e_rel: e,
        e_rel_alt: e,
        e_bulk: 0.0,
        e_bulk_signed: 0.0,
        coercivity: vec![],
        de_giorgi_residual: None,
    };
    let flat: Vec<_> = (0..5).map(|i| rep(0.1 * i as f64, 0.3)).collect();
    let s = stability_monitor(&flat, &[0.0; 5], &[0.0; 5]).unwrap();
    assert!(s.rate.abs() < 1e-12 && (s.c_fit - 1.0).abs() < 1e-12 && s.bounded());
    // E = e^{2Λ} with Λ = t(1 + 1 + 1).
    let grow: Vec<_> = (0..5)
        .map(|i| rep(0.1 * i as f64, (6.0 * 0.1 * i as f64).exp()))
        .collect();
    let s = stability_monitor(&grow, &[1.0; 5], &[-1.0; 5]).unwrap();
    assert!((s.rate - 2.0).abs() < 1e-6, "{}", s.rate);
    assert!(s.excess < 1e-6);
    assert!(matches!(
        stability_monitor(&flat, &[0.0; 4], &[0.0; 5]),
        Err(Error::Misaligned(_))
    ));
}

#[test]
fn comparison_csv_and_violations() {
    let dir = tempfile::tempdir().unwrap();
    let rep = EntropyReport {
        t: 0.5,
        e_rel: 1.0,
        e_rel_alt: 1.0,
        e_bulk: 0.2,
        e_bulk_signed: 0.2,
        coercivity: INEQUALITIES.iter().map(|_| Coercivity { lhs: 3.0, rhs: 1.0 }).collect(),
        de_giorgi_residual: None,
    };
    let path = dir.path().join("comparison.csv");
    write_comparison_csv(&path, std::slice::from_ref(&rep)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t,E_rel,E_rel_alt,E_bulk,c1_lhs,c1_rhs"));
    assert_eq!(header.split(',').count(), 4 + 2 * INEQUALITIES.len());
    let n = write_violations(&dir.path().join("violations.json"), &[rep]).unwrap();
    assert_eq!(n, INEQUALITIES.len());
}

fn unit(a: f64) -> [f64; 2] {
    [a.cos(), a.sin()]
}

proptest! {
    #[test]
    fn kernel_inequality_holds(a in 0.0..2.0 * PI, b in 0.0..2.0 * PI, r in 0.0f64..=1.0) {
        let p = unit(a);
        let xi = [r * b.cos(), r * b.sin()];
        prop_assert!(kernel_gap(p, xi) >= -1e-14);
        // Tilt bound used by the first inequality.
        let d = [p[0] - xi[0], p[1] - xi[1]];
        prop_assert!(d[0] * d[0] + d[1] * d[1] <= 2.0 * (1.0 - p[0] * xi[0] - p[1] * xi[1]) + 1e-14);
    }
}

#[test]
fn fractions_of_a_half_plane() {
    // Tilted periodic stripes; the fractions sum to the area.
    let grid = PeriodicGrid::new(64, 1.0).unwrap();
    let sp = Spectral::new(grid);
    let u = ScalarField::from_fn(grid, |x, y| 0.5 + 0.1 * (2.0 * PI * (x + 2.0 * y)).sin()).unwrap();
    let f = phase_fraction(&sp, &u).unwrap();
    assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
    // {sin > 0} covers half of the torus.
    assert!((f.integrate() - 0.5).abs() < 1e-4, "{}", f.integrate());
    let pix = phase_indicator(&u);
    for k in 0..grid.len() {
        if (u.values()[k] - 0.5).abs() > 0.05 {
            assert_eq!(f.values()[k], pix.values()[k]);
        }
    }
}

#[test]
fn square_fraction_is_continuous_and_symmetric() {
    for &(nx, ny) in &[(1.0, 0.0), (0.6, 0.8), (0.8, -0.6), (0.0, 1.0)] {
        let mut prev = 0.0;
        for k in 0..=400 {
            let d = -0.02 + 0.04 * k as f64 / 400.0;
            let v = super::square_fraction(d, nx, ny, 0.02);
            assert!(v >= prev - 1e-15 && (v - prev).abs() < 0.02);
            assert!((v + super::square_fraction(-d, nx, ny, 0.02) - 1.0).abs() < 1e-12);
            prev = v;
        }
    }
}

#[test]
fn symmetric_difference_of_concentric_circles() {
    let sp = Spectral::new(PeriodicGrid::new(128, 1.0).unwrap());
    let cal = Calibration::build(&sp, &Curve::circle(C, 0.25, 256).unwrap(), None, None, 0.0).unwrap();
    let own = strong_fraction(&cal);
    assert!((own.integrate() - PI * 0.0625).abs() < 1e-4, "{}", own.integrate());
    assert!(symmetric_difference(&own, &cal).unwrap() == 0.0);
    let grid = *sp.grid();
    let u = ScalarField::from_fn(grid, |x, y| 0.5 + 0.27 - (x - C[0]).hypot(y - C[1])).unwrap();
    let f = phase_fraction(&sp, &u).unwrap();
    let ring = PI * (0.27f64.powi(2) - 0.0625);
    let area = symmetric_difference(&f, &cal).unwrap();
    assert!((area - ring).abs() < 2e-3 * ring, "{area} vs {ring}");
}
