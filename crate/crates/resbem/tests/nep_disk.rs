use resbem::geometry::{build_grid, ParametricCurve};
use resbem::nep::{find_resonances, ContourSpec, SolverOptions};
use resbem::specfun::{besselj, besselj_derivative, hankel1, hankel1_derivative};
use resbem::transfer::{JumpMode, TransferFamily};
use resbem::C64;

fn f_m(m: u32, w: C64) -> C64 {
    let (g1, g2) = (2.0f64, 1.0f64);
    let (k1, k2) = (w / g1.sqrt(), w / g2.sqrt());
    g1 * k1 * besselj_derivative(m, k1).unwrap() * hankel1(m, k2).unwrap()
        - g2 * k2 * besselj(m, k1).unwrap() * hankel1_derivative(m, k2).unwrap()
}

// complex Newton with a central-difference derivative
fn oracle_root(m: u32, mut w: C64) -> C64 {
    for _ in 0..50 {
        let h = 1e-6;
        let d = (f_m(m, w + h) - f_m(m, w - h)) / (2.0 * h);
        let step = f_m(m, w) / d;
        w -= step;
        if step.norm() < 1e-14 {
            break;
        }
    }
    w
}

fn family(n: usize) -> TransferFamily {
    TransferFamily { grid: build_grid(&ParametricCurve::circle(1.0), n).unwrap(), gamma1: 2.0, gamma2: 1.0, mode: JumpMode::Derived }
}

#[test]
fn simple_and_double_disk_resonances() {
    let fam = family(256);
    let opts = SolverOptions::default();
    let r0 = oracle_root(0, C64::new(5.42, -1.25));
    let rep = find_resonances(&fam, &ContourSpec::new(r0 + C64::new(0.05, 0.03), 0.25), &opts).unwrap();
    assert_eq!(rep.results.len(), 1);
    assert!((rep.results[0].lambda - r0).norm() < 1e-6 * r0.norm());
    assert_eq!(rep.results[0].m_geo, 1);

    let r1 = oracle_root(1, C64::new(2.82, -1.6));
    let rep = find_resonances(&fam, &ContourSpec::new(r1 - C64::new(0.04, 0.02), 0.25), &opts).unwrap();
    assert_eq!(rep.results.len(), 1);
    assert!((rep.results[0].lambda - r1).norm() < 1e-6 * r1.norm());
    assert_eq!(rep.results[0].m_geo, 2);
    assert_eq!(rep.results[0].alpha, 1);
}
