use resbem::asymptotics::{loglog_slope, predict_shift_simple, PerturbationSetup, PredictionMode};
use resbem::geometry::{build_grid, InclusionSpec, ParametricCurve, Scene};
use resbem::nep::{find_resonances, ContourSpec, SolverOptions};
use resbem::transfer::{JumpMode, PerturbedFamily, TransferFamily};
use resbem::C64;

fn scene(eps: f64, c: f64) -> Scene {
    Scene {
        outer: ParametricCurve::circle(1.0),
        gamma1: 2.0,
        gamma2: 1.0,
        inclusions: vec![InclusionSpec { center: [0.3, 0.0], shape: ParametricCurve::circle(1.0), gamma_d: [[c, 0.0], [0.0, c]] }],
        epsilon: eps,
    }
}

#[test]
fn simple_root_shift_follows_prediction() {
    let n = 192;
    let opts = SolverOptions::default();
    let fam = TransferFamily { grid: build_grid(&ParametricCurve::circle(1.0), n).unwrap(), gamma1: 2.0, gamma2: 1.0, mode: JumpMode::Derived };
    let rep = find_resonances(&fam, &ContourSpec::new(C64::new(5.42, -1.25), 0.2), &opts).unwrap();
    assert_eq!(rep.results.len(), 1);
    let res = &rep.results[0];
    let setup = PerturbationSetup::new(&fam, res, &scene(0.1, 3.0), 64).unwrap();
    let epss = [0.2, 0.1, 0.05];
    let mut errs = Vec::new();
    let mut shifts = Vec::new();
    for &eps in &epss {
        let pred = predict_shift_simple(&setup, eps, PredictionMode::Corrected).unwrap();
        let pf = PerturbedFamily::new(scene(eps, 3.0), n, 48, JumpMode::Derived).unwrap();
        let r = (5.0 * pred.shift.norm()).max(1e-3);
        let found = find_resonances(&pf, &ContourSpec::new(res.lambda + pred.shift, r), &opts).unwrap();
        assert_eq!(found.results.len(), 1, "eps {eps}");
        let actual = found.results[0].lambda - res.lambda;
        errs.push((actual - pred.shift).norm());
        shifts.push(actual.norm());
    }
    let slope_shift = loglog_slope(&epss, &shifts);
    let slope_err = loglog_slope(&epss, &errs);
    assert!((slope_shift - 2.0).abs() < 0.2);
    assert!(slope_err > 2.5);
}
