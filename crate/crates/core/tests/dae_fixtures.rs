mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semidae::{Error, ManifoldPoint, SystemDef};

fn manifold_samples(sys: &SystemDef, count: usize, seed: u64) -> Vec<ManifoldPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = sys.region();
    let k = sys.k();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<f64> = (0..sys.n())
            .map(|i| rng.random_range(region.lower()[i]..region.upper()[i]))
            .collect();
        if let Ok(pt) = sys.solve_constraint(&z[..k], &z[k..]) {
            if region.contains(&pt.coords()) {
                out.push(pt);
            }
        }
    }
    out
}

#[test]
fn validation_accepts_sign_definite_constraint() {
    let rep = common::cubic_oscillator().validate(1024).unwrap();
    assert_eq!(rep.sign, 1);
    assert!(rep.min_abs_det >= 1.0);
    assert_eq!(common::lienard().validate(1024).unwrap().sign, 1);
    assert_eq!(common::two_zeros().validate(1024).unwrap().sign, 1);
}

#[test]
fn validation_finds_cusp_witness() {
    match common::cusp().validate(1024) {
        Err(Error::HypothesisViolation { witness, .. }) => {
            assert!(common::dist(&witness, &[0.0, 0.0]) < 1e-2, "witness {witness:?}");
        }
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn validation_finds_circle_witness() {
    match common::circle().validate(1024) {
        Err(Error::HypothesisViolation { witness, .. }) => {
            assert!(witness[1].abs() < 1e-2, "witness {witness:?}");
            assert!((witness[0].abs() - 1.0).abs() < 1e-2, "witness {witness:?}");
        }
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn constraint_solutions_stay_on_manifold() {
    for sys in [common::cubic_oscillator(), common::lienard(), common::two_zeros()] {
        for pt in manifold_samples(&sys, 300, 1) {
            assert!(pt.residual <= 1e-10);
            let again = sys.solve_constraint(&pt.p, &pt.q).unwrap();
            assert_eq!(again.q, pt.q, "a satisfied guess must be returned unchanged");
        }
    }
}

#[test]
fn tangent_fields_are_tangent() {
    for (i, sys) in [common::cubic_oscillator(), common::lienard(), common::two_zeros()]
        .into_iter()
        .enumerate()
    {
        for pt in manifold_samples(&sys, 1000, 10 + i as u64) {
            let psi = sys.psi(&pt).unwrap();
            let d = sys.tangency_defect(&pt, psi.as_slice()).unwrap();
            assert!(d <= 1e-10 * (1.0 + psi.norm()), "Ψ defect {d} at {pt:?}");
            let ups = sys.upsilon(0.7, &pt).unwrap();
            let d = sys.tangency_defect(&pt, ups.as_slice()).unwrap();
            assert!(d <= 1e-10 * (1.0 + ups.norm()), "Υ defect {d} at {pt:?}");
        }
    }
}

#[test]
fn lienard_field_vanishes_at_origin() {
    let sys = common::lienard();
    let pt = sys.solve_constraint(&[0.0], &[0.0]).unwrap();
    assert_eq!(sys.psi(&pt).unwrap().as_slice(), &[0.0, 0.0]);
}
