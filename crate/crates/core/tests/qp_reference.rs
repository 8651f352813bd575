mod common;

use common::{random_asif_qp, AsifQp};
use inspect_rta::constraints::{SafetyModel, SafetyParams};
use inspect_rta::dynamics::PhysicalConstants;
use inspect_rta::qp::QpStatus;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> SafetyModel {
    SafetyModel::new(SafetyParams::default(), PhysicalConstants::default()).tightened()
}

#[test]
fn matches_enumeration_on_random_filter_programs() {
    let model = model();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut optimal = 0;
    for case in 0..200 {
        let p = random_asif_qp(&mut rng, &model);
        let sol = p.to_qp().solve();
        match p.enumerate() {
            Some((_, f_ref)) => {
                assert_eq!(sol.status, QpStatus::Optimal, "case {case}: {p:?}");
                let f = p.cost(&sol.z);
                assert!(
                    (f - f_ref).abs() <= 1e-6 * f_ref.max(1.0),
                    "case {case}: {f} vs {f_ref}"
                );
                assert!(sol.kkt_residual < 1e-8, "case {case}: kkt {}", sol.kkt_residual);
                assert!(p.max_violation(&sol.z) < 1e-8, "case {case}");
                optimal += 1;
            }
            None => assert_eq!(sol.status, QpStatus::Infeasible, "case {case}: {p:?}"),
        }
    }
    assert!(optimal > 150);
}

#[test]
fn repeated_solves_are_bit_identical() {
    let model = model();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let qp = random_asif_qp(&mut rng, &model).to_qp();
        let a = qp.solve();
        let b = qp.solve();
        let bits = |z: &[f64]| z.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.z), bits(&b.z));
        assert_eq!(a.status, b.status);
        assert_eq!(a.iterations, b.iterations);
    }
}

#[test]
fn slack_absorbs_a_conflicting_soft_row() {
    // hard u0 <= 0.5, soft u0 >= 0.9
    let p = AsifQp::new(
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1e-3, 1e-3, 1e-3],
        &[
            ([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0], -0.5, None),
            ([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.9, Some(1e6)),
        ],
    );
    let sol = p.to_qp().solve();
    assert_eq!(sol.status, QpStatus::Optimal);
    assert!((sol.z[0] - 0.5).abs() < 1e-9);
    assert!((sol.z[6] + 0.4).abs() < 1e-9);
}
