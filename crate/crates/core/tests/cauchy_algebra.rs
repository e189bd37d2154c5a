use nitns::experiment::cauchy_algebra_residuals;
use nitns::tensor::{adjugate3, cauchy_action, cauchy_identity_residuals, det3, matmul, matvec, Mat3};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    -2.0..=2.0f64
}

fn mat() -> impl Strategy<Value = Mat3> {
    prop::array::uniform3(prop::array::uniform3(entry()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn identities_hold_for_random_triples(q in prop::array::uniform3(entry()), m in mat(), n in mat()) {
        let r = cauchy_identity_residuals(q, &m, &n);
        prop_assert!(r.max() <= 1e-12, "{r:?}");
    }

    #[test]
    fn singular_maps_use_the_cofactor_form(
        q in prop::array::uniform3(entry()),
        m in mat(),
        n in mat(),
        a in -1.0..1.0f64,
        b in -1.0..1.0f64,
    ) {
        let mut s = m;
        for row in &mut s {
            row[2] = a * row[0] + b * row[1];
        }
        let r = cauchy_identity_residuals(q, &s, &n);
        prop_assert!(r.max() <= 1e-12, "{r:?}");
        let c = cauchy_action(q, &s);
        let adj = matvec(&adjugate3(&s), q);
        for k in 0..3 {
            prop_assert!((c[k] - adj[k]).abs() <= 1e-12 * 64.0);
        }
    }

    #[test]
    fn action_inverts_the_map_times_its_determinant(q in prop::array::uniform3(entry()), m in mat()) {
        // M 𝓒(q, M) = det(M) q
        let back = matvec(&m, cauchy_action(q, &m));
        let d = det3(&m);
        for k in 0..3 {
            prop_assert!((back[k] - d * q[k]).abs() <= 1e-12 * 256.0);
        }
    }
}

#[test]
fn thousand_seeded_samples() {
    for singular in [false, true] {
        let r = cauchy_algebra_residuals(1000, 99, singular);
        assert!(r.iter().all(|&x| x <= 1e-12), "{r:?}");
    }
}

#[test]
fn action_of_a_product_composes() {
    let m = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
    let n = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let q = [1.0, 2.0, 3.0];
    let lhs = cauchy_action(q, &matmul(&m, &n));
    let rhs = cauchy_action(cauchy_action(q, &m), &n);
    assert_eq!(lhs, rhs);
}
