//! Property tests: algebraic laws of the matrix kernel and physical
//! invariants of the scattering amplitudes over random valid inputs.

use proptest::prelude::*;
use qscatter::Complex64;
use qscatter::cxmat::CMat;
use qscatter::scattering::{self, ScattererParams};
use qscatter::twobody::{self, TwoParticleInput, build_smatrix, dual_smatrix, w_matrix};

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Diagonally dominant matrices are comfortably invertible (Gershgorin),
/// which keeps the inverse-residual bound meaningful rather than vacuous.
fn dominant_mat(dim: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex_entry(), dim * dim).prop_map(move |data| {
        let mut m = CMat::new(dim, data).unwrap();
        for i in 0..dim {
            let row_sum: f64 = (0..dim).map(|j| m.get(i, j).norm()).sum();
            m.set(i, i, m.get(i, i) + Complex64::new(row_sum + 1.0, 0.0));
        }
        m
    })
}

fn any_mat(dim: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex_entry(), dim * dim)
        .prop_map(move |data| CMat::new(dim, data).unwrap())
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4usize)]
}

fn mat_pair() -> impl Strategy<Value = (CMat, CMat)> {
    dims().prop_flat_map(|d| (any_mat(d), any_mat(d)))
}

fn mat_triple() -> impl Strategy<Value = (CMat, CMat, CMat)> {
    dims().prop_flat_map(|d| (any_mat(d), any_mat(d), any_mat(d)))
}

fn valid_params() -> impl Strategy<Value = ScattererParams> {
    (0.1f64..5.0, 0.0f64..4.0, 0.0f64..4.0)
        .prop_map(|(u0, g, e)| ScattererParams::new(u0, g, e).unwrap())
}

proptest! {
    #[test]
    fn inverse_residual_small(m in dims().prop_flat_map(dominant_mat)) {
        let dim = m.dim();
        let inv = m.inverse().unwrap();
        let residual = m.mul(&inv).unwrap().max_abs_diff(&CMat::identity(dim).unwrap()).unwrap();
        prop_assert!(residual < 1e-12, "residual {residual:.3e}");
    }

    #[test]
    fn adjoint_is_an_involution(m in dims().prop_flat_map(any_mat)) {
        let twice = m.adjoint().adjoint();
        prop_assert_eq!(twice.max_abs_diff(&m).unwrap(), 0.0);
    }

    #[test]
    fn adjoint_reverses_products((a, b) in mat_pair()) {
        let lhs = a.mul(&b).unwrap().adjoint();
        let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn multiplication_associates((a, b, c) in mat_triple()) {
        let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
        let scale = 1.0 + lhs.max_abs().max(rhs.max_abs());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn amplitude_identities_hold(p in valid_params(), k in 1e-3f64..10.0) {
        let a = scattering::amplitudes(&p, k).unwrap();
        let tr = (a.t - a.r - Complex64::new(1.0, 0.0)).norm();
        prop_assert!(tr < 1e-14, "t - r - 1 = {tr:.3e}");
        let sum = a.intensity_sum();
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&sum), "sum {sum}");
        if p.g() == 0.0 || k <= p.threshold_momentum() {
            prop_assert!((sum - 1.0).abs() < 1e-12, "elastic sum {sum}");
        }
    }

    #[test]
    fn deficit_matches_amplitudes(p in valid_params(), k in 1e-3f64..10.0) {
        let a = scattering::amplitudes(&p, k).unwrap();
        let d = scattering::unitarity_deficit(&p, k).unwrap();
        prop_assert!((d - a.intensity_sum()).abs() < 1e-15);
    }

    #[test]
    fn concurrence_bounded_and_symmetric(
        p in valid_params(),
        k1 in 1e-2f64..8.0,
        dk in 1e-3f64..4.0,
    ) {
        let k2 = k1 + dk;
        let inp = TwoParticleInput::new(p, k1, k2).unwrap();
        match twobody::concurrence_reduced(&inp) {
            Ok(eta) => {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&eta), "eta {eta}");
                let swapped = TwoParticleInput::new(p, k2, k1).unwrap();
                let eta_swapped = twobody::concurrence_reduced(&swapped).unwrap();
                prop_assert_eq!(eta.to_bits(), eta_swapped.to_bits());
            }
            // both amplitude cross products vanish only on measure-zero sets
            Err(twobody::TwoBodyError::Undefined) => {}
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
        }
    }

    #[test]
    fn w_matrix_antisymmetric(
        p in valid_params(),
        k1 in 1e-2f64..8.0,
        dk in 1e-3f64..4.0,
    ) {
        let inp = TwoParticleInput::new(p, k1, k1 + dk).unwrap();
        let s = build_smatrix(&inp).unwrap();
        let d = dual_smatrix(&s).unwrap();
        let w = w_matrix(&d).0;
        let skew = w.transpose().scale(Complex64::new(-1.0, 0.0));
        prop_assert!(w.max_abs_diff(&skew).unwrap() < 1e-12 * (1.0 + w.max_abs()));
    }
}
