use std::sync::Arc;

use proptest::prelude::*;
use woundcond::assembly::Assembler;
use woundcond::{Field, Mesh};

fn asm(n: usize) -> Assembler<f64> {
    Assembler::new(Arc::new(Mesh::unit_square(n).unwrap()))
}

/// Exact integral of `(a + b x + c y)^2` over `[-1,1]^2`.
fn linear_square_integral(a: f64, b: f64, c: f64) -> f64 {
    4.0 * a * a + 4.0 / 3.0 * (b * b + c * c)
}

#[test]
fn mass_and_stiffness_are_symmetric_with_matching_patterns() {
    let a = asm(4);
    let (m, k) = (a.mass(), a.stiffness());
    assert!(m.max_asymmetry() < 1e-15 && k.max_asymmetry() < 1e-15);
    assert_eq!(m.nnz(), k.nnz());
}

#[test]
fn stiffness_of_quadratic_field() {
    // grad(x^2 + y) has squared norm 4x^2 + 1, whose integral is 16/3 + 4.
    let a = asm(3);
    let c = Field::interpolate(a.mesh().clone(), |p| p[0] * p[0] + p[1]);
    assert!((a.stiffness().quadratic_form(c.coeffs()) - (16.0 / 3.0 + 4.0)).abs() < 1e-11);
}

#[test]
fn weighted_mass_with_linear_weight() {
    // int (1 + x) * y^2 over the square is 4/3.
    let a = asm(2);
    let w = Field::interpolate(a.mesh().clone(), |p| 1.0 + p[0]);
    let c = Field::interpolate(a.mesh().clone(), |p| p[1]);
    let t = a.weighted_mass(&w).unwrap();
    assert!((t.quadratic_form(c.coeffs()) - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn convective_pairing_with_quadratic_weight() {
    // With w = x^2 / 2, grad w = (x, 0); <H(w) c, d> = int c x d_x(d) with c = 1, d = x gives 0,
    // and with c = x, d = x gives int x^2 = 4/3.
    let a = asm(4);
    let w = Field::interpolate(a.mesh().clone(), |p| 0.5 * p[0] * p[0]);
    let h = a.convective(&w).unwrap();
    let x = Field::interpolate(a.mesh().clone(), |p| p[0]);
    let one = vec![1.0; x.len()];
    assert!(h.bilinear(&one, x.coeffs()).abs() < 1e-12);
    assert!((h.bilinear(x.coeffs(), x.coeffs()) - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn mismatched_weight_is_rejected() {
    let a = asm(2);
    let other = Field::constant(Arc::new(Mesh::unit_square(3).unwrap()), 1.0);
    assert!(a.weighted_mass(&other).is_err());
    assert!(a.convective(&other).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_integrates_linear_squares(n in 1usize..6, a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let s = asm(n);
        let f = Field::interpolate(s.mesh().clone(), |p| a + b * p[0] + c * p[1]);
        let exact = linear_square_integral(a, b, c);
        prop_assert!((s.mass().quadratic_form(f.coeffs()) - exact).abs() < 1e-11 * (1.0 + exact));
    }

    #[test]
    fn weighted_mass_is_linear_in_weight(n in 1usize..5, alpha in 0.1f64..3.0, beta in 0.1f64..3.0) {
        let s = asm(n);
        let w1 = Field::interpolate(s.mesh().clone(), |p| 1.0 + p[0] * p[1]);
        let w2 = Field::interpolate(s.mesh().clone(), |p| 2.0 - p[1]);
        let mix: Vec<f64> = w1.coeffs().iter().zip(w2.coeffs()).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = s.weighted_mass(&Field::new(s.mesh().clone(), mix).unwrap()).unwrap();
        let rhs = woundcond::SparseMatrix::linear_combination(&[
            (alpha, &s.weighted_mass(&w1).unwrap()),
            (beta, &s.weighted_mass(&w2).unwrap()),
        ]).unwrap();
        let d = lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(d < 1e-13);
    }

    #[test]
    fn mass_is_positive_definite_on_random_vectors(n in 1usize..5, seed in 0u64..1000) {
        let s = asm(n);
        let l = s.mesh().node_count();
        let c: Vec<f64> = (0..l).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        prop_assert!(s.mass().quadratic_form(&c) > 0.0);
        prop_assert!(s.stiffness().quadratic_form(&c) >= -1e-13);
    }

    #[test]
    fn convective_rows_sum_to_zero(n in 1usize..5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let s = asm(n);
        let w = Field::interpolate(s.mesh().clone(), |p| a * p[0] * p[0] + b * p[0] * p[1]);
        let h = s.convective(&w).unwrap();
        let one = vec![1.0; s.mesh().node_count()];
        let r = h.mul_vec(&one);
        prop_assert!(r.iter().all(|x| x.abs() < 1e-12));
    }
}
