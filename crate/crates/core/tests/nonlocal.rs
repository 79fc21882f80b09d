use std::sync::Arc;

use proptest::prelude::*;
use woundcond::assembly::Assembler;
use woundcond::model::{ModelParams, Species, StateFields};
use woundcond::nonlocal::*;
use woundcond::{Field, Mesh};

fn linear_state(mesh: &Arc<Mesh>) -> StateFields {
    let mut s = StateFields::constant(mesh.clone(), [0.1, 0.2, 0.5, 1.0], 0.0);
    s.f = Field::interpolate(mesh.clone(), |x| 0.3 + 0.2 * x[0]);
    s
}

#[test]
fn far_field_is_crowded() {
    let p = ModelParams::default();
    let rho = volume_fraction(&p, [0.1, 0.2, 0.5, 1.0]);
    assert!((rho - 1.8).abs() < 1e-15);
    assert_eq!(free_space(rho), 0.0);
    assert_eq!(free_space(1.0), 0.0);
    assert_eq!(free_space(0.0), 1.0);
}

#[test]
fn strength_limits() {
    assert_eq!(adhesion_strength(0.2, 0.0, 0.0), 0.0);
    assert!((adhesion_strength(0.2, 0.5, 0.5) - 0.1).abs() < 1e-15);
    assert!((adhesion_strength(0.2, 1e6, 0.0) / 0.2 - 1.0).abs() < 1e-5);
}

#[test]
fn unit_radial_examples() {
    assert_eq!(unit_radial([0.0, 0.0]), [0.0, 0.0]);
    let u = unit_radial([3e-3, 4e-3]);
    assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
    assert_eq!(unit_radial([-0.1, 0.0]), [-1.0, 0.0]);
}

#[test]
fn odd_kernel_moment_vanishes() {
    // With Gamma = 1 the integrand is K n, odd in y.
    let mesh = Arc::new(Mesh::unit_square(4).unwrap());
    let mut p = ModelParams::default();
    p.adhesion.s_max[0] = [1.0, 0.0, 0.0];
    let s = StateFields::constant(mesh, [0.0, 1.0, 0.0, 0.0], 0.0);
    let a = adhesion_integral_full(&s, &p, [0.2, -0.3], Species::Fibroblast, &NonlocalOptions::linearized(64)).unwrap();
    assert!(a[0].abs() < 1e-12 && a[1].abs() < 1e-12);
}

#[test]
fn reduced_flux_of_ramp_is_constant() {
    let mesh = Arc::new(Mesh::unit_square(8).unwrap());
    let p = ModelParams::default();
    let s = linear_state(&mesh);
    let pref = reduction_prefactor(&p.adhesion, PrefactorConvention::Sigma);
    let asm = Assembler::new(mesh);
    for v in adhesion_approx(&asm, &s, &p, Species::Fibroblast, PrefactorConvention::Sigma) {
        assert!((v[0] - pref * 0.2 * 0.2).abs() < 1e-14 && v[1].abs() < 1e-14);
    }
}

#[test]
fn full_flux_matches_reduction_at_interior_flux_points() {
    let mesh = Arc::new(Mesh::unit_square(4).unwrap());
    let p = ModelParams::default();
    let mut s = linear_state(&mesh);
    s.e = Field::interpolate(mesh.clone(), |x| 0.5 - 0.05 * x[1]);
    let asm = Assembler::new(mesh.clone());
    let mut o = NonlocalOptions::linearized(200);
    o.outside = OutsidePolicy::Clamp;
    let full = adhesion_full(&asm, &s, &p, Species::Fibroblast, &o).unwrap();
    let red = adhesion_approx(&asm, &s, &p, Species::Fibroblast, PrefactorConvention::Sigma);
    let mut checked = 0;
    for ((x, a), b) in asm.flux_points().iter().zip(&full).zip(&red) {
        if mesh.domain().boundary_distance(*x) > p.adhesion.r {
            assert!((a[0] - b[0]).hypot(a[1] - b[1]) < 1e-4 * b[0].hypot(b[1]));
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn doubling_strengths_doubles_reduced_flux() {
    let mesh = Arc::new(Mesh::unit_square(4).unwrap());
    let mut p = ModelParams::default();
    let mut s = linear_state(&mesh);
    s.e = Field::interpolate(mesh.clone(), |x| 0.5 + 0.1 * x[1]);
    let a = adhesion_approx_at(&s, &p, Species::Macrophage, PrefactorConvention::Sigma, [0.1, 0.1]).unwrap();
    for row in p.adhesion.s_max.iter_mut() {
        row.iter_mut().for_each(|v| *v *= 2.0);
    }
    let b = adhesion_approx_at(&s, &p, Species::Macrophage, PrefactorConvention::Sigma, [0.1, 0.1]).unwrap();
    assert!((b[0] - 2.0 * a[0]).abs() < 1e-15 && (b[1] - 2.0 * a[1]).abs() < 1e-15);
}

#[test]
fn literal_prefactor_differs_by_normalization() {
    let p = ModelParams::default();
    let s = reduction_prefactor(&p.adhesion, PrefactorConvention::Sigma);
    let l = reduction_prefactor(&p.adhesion, PrefactorConvention::Literal);
    let norm = 2.0 * std::f64::consts::PI * p.adhesion.sigma.powi(2);
    assert!((s / l / norm - 1.0).abs() < 1e-14);
}

#[test]
fn full_flux_rejects_bad_input() {
    let mesh = Arc::new(Mesh::unit_square(2).unwrap());
    let s = StateFields::constant(mesh, [0.1; 4], 0.0);
    let p = ModelParams::default();
    let o = NonlocalOptions::default();
    assert!(adhesion_integral_full(&s, &p, [2.0, 0.0], Species::Fibroblast, &o).is_err());
    let small = NonlocalOptions { quad_n: 3, ..o };
    assert!(adhesion_integral_full(&s, &p, [0.0, 0.0], Species::Fibroblast, &small).is_err());
    assert!(kernel(-0.1, 0.04).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_state_has_no_interior_flux(v in prop::array::uniform4(0.0f64..0.5), x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let mesh = Arc::new(Mesh::unit_square(4).unwrap());
        let s = StateFields::constant(mesh, v, 0.0);
        let p = ModelParams::default();
        for sp in [Species::Fibroblast, Species::Macrophage] {
            let a = adhesion_integral_full(&s, &p, [x, y], sp, &NonlocalOptions::default()).unwrap();
            prop_assert!(a[0].abs() < 1e-10 && a[1].abs() < 1e-10);
        }
    }

    #[test]
    fn full_flux_is_bounded(x in -1.0f64..1.0, y in -1.0f64..1.0, amp in 0.0f64..1.0) {
        // |A| <= (1/R) max|Gamma| int K.
        let mesh = Arc::new(Mesh::unit_square(4).unwrap());
        let mut s = StateFields::constant(mesh.clone(), [0.05, 0.1, 0.1, 0.2], 0.0);
        s.f = Field::interpolate(mesh, move |p| 0.1 + amp * 0.1 * (p[0] + p[1]).abs());
        let p = ModelParams::default();
        let a = adhesion_integral_full(&s, &p, [x, y], Species::Fibroblast, &NonlocalOptions::default()).unwrap();
        let gmax = 0.2 * 0.3 + 0.1 * 0.1 + 0.1 * 0.2;
        let kint = 1.0; // the radial kernel integrates to at most 1 over the plane
        prop_assert!(a[0].hypot(a[1]) <= gmax * kint / p.adhesion.r);
    }

    #[test]
    fn moment_constant_is_positive_and_nondecreasing_in_radius(sigma in 0.01f64..0.2, r in 0.05f64..0.5) {
        let c = moment_constant(sigma, r);
        prop_assert!(c > 0.0);
        prop_assert!(moment_constant(sigma, 1.1 * r) >= c);
    }
}
