//! Assembly of the P2 mass, stiffness, weighted-mass and convective matrices.
//!
//! Element contributions are accumulated in element order, so every matrix is
//! bitwise reproducible.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fe::{quadrature_rule, shape_ref_gradients, shape_values, FeField, QuadratureRule};
use crate::mesh::TriMesh;
use crate::real::Real;
use crate::sparse::{CsrMatrix, SparsityPattern};

/// Quadrature degrees. Mass integrands are degree 4, stiffness degree 2,
/// the triple product `psi_q psi_tau psi_o` degree 6 and the convective
/// integrand `psi_tau grad psi_q . grad psi_o` degree 4.
pub const MASS_DEGREE: usize = 4;
pub const STIFFNESS_DEGREE: usize = 2;
pub const WEIGHTED_MASS_DEGREE: usize = 6;
pub const CONVECTIVE_DEGREE: usize = 4;

/// Shape data of one quadrature rule, tabulated on the reference element.
#[derive(Clone, Debug)]
struct Tabulation<T> {
    rule: QuadratureRule<T>,
    values: Vec<[T; 6]>,
    ref_grads: Vec<[[T; 2]; 6]>,
}

impl<T: Real> Tabulation<T> {
    fn new(degree: usize) -> Self {
        let rule = quadrature_rule(degree).expect("supported degree");
        let values = rule.iter().map(|(x, y, _)| shape_values(x, y)).collect();
        let ref_grads = rule.iter().map(|(x, y, _)| shape_ref_gradients(x, y)).collect();
        Self { rule, values, ref_grads }
    }
}

/// Assembles FE matrices on one mesh, all sharing one sparsity pattern.
#[derive(Clone, Debug)]
pub struct Assembler<T> {
    mesh: Arc<TriMesh<T>>,
    pattern: Arc<SparsityPattern>,
    mass_tab: Tabulation<T>,
    stiff_tab: Tabulation<T>,
    weighted_tab: Tabulation<T>,
    conv_tab: Tabulation<T>,
}

impl<T: Real> Assembler<T> {
    pub fn new(mesh: Arc<TriMesh<T>>) -> Self {
        let pattern = Arc::new(SparsityPattern::from_mesh(&mesh));
        Self {
            mesh,
            pattern,
            mass_tab: Tabulation::new(MASS_DEGREE),
            stiff_tab: Tabulation::new(STIFFNESS_DEGREE),
            weighted_tab: Tabulation::new(WEIGHTED_MASS_DEGREE),
            conv_tab: Tabulation::new(CONVECTIVE_DEGREE),
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    fn check_field(&self, w: &FeField<T>) -> Result<()> {
        if w.len() != self.mesh.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.mesh.node_count(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Generic element loop. `local(k, geo, tab, out)` fills the 6x6 element
    /// matrix `out[a][b]`, which is added at `(e[a], e[b])`.
    fn assemble(
        &self,
        tab: &Tabulation<T>,
        symmetric: bool,
        mut local: impl FnMut(usize, &crate::mesh::ElementGeometry<T>, &Tabulation<T>, &mut [[T; 6]; 6]),
    ) -> CsrMatrix<T> {
        let mut a = CsrMatrix::zeros(self.pattern.clone(), symmetric);
        for (k, e) in self.mesh.elements().iter().enumerate() {
            let mut loc = [[T::zero(); 6]; 6];
            let geo = self.mesh.geometry(k).expect("element in range");
            local(k, geo, tab, &mut loc);
            for (ai, &row) in e.iter().enumerate() {
                for (bi, &col) in e.iter().enumerate() {
                    a.add(row, col, loc[ai][bi]);
                }
            }
        }
        a
    }

    /// `M[tau][o] = int psi_tau psi_o`.
    pub fn mass(&self) -> CsrMatrix<T> {
        self.assemble(&self.mass_tab, true, |_, geo, tab, loc| {
            let det = geo.det.abs();
            for (q, &w) in tab.rule.weights.iter().enumerate() {
                let n = &tab.values[q];
                let jw = w * det;
                for a in 0..6 {
                    for b in 0..6 {
                        loc[a][b] += jw * n[a] * n[b];
                    }
                }
            }
        })
    }

    /// `K[tau][o] = int grad psi_tau . grad psi_o`.
    pub fn stiffness(&self) -> CsrMatrix<T> {
        self.assemble(&self.stiff_tab, true, |_, geo, tab, loc| {
            let det = geo.det.abs();
            for (q, &w) in tab.rule.weights.iter().enumerate() {
                let g = tab.ref_grads[q].map(|r| geo.push_gradient(r));
                let jw = w * det;
                for a in 0..6 {
                    for b in 0..6 {
                        loc[a][b] += jw * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    }
                }
            }
        })
    }

    /// `T(w)[tau][o] = sum_q w_q int psi_q psi_tau psi_o`.
    pub fn weighted_mass(&self, weight: &FeField<T>) -> Result<CsrMatrix<T>> {
        self.check_field(weight)?;
        let elems = self.mesh.elements();
        let c = weight.coeffs();
        Ok(self.assemble(&self.weighted_tab, true, |k, geo, tab, loc| {
            let det = geo.det.abs();
            let e = &elems[k];
            for (q, &w) in tab.rule.weights.iter().enumerate() {
                let n = &tab.values[q];
                let wq: T = (0..6).map(|a| n[a] * c[e[a]]).sum();
                let jw = w * det * wq;
                for a in 0..6 {
                    for b in 0..6 {
                        loc[a][b] += jw * n[a] * n[b];
                    }
                }
            }
        }))
    }

    /// `H(w)[tau][o] = sum_q w_q int <grad psi_q, grad psi_o> psi_tau`.
    ///
    /// Generally non-symmetric; its rows sum to zero.
    pub fn convective(&self, weight: &FeField<T>) -> Result<CsrMatrix<T>> {
        self.check_field(weight)?;
        let elems = self.mesh.elements();
        let c = weight.coeffs();
        Ok(self.assemble(&self.conv_tab, false, |k, geo, tab, loc| {
            let det = geo.det.abs();
            let e = &elems[k];
            for (q, &w) in tab.rule.weights.iter().enumerate() {
                let n = &tab.values[q];
                let g = tab.ref_grads[q].map(|r| geo.push_gradient(r));
                let mut gw = [T::zero(); 2];
                for a in 0..6 {
                    gw[0] += g[a][0] * c[e[a]];
                    gw[1] += g[a][1] * c[e[a]];
                }
                let jw = w * det;
                for a in 0..6 {
                    for b in 0..6 {
                        loc[a][b] += jw * n[a] * (gw[0] * g[b][0] + gw[1] * g[b][1]);
                    }
                }
            }
        }))
    }

    /// Physical coordinates of the flux quadrature points, element by element.
    pub fn flux_points(&self) -> Vec<[T; 2]> {
        let mut pts = Vec::with_capacity(self.mesh.element_count() * self.conv_tab.rule.len());
        for k in 0..self.mesh.element_count() {
            let geo = self.mesh.geometry(k).expect("element in range");
            pts.extend(self.conv_tab.rule.iter().map(|(x, y, _)| geo.map(x, y)));
        }
        pts
    }

    /// Element index and reference coordinates of every flux quadrature point.
    pub fn flux_point_locations(&self) -> Vec<(usize, T, T)> {
        (0..self.mesh.element_count())
            .flat_map(|k| self.conv_tab.rule.iter().map(move |(x, y, _)| (k, x, y)))
            .collect()
    }

    /// Transport operator `B[o][tau] = int psi_tau v . grad psi_o` for a
    /// velocity sampled at [`Assembler::flux_points`].
    ///
    /// `(B c)_o = int c v . grad psi_o`. For `v = grad W` this is `H(W)^T`.
    pub fn flux_operator(&self, velocity: &[[T; 2]]) -> Result<CsrMatrix<T>> {
        let nq = self.conv_tab.rule.len();
        let expected = self.mesh.element_count() * nq;
        if velocity.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: velocity.len(),
            });
        }
        Ok(self.assemble(&self.conv_tab, false, |k, geo, tab, loc| {
            let det = geo.det.abs();
            for (q, &w) in tab.rule.weights.iter().enumerate() {
                let n = &tab.values[q];
                let g = tab.ref_grads[q].map(|r| geo.push_gradient(r));
                let v = velocity[k * nq + q];
                let jw = w * det;
                for o in 0..6 {
                    let vg = v[0] * g[o][0] + v[1] * g[o][1];
                    for t in 0..6 {
                        loc[o][t] += jw * vg * n[t];
                    }
                }
            }
        }))
    }
}

/// `M` on `mesh`.
pub fn assemble_mass<T: Real>(mesh: &Arc<TriMesh<T>>) -> CsrMatrix<T> {
    Assembler::new(mesh.clone()).mass()
}

/// `K` on `mesh`.
pub fn assemble_stiffness<T: Real>(mesh: &Arc<TriMesh<T>>) -> CsrMatrix<T> {
    Assembler::new(mesh.clone()).stiffness()
}

/// `T(w)` on `mesh`.
pub fn assemble_weighted_mass<T: Real>(mesh: &Arc<TriMesh<T>>, weight: &FeField<T>) -> Result<CsrMatrix<T>> {
    Assembler::new(mesh.clone()).weighted_mass(weight)
}

/// `H(w)` on `mesh`.
pub fn assemble_convective<T: Real>(mesh: &Arc<TriMesh<T>>, weight: &FeField<T>) -> Result<CsrMatrix<T>> {
    Assembler::new(mesh.clone()).convective(weight)
}

/// Nodal interpolant of `f`.
pub fn interpolate<T: Real>(mesh: &Arc<TriMesh<T>>, f: impl Fn([T; 2]) -> T) -> FeField<T> {
    FeField::interpolate(mesh.clone(), f)
}

/// Smoothed step `0.5 + 0.5 tanh(20 x1 - 3)` and its mirror, summed and scaled.
///
/// Close to `amplitude` away from the line `x1 = 0` and close to zero on it.
pub fn wound_profile<T: Real>(amplitude: T, x1: T) -> T {
    let half = T::lit(0.5);
    let (k, s) = (T::lit(20.0), T::lit(3.0));
    amplitude * ((half + half * (k * x1 - s).tanh()) + (half + half * (-k * x1 - s).tanh()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Arc<TriMesh<f64>> {
        Arc::new(TriMesh::unit_square(n).unwrap())
    }

    #[test]
    fn mass_identities() {
        let m = mesh(3);
        let a = Assembler::new(m.clone());
        let mm = a.mass();
        assert!((mm.sum() - 4.0).abs() < 1e-12);
        let one = vec![1.0; m.node_count()];
        assert!((mm.quadratic_form(&one) - 4.0).abs() < 1e-12);
        let x1 = interpolate(&m, |p| p[0]);
        assert!((mm.quadratic_form(x1.coeffs()) - 4.0 / 3.0).abs() < 1e-12);
        assert!(mm.max_asymmetry() < 1e-15);
    }

    #[test]
    fn stiffness_identities() {
        let m = mesh(3);
        let k = assemble_stiffness(&m);
        let one = vec![1.0; m.node_count()];
        assert!(k.mul_vec(&one).iter().all(|v| v.abs() < 1e-12));
        let x1 = interpolate(&m, |p| p[0]);
        assert!((k.quadratic_form(x1.coeffs()) - 4.0).abs() < 1e-12);
        // grad(x1 x2) = (x2, x1), |.|^2 integrates to 8/3.
        let xy = interpolate(&m, |p| p[0] * p[1]);
        assert!((k.quadratic_form(xy.coeffs()) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_mass_identities() {
        let m = mesh(2);
        let a = Assembler::new(m.clone());
        let mm = a.mass();
        let t1 = a.weighted_mass(&FeField::constant(m.clone(), 1.0)).unwrap();
        for (x, y) in t1.values().iter().zip(mm.values()) {
            assert!((x - y).abs() < 1e-13);
        }
        let t0 = a.weighted_mass(&FeField::zeros(m.clone())).unwrap();
        assert_eq!(t0.max_abs(), 0.0);
        let w = interpolate(&m, |p| p[0] + 2.0);
        let one = vec![1.0; m.node_count()];
        let t = a.weighted_mass(&w).unwrap();
        assert!((t.quadratic_form(&one) - 8.0).abs() < 1e-12);
        // int x1^2 (x1 + 2) = 2 * 4/3
        let x1 = interpolate(&m, |p| p[0]);
        assert!((t.quadratic_form(x1.coeffs()) - 8.0 / 3.0).abs() < 1e-12);
        assert!(t.max_asymmetry() < 1e-15);
        let bad = FeField::constant(mesh(1), 1.0);
        assert!(a.weighted_mass(&bad).is_err());
    }

    #[test]
    fn convective_identities() {
        let m = mesh(1);
        let a = Assembler::new(m.clone());
        let h = a.convective(&FeField::constant(m.clone(), 2.5)).unwrap();
        assert!(h.max_abs() < 1e-13);
        let w = interpolate(&m, |p| p[0] * p[0] + p[1]);
        let h = a.convective(&w).unwrap();
        let one = vec![1.0; m.node_count()];
        assert!(h.mul_vec(&one).iter().all(|v| v.abs() < 1e-12));
        // <H(w) c, c> = int (grad w . grad c) c; w = x1, c = x1 + 2 gives int (x1 + 2) = 8.
        let m2 = mesh(2);
        let a2 = Assembler::new(m2.clone());
        let c = interpolate(&m2, |p| p[0] + 2.0);
        let h = a2.convective(&interpolate(&m2, |p| p[0])).unwrap();
        assert!((h.quadratic_form(c.coeffs()) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn convective_is_nonsymmetric() {
        let m = mesh(2);
        let a = Assembler::new(m.clone());
        let w = interpolate(&m, |p| 1.0 + 0.3 * p[0] * p[0] + 0.2 * p[1]);
        assert!(a.convective(&w).unwrap().max_asymmetry() > 1e-6);
    }

    #[test]
    fn flux_operator_matches_convective_transpose() {
        let m = mesh(3);
        let a = Assembler::new(m.clone());
        let w = interpolate(&m, |p| (p[0] * 2.0).sin() + p[1] * p[1]);
        let v: Vec<[f64; 2]> = a
            .flux_point_locations()
            .iter()
            .map(|&(k, x, y)| w.gradient_in(k, x, y))
            .collect();
        let b = a.flux_operator(&v).unwrap();
        let ht = a.convective(&w).unwrap().transpose();
        for (x, y) in b.values().iter().zip(ht.values()) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!(a.flux_operator(&v[1..]).is_err());
    }

    #[test]
    fn wound_profile_values() {
        assert!((wound_profile(1.0, 0.0) - (1.0 + (-3.0f64).tanh())).abs() < 1e-15);
        assert!((wound_profile(1.0f64, 0.0) - 0.004945246313269549).abs() < 1e-12);
        assert!((wound_profile(0.2f64, 1.0) - 0.2).abs() < 1e-10);
        assert!((wound_profile(0.2f64, -1.0) - 0.2).abs() < 1e-10);
    }
}
