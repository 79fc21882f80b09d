//! Quadratic Lagrange basis, triangle quadrature and finite-element fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::real::Real;

/// Values of the six P2 shape functions at reference point `(xi, eta)`.
///
/// Order: vertices 0, 1, 2, then midpoints of edges (0,1), (1,2), (2,0).
#[inline]
pub fn shape_values<T: Real>(xi: T, eta: T) -> [T; 6] {
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let l0 = one - xi - eta;
    let (l1, l2) = (xi, eta);
    [
        l0 * (two * l0 - one),
        l1 * (two * l1 - one),
        l2 * (two * l2 - one),
        four * l0 * l1,
        four * l1 * l2,
        four * l2 * l0,
    ]
}

/// Reference-space gradients `(d/dxi, d/deta)` of the six shape functions.
#[inline]
pub fn shape_ref_gradients<T: Real>(xi: T, eta: T) -> [[T; 2]; 6] {
    let (one, four) = (T::one(), T::lit(4.0));
    let l0 = one - xi - eta;
    let d0 = one - four * l0;
    [
        [d0, d0],
        [four * xi - one, T::zero()],
        [T::zero(), four * eta - one],
        [four * (l0 - xi), -four * xi],
        [four * eta, four * xi],
        [-four * eta, four * (l0 - eta)],
    ]
}

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Points are barycentric `(l0, l1, l2)`; weights sum to the reference area 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    pub degree: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterates `(xi, eta, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.points.iter().zip(&self.weights).map(|(p, &w)| (p[1], p[2], w))
    }
}

/// Symmetric Dunavant rules, exact up to the requested total degree.
pub fn quadrature_rule<T: Real>(degree: usize) -> Result<QuadratureRule<T>> {
    let mut pts: Vec<([f64; 3], f64)> = Vec::new();
    let centroid = |pts: &mut Vec<([f64; 3], f64)>, w: f64| pts.push(([1.0 / 3.0; 3], w));
    let orbit3 = |pts: &mut Vec<([f64; 3], f64)>, a: f64, w: f64| {
        let b = 1.0 - 2.0 * a;
        pts.push(([b, a, a], w));
        pts.push(([a, b, a], w));
        pts.push(([a, a, b], w));
    };
    let orbit6 = |pts: &mut Vec<([f64; 3], f64)>, a: f64, b: f64, w: f64| {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            pts.push((p, w));
        }
    };
    match degree {
        1 => centroid(&mut pts, 1.0),
        2 => orbit3(&mut pts, 1.0 / 6.0, 1.0 / 3.0),
        3 => {
            centroid(&mut pts, -27.0 / 48.0);
            orbit3(&mut pts, 0.2, 25.0 / 48.0);
        }
        4 => {
            orbit3(&mut pts, 0.445948490915965, 0.223381589678011);
            orbit3(&mut pts, 0.091576213509771, 0.109951743655322);
        }
        5 => {
            centroid(&mut pts, 0.225);
            orbit3(&mut pts, 0.470142064105115, 0.132394152788506);
            orbit3(&mut pts, 0.101286507323456, 0.125939180544827);
        }
        6 => {
            orbit3(&mut pts, 0.249286745170910, 0.116786275726379);
            orbit3(&mut pts, 0.063089014491502, 0.050844906370207);
            orbit6(&mut pts, 0.053145049844817, 0.310352451033784, 0.082851075618374);
        }
        d => return Err(Error::UnsupportedDegree(d)),
    }
    // Tabulated weights are accurate to ~1e-15; renormalize so they sum to exactly 1.
    let total: f64 = pts.iter().map(|p| p.1).sum();
    Ok(QuadratureRule {
        degree,
        points: pts
            .iter()
            .map(|(p, _)| [T::lit(p[0]), T::lit(p[1]), T::lit(p[2])])
            .collect(),
        weights: pts.iter().map(|(_, w)| T::lit(0.5 * w / total)).collect(),
    })
}

/// Basis values and physical gradients at one point of one element.
#[derive(Clone, Copy, Debug)]
pub struct BasisEval<T> {
    pub values: [T; 6],
    pub gradients: [[T; 2]; 6],
}

fn check_barycentric<T: Real>(bary: [T; 3]) -> Result<()> {
    let tol = T::lit(1e-12);
    let sum = bary[0] + bary[1] + bary[2];
    if bary.iter().any(|&b| !(b >= -tol)) || (sum - T::one()).abs() > tol {
        return Err(Error::OutsideReference(bary.map(|b| b.to_f64_lossy())));
    }
    Ok(())
}

/// Evaluates the six shape functions of `element` at barycentric `bary`.
pub fn eval_basis<T: Real>(mesh: &TriMesh<T>, element: usize, bary: [T; 3]) -> Result<BasisEval<T>> {
    let geo = mesh.geometry(element)?;
    check_barycentric(bary)?;
    Ok(basis_at(geo, bary[1], bary[2]))
}

#[inline]
pub(crate) fn basis_at<T: Real>(geo: &crate::mesh::ElementGeometry<T>, xi: T, eta: T) -> BasisEval<T> {
    let rg = shape_ref_gradients(xi, eta);
    BasisEval {
        values: shape_values(xi, eta),
        gradients: rg.map(|g| geo.push_gradient(g)),
    }
}

/// Coefficient vector of a P2 function over a mesh.
#[derive(Clone, Debug)]
pub struct FeField<T> {
    mesh: Arc<TriMesh<T>>,
    coeffs: Vec<T>,
}

impl<T: Real> FeField<T> {
    pub fn new(mesh: Arc<TriMesh<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.node_count(),
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("coefficient {i} is not finite")));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn constant(mesh: Arc<TriMesh<T>>, value: T) -> Self {
        let l = mesh.node_count();
        Self {
            mesh,
            coeffs: vec![value; l],
        }
    }

    pub fn zeros(mesh: Arc<TriMesh<T>>) -> Self {
        Self::constant(mesh, T::zero())
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<TriMesh<T>>, f: impl Fn([T; 2]) -> T) -> Self {
        let coeffs = mesh.nodes().iter().map(|&p| f(p)).collect();
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Squared Euclidean norm of the coefficient vector.
    pub fn nodal_norm_sq(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    /// Interpolant value restricted to one element.
    #[inline]
    pub fn value_in(&self, element: usize, xi: T, eta: T) -> T {
        let e = &self.mesh.elements()[element];
        let n = shape_values(xi, eta);
        (0..6).map(|a| n[a] * self.coeffs[e[a]]).sum()
    }

    /// Interpolant gradient restricted to one element.
    #[inline]
    pub fn gradient_in(&self, element: usize, xi: T, eta: T) -> [T; 2] {
        let e = &self.mesh.elements()[element];
        let geo = &self.mesh.geometry(element).expect("element in range");
        let rg = shape_ref_gradients(xi, eta);
        let mut g = [T::zero(); 2];
        for a in 0..6 {
            let c = self.coeffs[e[a]];
            g[0] += rg[a][0] * c;
            g[1] += rg[a][1] * c;
        }
        geo.push_gradient(g)
    }

    /// `sum_tau c_tau psi_tau(p)`.
    pub fn eval(&self, p: [T; 2]) -> Result<T> {
        let (k, xi, eta) = self.mesh.locate(p)?;
        Ok(self.value_in(k, xi, eta))
    }

    /// `sum_tau c_tau grad psi_tau(p)`. On shared edges the value from the
    /// element chosen by [`TriMesh::locate`] is returned.
    pub fn gradient(&self, p: [T; 2]) -> Result<[T; 2]> {
        let (k, xi, eta) = self.mesh.locate(p)?;
        Ok(self.gradient_in(k, xi, eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Arc<TriMesh<f64>> {
        Arc::new(TriMesh::unit_square(n).unwrap())
    }

    const REF_NODES: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

    #[test]
    fn lagrange_property() {
        for (i, p) in REF_NODES.iter().enumerate() {
            let v = shape_values(p[0], p[1]);
            for (j, &vj) in v.iter().enumerate() {
                assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (xi, eta, h) = (0.21f64, 0.33, 1e-6);
        let g = shape_ref_gradients(xi, eta);
        let (px, mx) = (shape_values(xi + h, eta), shape_values(xi - h, eta));
        let (py, my) = (shape_values(xi, eta + h), shape_values(xi, eta - h));
        for a in 0..6 {
            assert!((g[a][0] - (px[a] - mx[a]) / (2.0 * h)).abs() < 1e-8);
            assert!((g[a][1] - (py[a] - my[a]) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn basis_at_vertex_and_sums() {
        let m = mesh(2);
        let b = eval_basis(&m, 3, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(b.values[0], 1.0);
        let b = eval_basis(&m, 5, [0.2, 0.5, 0.3]).unwrap();
        assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let gx: f64 = b.gradients.iter().map(|g| g[0]).sum();
        let gy: f64 = b.gradients.iter().map(|g| g[1]).sum();
        assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
        assert!(matches!(eval_basis(&m, 8, [1.0, 0.0, 0.0]), Err(Error::ElementOutOfRange { .. })));
        assert!(matches!(eval_basis(&m, 0, [1.2, -0.2, 0.0]), Err(Error::OutsideReference(_))));
    }

    #[test]
    fn quadrature_exactness() {
        // int over the reference triangle of xi^a eta^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for deg in 1..=6usize {
            let q = quadrature_rule::<f64>(deg).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for a in 0..=deg as u32 {
                for b in 0..=(deg as u32 - a) {
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    let approx: f64 = q.iter().map(|(x, y, w)| w * x.powi(a as i32) * y.powi(b as i32)).sum();
                    assert!((approx - exact).abs() < 1e-14, "deg {deg} monomial {a},{b}");
                }
            }
        }
        assert!(matches!(quadrature_rule::<f64>(7), Err(Error::UnsupportedDegree(7))));
        assert!(quadrature_rule::<f64>(0).is_err());
    }

    #[test]
    fn element_integrals() {
        let m = mesh(4);
        let q = quadrature_rule::<f64>(4).unwrap();
        let mut one = 0.0;
        let mut x2y2 = 0.0;
        for k in 0..m.element_count() {
            let geo = m.geometry(k).unwrap();
            for (xi, eta, w) in q.iter() {
                let p = geo.map(xi, eta);
                let jw = w * geo.det.abs();
                one += jw;
                x2y2 += jw * p[0] * p[0] * p[1] * p[1];
            }
        }
        assert!((one - 4.0).abs() < 1e-13);
        assert!((x2y2 - 4.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn field_evaluation() {
        let m = mesh(4);
        assert!((FeField::constant(m.clone(), 3.0).eval([0.17, -0.4]).unwrap() - 3.0).abs() < 1e-14);
        let x1 = FeField::interpolate(m.clone(), |p| p[0]);
        assert!((x1.eval([0.3, -0.2]).unwrap() - 0.3).abs() < 1e-14);
        let lin = FeField::interpolate(m.clone(), |p| 2.0 * p[0] + 5.0 * p[1]);
        let g = lin.gradient([0.11, 0.77]).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] - 5.0).abs() < 1e-12);
        let sq = FeField::interpolate(m.clone(), |p| p[0] * p[0]);
        let g = sq.gradient([0.5, 0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        assert!(matches!(x1.eval([1.01, 0.0]), Err(Error::OutOfDomain { .. })));
        assert!(FeField::new(m.clone(), vec![0.0; 3]).is_err());
        assert!(FeField::new(m, vec![f64::NAN; 81]).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let m = Arc::new(TriMesh::<f32>::unit_square(2).unwrap());
        let f = FeField::interpolate(m, |p| p[0] * p[1]);
        assert!((f.eval([0.25, 0.5]).unwrap() - 0.125).abs() < 1e-6);
    }
}
