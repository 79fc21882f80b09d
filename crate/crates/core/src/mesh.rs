//! Uniform P2 triangulation of an axis-aligned rectangle.
//!
//! Every grid cell is split along its lower-left to upper-right diagonal.
//! Nodes live on the `(2n+1) x (2n+1)` lattice (cell vertices plus edge
//! midpoints and the diagonal midpoint) and are numbered lexicographically,
//! `id = j * (2n+1) + i`.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::real::Real;

/// Axis-aligned rectangle given by its lower-left and upper-right corners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T> {
    pub lower: [T; 2],
    pub upper: [T; 2],
}

impl<T: Real> Rect<T> {
    pub fn new(lower: [T; 2], upper: [T; 2]) -> Self {
        Self { lower, upper }
    }

    /// The square `[-1, 1]^2`.
    pub fn unit_square() -> Self {
        Self::new([-T::one(), -T::one()], [T::one(), T::one()])
    }

    pub fn width(&self) -> T {
        self.upper[0] - self.lower[0]
    }

    pub fn height(&self) -> T {
        self.upper[1] - self.lower[1]
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn contains(&self, p: [T; 2]) -> bool {
        let tol = T::lit(1e-12) * self.width().max(self.height());
        p[0] >= self.lower[0] - tol
            && p[0] <= self.upper[0] + tol
            && p[1] >= self.lower[1] - tol
            && p[1] <= self.upper[1] + tol
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: [T; 2]) -> T {
        (p[0] - self.lower[0])
            .min(self.upper[0] - p[0])
            .min(p[1] - self.lower[1])
            .min(self.upper[1] - p[1])
    }
}

/// Affine map of one element: `x = x0 + J * xi`.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry<T> {
    pub origin: [T; 2],
    pub jacobian: [[T; 2]; 2],
    /// `J^{-T}`, which maps reference gradients to physical gradients.
    pub inv_jacobian_t: [[T; 2]; 2],
    pub det: T,
}

impl<T: Real> ElementGeometry<T> {
    fn from_vertices(v: [[T; 2]; 3]) -> Self {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        Self {
            origin: v[0],
            jacobian: j,
            inv_jacobian_t: inv_t,
            det,
        }
    }

    pub fn area(&self) -> T {
        self.det.abs() * T::lit(0.5)
    }

    /// Physical coordinates of a reference point `(xi, eta)`.
    pub fn map(&self, xi: T, eta: T) -> [T; 2] {
        [
            self.origin[0] + self.jacobian[0][0] * xi + self.jacobian[0][1] * eta,
            self.origin[1] + self.jacobian[1][0] * xi + self.jacobian[1][1] * eta,
        ]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn push_gradient(&self, g: [T; 2]) -> [T; 2] {
        let m = &self.inv_jacobian_t;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    domain: Rect<T>,
    n: usize,
    h: T,
    nodes: Vec<[T; 2]>,
    /// Local order: three vertices counter-clockwise, then midpoints of
    /// edges (0,1), (1,2), (2,0).
    elements: Vec<[usize; 6]>,
    geometry: Vec<ElementGeometry<T>>,
    eta1: T,
    eta2: T,
}

impl<T: Real> TriMesh<T> {
    /// Builds the mesh with `n` cells along each side of `domain`.
    pub fn new(n: usize, domain: Rect<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("cell count per side must be >= 1".into()));
        }
        if !(domain.width() > T::zero() && domain.height() > T::zero()) {
            return Err(Error::InvalidMesh("domain must have positive area".into()));
        }
        let side = 2 * n + 1;
        let nn = T::from_usize_lossy(2 * n);
        let mut nodes = Vec::with_capacity(side * side);
        for j in 0..side {
            let y = domain.lower[1] + domain.height() * T::from_usize_lossy(j) / nn;
            for i in 0..side {
                let x = domain.lower[0] + domain.width() * T::from_usize_lossy(i) / nn;
                nodes.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * side + i;
        let mut elements = Vec::with_capacity(2 * n * n);
        for cj in 0..n {
            for ci in 0..n {
                let (i, j) = (2 * ci, 2 * cj);
                let ll = id(i, j);
                let lr = id(i + 2, j);
                let ur = id(i + 2, j + 2);
                let ul = id(i, j + 2);
                let diag = id(i + 1, j + 1);
                elements.push([ll, lr, ur, id(i + 1, j), id(i + 2, j + 1), diag]);
                elements.push([ll, ur, ul, diag, id(i + 1, j + 2), id(i, j + 1)]);
            }
        }
        let geometry: Vec<_> = elements
            .iter()
            .map(|e| ElementGeometry::from_vertices([nodes[e[0]], nodes[e[1]], nodes[e[2]]]))
            .collect();

        let mut mesh = Self {
            domain,
            n,
            h: domain.width().max(domain.height()) / T::from_usize_lossy(n),
            nodes,
            elements,
            geometry,
            eta1: T::zero(),
            eta2: T::zero(),
        };
        let (mut hk_min, mut hk_max, mut ratio_min) = (T::infinity(), T::zero(), T::infinity());
        for k in 0..mesh.elements.len() {
            let d = mesh.element_diameter(k);
            hk_min = hk_min.min(d);
            hk_max = hk_max.max(d);
            ratio_min = ratio_min.min(mesh.inscribed_diameter(k) / d);
        }
        mesh.eta1 = hk_min / hk_max;
        mesh.eta2 = ratio_min;
        Ok(mesh)
    }

    /// `n x n` cells on `[-1, 1]^2`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, Rect::unit_square())
    }

    pub fn domain(&self) -> &Rect<T> {
        &self.domain
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    /// Cell edge length (side length / cells per side).
    pub fn h(&self) -> T {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> [T; 2] {
        self.nodes[id]
    }

    pub fn elements(&self) -> &[[usize; 6]] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> Result<&[usize; 6]> {
        self.elements.get(k).ok_or(Error::ElementOutOfRange {
            id: k,
            count: self.elements.len(),
        })
    }

    pub fn geometry(&self, k: usize) -> Result<&ElementGeometry<T>> {
        self.geometry.get(k).ok_or(Error::ElementOutOfRange {
            id: k,
            count: self.elements.len(),
        })
    }

    pub fn eta1(&self) -> T {
        self.eta1
    }

    pub fn eta2(&self) -> T {
        self.eta2
    }

    fn vertices(&self, k: usize) -> [[T; 2]; 3] {
        let e = &self.elements[k];
        [self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]]]
    }

    fn edge_lengths(&self, k: usize) -> [T; 3] {
        let v = self.vertices(k);
        let len = |a: [T; 2], b: [T; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        [len(v[0], v[1]), len(v[1], v[2]), len(v[2], v[0])]
    }

    /// `h_K`, the longest edge.
    pub fn element_diameter(&self, k: usize) -> T {
        let e = self.edge_lengths(k);
        e[0].max(e[1]).max(e[2])
    }

    /// `rho_K`, diameter of the inscribed circle (`4 * area / perimeter`).
    pub fn inscribed_diameter(&self, k: usize) -> T {
        let e = self.edge_lengths(k);
        T::lit(4.0) * self.geometry[k].area() / (e[0] + e[1] + e[2])
    }

    /// Finds the element containing `p` and the reference coordinates
    /// `(xi, eta)` of `p` in it.
    pub fn locate(&self, p: [T; 2]) -> Result<(usize, T, T)> {
        if !(p[0].is_finite() && p[1].is_finite()) || !self.domain.contains(p) {
            return Err(Error::OutOfDomain {
                x: p[0].to_f64_lossy(),
                y: p[1].to_f64_lossy(),
            });
        }
        let nf = T::from_usize_lossy(self.n);
        let s = (p[0] - self.domain.lower[0]) / self.domain.width() * nf;
        let t = (p[1] - self.domain.lower[1]) / self.domain.height() * nf;
        let cell = |v: T| {
            let c = v.floor().max(T::zero()).to_usize().unwrap_or(0);
            c.min(self.n - 1)
        };
        let (ci, cj) = (cell(s), cell(t));
        let s = s - T::from_usize_lossy(ci);
        let t = t - T::from_usize_lossy(cj);
        let base = 2 * (cj * self.n + ci);
        if t <= s {
            Ok((base, s - t, t))
        } else {
            Ok((base + 1, s, t - s))
        }
    }

    /// Plain-text dump: `id x y` per node, then `id n0 .. n5` per element.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "# nodes {}", self.nodes.len()).unwrap();
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(buf, "{i} {:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        writeln!(buf, "# elements {}", self.elements.len()).unwrap();
        for (k, e) in self.elements.iter().enumerate() {
            writeln!(buf, "{k} {} {} {} {} {} {}", e[0], e[1], e[2], e[3], e[4], e[5]).unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }
}
