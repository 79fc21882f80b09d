//! Non-local adhesion flux and its first-order moment reduction.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::Assembler;
use crate::error::{Error, Result};
pub use crate::model::{AdhesionParams, Species, StateFields};
use crate::model::ModelParams;

/// Radial kernel `K(r) = r / (2 pi sigma^2) exp(-r^2 / (2 sigma^2))`.
pub fn kernel(r: f64, sigma: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("kernel distance must be non-negative, got {r}")));
    }
    Ok(kernel_unchecked(r, sigma))
}

#[inline]
fn kernel_unchecked(r: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    r / (2.0 * PI * s2) * (-r * r / (2.0 * s2)).exp()
}

/// `y / |y|`, and `(0, 0)` at the origin.
#[inline]
pub fn unit_radial(y: [f64; 2]) -> [f64; 2] {
    let r = y[0].hypot(y[1]);
    if r == 0.0 {
        [0.0, 0.0]
    } else {
        [y[0] / r, y[1] / r]
    }
}

/// `rho = w_g g + w_f f + w_m m + w_e e` for values `(g, f, m, e)`.
#[inline]
pub fn volume_fraction(params: &ModelParams, u: [f64; 4]) -> f64 {
    params.w_g * u[0] + params.w_f * u[1] + params.w_m * u[2] + params.w_e * u[3]
}

/// `(1 - rho)^+`.
#[inline]
pub fn free_space(rho: f64) -> f64 {
    (1.0 - rho).max(0.0)
}

/// `S_ij = S_max (e + g) / (1 + e + g)`.
#[inline]
pub fn adhesion_strength(s_max: f64, e: f64, g: f64) -> f64 {
    let x = e + g;
    s_max * x / (1.0 + x)
}

/// Policy for sensing points `x + y` that fall outside the domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutsidePolicy {
    /// Densities vanish outside the tissue.
    #[default]
    Zero,
    /// Use the value at the nearest boundary point.
    Clamp,
}

/// Prefactor of the reduced flux.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefactorConvention {
    /// `C / (2 pi sigma^2 R)`, the exact first-order coefficient of the full flux.
    #[default]
    Sigma,
    /// The fibroblast-section display taken at face value: its closed form
    /// already carries `1 / (2 pi sigma^2)`, and the display divides by
    /// `2 pi sigma^2 R` again.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlocalOptions {
    /// Midpoint cells per side of the sensing square.
    pub quad_n: usize,
    pub outside: OutsidePolicy,
    /// Force `(1 - rho)^+ = 1`.
    pub unit_free_space: bool,
    /// Force `S_ij = S_max`.
    pub saturated_strength: bool,
    pub prefactor_convention: PrefactorConvention,
}

impl Default for NonlocalOptions {
    fn default() -> Self {
        Self {
            quad_n: 16,
            outside: OutsidePolicy::Zero,
            unit_free_space: false,
            saturated_strength: false,
            prefactor_convention: PrefactorConvention::Sigma,
        }
    }
}

impl NonlocalOptions {
    /// Both substitutions under which the reduction is exact for linear fields.
    pub fn linearized(quad_n: usize) -> Self {
        Self {
            quad_n,
            unit_free_space: true,
            saturated_strength: true,
            ..Self::default()
        }
    }
}

/// `C = int_{[-R,R]^2} exp(-|y|^2 / (2 sigma^2)) y_1^2 dy`, closed form.
pub fn moment_constant(sigma: f64, r: f64) -> f64 {
    let a = r / (sigma * std::f64::consts::SQRT_2);
    let er = libm::erf(a);
    let s2pi = (2.0 * PI).sqrt();
    // (int y^2 e^{..} over [-R,R]) * (int e^{..} over [-R,R])
    let second = sigma * sigma * (sigma * s2pi * er - 2.0 * r * (-a * a).exp());
    let zeroth = sigma * s2pi * er;
    second * zeroth
}

/// Brute-force tensor Gauss-Legendre evaluation of `int y_1^p y_2^q exp(..)`
/// over the sensing square, used to cross-check [`moment_constant`].
pub fn moment_quadrature(sigma: f64, r: f64, cells: usize, p: i32, q: i32) -> f64 {
    // Three-point Gauss-Legendre per cell.
    let gx = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let gw = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let h = 2.0 * r / cells as f64;
    let mut nodes = Vec::with_capacity(3 * cells);
    for c in 0..cells {
        let mid = -r + (c as f64 + 0.5) * h;
        for k in 0..3 {
            nodes.push((mid + 0.5 * h * gx[k], 0.5 * h * gw[k]));
        }
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    nodes
        .par_iter()
        .map(|&(y1, w1)| {
            let mut s = 0.0;
            for &(y2, w2) in &nodes {
                s += w2 * y2.powi(q) * (-(y1 * y1 + y2 * y2) * inv).exp();
            }
            w1 * y1.powi(p) * s
        })
        .sum()
}

/// Coefficient multiplying the gradient combination in the reduced flux.
pub fn reduction_prefactor(adh: &AdhesionParams, conv: PrefactorConvention) -> f64 {
    let c = moment_constant(adh.sigma, adh.r);
    let norm = 2.0 * PI * adh.sigma * adh.sigma;
    match conv {
        PrefactorConvention::Sigma => c / (norm * adh.r),
        PrefactorConvention::Literal => c / (norm * norm * adh.r),
    }
}

#[inline]
fn gamma(params: &ModelParams, species: Species, u: [f64; 4], opts: &NonlocalOptions) -> f64 {
    let s = &params.adhesion.s_max[species.row()];
    let sat = if opts.saturated_strength {
        1.0
    } else {
        let x = u[3] + u[0];
        x / (1.0 + x)
    };
    let space = if opts.unit_free_space {
        1.0
    } else {
        free_space(volume_fraction(params, u))
    };
    space * sat * (s[0] * u[1] + s[1] * u[2] + s[2] * u[3])
}

/// Full flux `(1/R) int K(|y|) n(y) ((1 - rho)^+ Gamma_i)(x + y) dy` by the
/// midpoint rule on `quad_n^2` cells.
pub fn adhesion_integral_full(
    state: &StateFields,
    params: &ModelParams,
    x: [f64; 2],
    species: Species,
    opts: &NonlocalOptions,
) -> Result<[f64; 2]> {
    let mesh = state.mesh();
    let dom = *mesh.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain { x: x[0], y: x[1] });
    }
    if opts.quad_n < 4 {
        return Err(Error::InvalidArgument("quad_n must be at least 4".into()));
    }
    let adh = &params.adhesion;
    let n = opts.quad_n;
    let h = 2.0 * adh.r / n as f64;
    let cell = h * h;
    let mut acc = [0.0; 2];
    let mut gmax = 0.0f64;
    let mut kint = 0.0;
    for i in 0..n {
        let y1 = -adh.r + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y2 = -adh.r + (j as f64 + 0.5) * h;
            let mut p = [x[0] + y1, x[1] + y2];
            if !dom.contains(p) {
                match opts.outside {
                    OutsidePolicy::Zero => continue,
                    OutsidePolicy::Clamp => {
                        p = [
                            p[0].clamp(dom.lower[0], dom.upper[0]),
                            p[1].clamp(dom.lower[1], dom.upper[1]),
                        ];
                    }
                }
            }
            let u = state.values_at(p)?;
            let gm = gamma(params, species, u, opts);
            let r = y1.hypot(y2);
            let k = kernel_unchecked(r, adh.sigma);
            let nv = unit_radial([y1, y2]);
            acc[0] += k * nv[0] * gm;
            acc[1] += k * nv[1] * gm;
            if cfg!(debug_assertions) {
                gmax = gmax.max(gm.abs());
                kint += k;
            }
        }
    }
    let out = [acc[0] * cell / adh.r, acc[1] * cell / adh.r];
    debug_assert!(
        out[0].hypot(out[1]) <= gmax * kint * cell / adh.r * (1.0 + 1e-12) + 1e-300,
        "flux exceeds its a-priori bound"
    );
    Ok(out)
}

/// Reduced flux `P (S_if grad f + S_im grad m + S_ie grad e)` at one location.
#[inline]
fn approx_in(state: &StateFields, params: &ModelParams, species: Species, pref: f64, k: usize, xi: f64, eta: f64) -> [f64; 2] {
    let s = &params.adhesion.s_max[species.row()];
    let gf = state.f.gradient_in(k, xi, eta);
    let gm = state.m.gradient_in(k, xi, eta);
    let ge = state.e.gradient_in(k, xi, eta);
    [
        pref * (s[0] * gf[0] + s[1] * gm[0] + s[2] * ge[0]),
        pref * (s[0] * gf[1] + s[1] * gm[1] + s[2] * ge[1]),
    ]
}

/// Reduced flux at a physical point.
pub fn adhesion_approx_at(
    state: &StateFields,
    params: &ModelParams,
    species: Species,
    conv: PrefactorConvention,
    x: [f64; 2],
) -> Result<[f64; 2]> {
    let (k, xi, eta) = state.mesh().locate(x)?;
    let pref = reduction_prefactor(&params.adhesion, conv);
    Ok(approx_in(state, params, species, pref, k, xi, eta))
}

/// Reduced flux sampled at the assembler's flux quadrature points.
pub fn adhesion_approx(
    asm: &Assembler<f64>,
    state: &StateFields,
    params: &ModelParams,
    species: Species,
    conv: PrefactorConvention,
) -> Vec<[f64; 2]> {
    let pref = reduction_prefactor(&params.adhesion, conv);
    asm.flux_point_locations()
        .into_iter()
        .map(|(k, xi, eta)| approx_in(state, params, species, pref, k, xi, eta))
        .collect()
}

/// Full flux sampled at the assembler's flux quadrature points, in parallel.
pub fn adhesion_full(
    asm: &Assembler<f64>,
    state: &StateFields,
    params: &ModelParams,
    species: Species,
    opts: &NonlocalOptions,
) -> Result<Vec<[f64; 2]>> {
    asm.flux_points()
        .par_iter()
        .map(|&x| adhesion_integral_full(state, params, x, species, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FeField, Mesh};
    use std::sync::Arc;

    #[test]
    fn kernel_values() {
        assert_eq!(kernel(0.0, 0.04).unwrap(), 0.0);
        let s = 0.04;
        assert!((kernel(s, s).unwrap() - (-0.5f64).exp() / (2.0 * PI * s)).abs() < 1e-12);
        assert!((kernel(0.04, 0.04).unwrap() - 2.41331).abs() < 1e-5);
        assert!((kernel(0.04, 0.04).unwrap() / 2.4130 - 1.0).abs() < 5e-4);
        assert!(kernel(-1.0, 0.04).is_err());
    }

    #[test]
    fn radial_vector() {
        assert_eq!(unit_radial([0.0, 0.0]), [0.0, 0.0]);
        let v = unit_radial([3e-3, 4e-3]);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        assert_eq!(unit_radial([-0.1, 0.0]), [-1.0, 0.0]);
    }

    #[test]
    fn crowding_and_strength() {
        let p = ModelParams::default();
        let rho = volume_fraction(&p, [0.1, 0.2, 0.5, 1.0]);
        assert!((rho - 1.8).abs() < 1e-15);
        assert_eq!(free_space(rho), 0.0);
        assert_eq!(free_space(0.0), 1.0);
        assert_eq!(free_space(1.0), 0.0);
        assert_eq!(adhesion_strength(0.3, 0.0, 0.0), 0.0);
        assert!((adhesion_strength(0.3, 0.4, 0.6) - 0.15).abs() < 1e-15);
        assert!((adhesion_strength(0.3, 1e6, 0.0) / 0.3 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_and_constant_states() {
        let mesh = Arc::new(Mesh::unit_square(8).unwrap());
        let p = ModelParams::default();
        let zero = StateFields::constant(mesh.clone(), [0.0; 4], 0.0);
        let o = NonlocalOptions::default();
        assert_eq!(adhesion_integral_full(&zero, &p, [0.1, 0.2], Species::Fibroblast, &o).unwrap(), [0.0, 0.0]);
        let c = StateFields::constant(mesh.clone(), [0.05, 0.1, 0.2, 0.3], 0.0);
        for x in [[0.0, 0.0], [0.33, -0.41], [-0.8, 0.7]] {
            let a = adhesion_integral_full(&c, &p, x, Species::Macrophage, &o).unwrap();
            assert!(a[0].abs() < 1e-10 && a[1].abs() < 1e-10, "{a:?}");
        }
        assert!(adhesion_integral_full(&c, &p, [2.0, 0.0], Species::Fibroblast, &o).is_err());
    }

    #[test]
    fn boundary_policies_differ() {
        let mesh = Arc::new(Mesh::unit_square(8).unwrap());
        let p = ModelParams::default();
        let c = StateFields::constant(mesh.clone(), [0.05, 0.1, 0.2, 0.3], 0.0);
        let mut o = NonlocalOptions::default();
        let x = [0.97, 0.0];
        let zero = adhesion_integral_full(&c, &p, x, Species::Fibroblast, &o).unwrap();
        // Mass is missing on the right, so the flux points left.
        assert!(zero[0] < 0.0);
        o.outside = OutsidePolicy::Clamp;
        let clamp = adhesion_integral_full(&c, &p, x, Species::Fibroblast, &o).unwrap();
        assert!(clamp[0].abs() < 1e-10);
    }

    #[test]
    fn closed_form_vs_quadrature() {
        let c = moment_constant(0.04, 0.1);
        let q = moment_quadrature(0.04, 0.1, 200, 2, 0);
        assert!(((c - q) / c).abs() < 1e-12);
        assert!(moment_quadrature(0.04, 0.1, 200, 1, 1).abs() < 1e-16);
        assert!(c > 0.0);
    }

    #[test]
    fn reduced_flux_linear_field() {
        let mesh = Arc::new(Mesh::unit_square(4).unwrap());
        let p = ModelParams::default();
        let mut s = StateFields::constant(mesh.clone(), [0.1, 0.0, 0.3, 0.2], 0.0);
        s.f = FeField::interpolate(mesh.clone(), |x| x[0]);
        let pref = reduction_prefactor(&p.adhesion, PrefactorConvention::Sigma);
        let a = adhesion_approx_at(&s, &p, Species::Fibroblast, PrefactorConvention::Sigma, [0.3, 0.1]).unwrap();
        assert!((a[0] - pref * 0.2).abs() < 1e-14 && a[1].abs() < 1e-14);
        let lit = reduction_prefactor(&p.adhesion, PrefactorConvention::Literal);
        assert!((lit * 2.0 * PI * 0.04 * 0.04 - pref).abs() < 1e-14 * pref);
    }
}
