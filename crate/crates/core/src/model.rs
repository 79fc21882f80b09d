//! Model parameters and the four-field state `(g, f, m, e)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::assembly::wound_profile;
use crate::error::{Error, Result};
use crate::{FeField, Mesh};

/// One of the four coupled equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// Growth factor.
    G,
    /// Fibroblasts.
    F,
    /// Macrophages.
    M,
    /// Extracellular matrix.
    E,
}

impl Equation {
    /// Tie-break order for dominance.
    pub const ALL: [Equation; 4] = [Equation::G, Equation::F, Equation::M, Equation::E];

    pub fn label(self) -> &'static str {
        match self {
            Equation::G => "g",
            Equation::F => "f",
            Equation::M => "m",
            Equation::E => "e",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Cell population carrying an adhesion flux.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    Fibroblast,
    Macrophage,
}

impl Species {
    pub(crate) fn row(self) -> usize {
        match self {
            Species::Fibroblast => 0,
            Species::Macrophage => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdhesionParams {
    /// `s_max[i][j]`, `i` in `{f, m}`, `j` in `{f, m, e}`.
    pub s_max: [[f64; 3]; 2],
    /// Sensing radius.
    pub r: f64,
    /// Kernel standard deviation.
    pub sigma: f64,
    pub mu_f: f64,
    pub mu_m: f64,
}

impl Default for AdhesionParams {
    fn default() -> Self {
        Self {
            s_max: [[0.2, 0.1, 0.1], [0.1, 0.2, 1.0]],
            r: 0.1,
            sigma: 0.04,
            mu_f: 0.08,
            mu_m: 0.08,
        }
    }
}

impl AdhesionParams {
    pub fn mu(&self, s: Species) -> f64 {
        match s {
            Species::Fibroblast => self.mu_f,
            Species::Macrophage => self.mu_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter("R and sigma must be positive".into()));
        }
        if self.s_max.iter().flatten().any(|&s| !(s >= 0.0)) {
            return Err(Error::InvalidParameter("adhesion strengths must be non-negative".into()));
        }
        if !(self.mu_f >= 0.0 && self.mu_m >= 0.0) {
            return Err(Error::InvalidParameter("mu_f and mu_m must be non-negative".into()));
        }
        Ok(())
    }
}

/// Every scalar of the model; defaults are the reference parameter set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub d_g: f64,
    pub d_f: f64,
    pub d_m: f64,
    pub lambda_g: f64,
    pub lambda_f: f64,
    pub lambda_m: f64,
    pub p_g_f: f64,
    pub p_g_m: f64,
    pub p_f: f64,
    pub p_m: f64,
    pub p_e: f64,
    pub alpha_f: f64,
    pub alpha_m: f64,
    pub alpha_e: f64,
    pub e_c: f64,
    pub w_g: f64,
    pub w_f: f64,
    pub w_m: f64,
    pub w_e: f64,
    pub adhesion: AdhesionParams,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            d_g: 0.0035,
            d_f: 0.0008,
            d_m: 0.0008,
            lambda_g: 0.2,
            lambda_f: 0.025,
            lambda_m: 0.025,
            p_g_f: 0.2,
            p_g_m: 0.2,
            p_f: 5.0,
            p_m: 5.0,
            p_e: 5.0,
            alpha_f: 0.015,
            alpha_m: 0.015,
            alpha_e: 0.05,
            e_c: 0.1,
            w_g: 1.0,
            w_f: 1.0,
            w_m: 1.0,
            w_e: 1.0,
            adhesion: AdhesionParams::default(),
            dt: 0.2,
            t_end: 100.0,
        }
    }
}

const PARAM_NAMES: &[&str] = &[
    "D_g", "D_f", "D_m", "lambda_g", "lambda_f", "lambda_m", "p_g_f", "p_g_m", "p_f", "p_m", "p_e",
    "alpha_f", "alpha_m", "alpha_e", "e_c", "w_g", "w_f", "w_m", "w_e", "S_ff", "S_fm", "S_fe",
    "S_mf", "S_mm", "S_me", "mu_f", "mu_m", "R", "sigma", "dt", "t_end",
];

fn slot<'a>(p: &'a mut ModelParams, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "D_g" => &mut p.d_g,
        "D_f" => &mut p.d_f,
        "D_m" => &mut p.d_m,
        "lambda_g" => &mut p.lambda_g,
        "lambda_f" => &mut p.lambda_f,
        "lambda_m" => &mut p.lambda_m,
        "p_g_f" => &mut p.p_g_f,
        "p_g_m" => &mut p.p_g_m,
        "p_f" => &mut p.p_f,
        "p_m" => &mut p.p_m,
        "p_e" => &mut p.p_e,
        "alpha_f" => &mut p.alpha_f,
        "alpha_m" => &mut p.alpha_m,
        "alpha_e" => &mut p.alpha_e,
        "e_c" => &mut p.e_c,
        "w_g" => &mut p.w_g,
        "w_f" => &mut p.w_f,
        "w_m" => &mut p.w_m,
        "w_e" => &mut p.w_e,
        "S_ff" => &mut p.adhesion.s_max[0][0],
        "S_fm" => &mut p.adhesion.s_max[0][1],
        "S_fe" => &mut p.adhesion.s_max[0][2],
        "S_mf" => &mut p.adhesion.s_max[1][0],
        "S_mm" => &mut p.adhesion.s_max[1][1],
        "S_me" => &mut p.adhesion.s_max[1][2],
        "mu_f" => &mut p.adhesion.mu_f,
        "mu_m" => &mut p.adhesion.mu_m,
        "R" => &mut p.adhesion.r,
        "sigma" => &mut p.adhesion.sigma,
        "dt" => &mut p.dt,
        "t_end" => &mut p.t_end,
        _ => return None,
    })
}

impl ModelParams {
    /// Names accepted by [`ModelParams::set`], in canonical order.
    pub fn names() -> &'static [&'static str] {
        PARAM_NAMES
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let mut copy = *self;
        slot(&mut copy, name)
            .map(|v| *v)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown parameter `{name}`")))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("`{name}` must be finite")));
        }
        let s = slot(self, name).ok_or_else(|| Error::InvalidParameter(format!("unknown parameter `{name}`")))?;
        *s = value;
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        PARAM_NAMES
            .iter()
            .map(|&n| (n.to_string(), self.get(n).expect("known name")))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for &n in PARAM_NAMES {
            let v = self.get(n)?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("`{n}` = {v} must be finite and non-negative")));
            }
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        self.adhesion.validate()
    }

    /// `(lambda, p, w, D)` of the cell equation for `s`.
    pub(crate) fn cell_rates(&self, s: Species) -> (f64, f64, f64, f64) {
        match s {
            Species::Fibroblast => (self.lambda_f, self.p_f, self.w_f, self.d_f),
            Species::Macrophage => (self.lambda_m, self.p_m, self.w_m, self.d_m),
        }
    }
}

/// The four fields at one time level.
#[derive(Clone, Debug)]
pub struct StateFields {
    pub g: FeField<f64>,
    pub f: FeField<f64>,
    pub m: FeField<f64>,
    pub e: FeField<f64>,
    pub t: f64,
}

impl StateFields {
    pub fn new(g: FeField<f64>, f: FeField<f64>, m: FeField<f64>, e: FeField<f64>, t: f64) -> Result<Self> {
        for x in [&f, &m, &e] {
            if !Arc::ptr_eq(g.mesh(), x.mesh()) {
                return Err(Error::InvalidArgument("state fields must share one mesh".into()));
            }
        }
        Ok(Self { g, f, m, e, t })
    }

    /// Spatially constant state.
    pub fn constant(mesh: Arc<Mesh>, values: [f64; 4], t: f64) -> Self {
        Self {
            g: FeField::constant(mesh.clone(), values[0]),
            f: FeField::constant(mesh.clone(), values[1]),
            m: FeField::constant(mesh.clone(), values[2]),
            e: FeField::constant(mesh, values[3]),
            t,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.g.mesh()
    }

    pub fn field(&self, eq: Equation) -> &FeField<f64> {
        match eq {
            Equation::G => &self.g,
            Equation::F => &self.f,
            Equation::M => &self.m,
            Equation::E => &self.e,
        }
    }

    pub fn field_mut(&mut self, eq: Equation) -> &mut FeField<f64> {
        match eq {
            Equation::G => &mut self.g,
            Equation::F => &mut self.f,
            Equation::M => &mut self.m,
            Equation::E => &mut self.e,
        }
    }

    /// `(g, f, m, e)` inside one element.
    #[inline]
    pub fn values_in(&self, element: usize, xi: f64, eta: f64) -> [f64; 4] {
        [
            self.g.value_in(element, xi, eta),
            self.f.value_in(element, xi, eta),
            self.m.value_in(element, xi, eta),
            self.e.value_in(element, xi, eta),
        ]
    }

    /// `(g, f, m, e)` at a physical point.
    pub fn values_at(&self, p: [f64; 2]) -> Result<[f64; 4]> {
        let (k, xi, eta) = self.mesh().locate(p)?;
        Ok(self.values_in(k, xi, eta))
    }

    pub fn min_value(&self) -> f64 {
        Equation::ALL
            .iter()
            .flat_map(|&q| self.field(q).coeffs().iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Wound initial data: `g = 0.1` and tanh profiles for `f, m, e` with
/// amplitudes 0.2, 0.5 and 1.0.
pub fn initial_state(mesh: &Arc<Mesh>, _params: &ModelParams) -> StateFields {
    let prof = |a: f64| FeField::interpolate(mesh.clone(), move |p| wound_profile(a, p[0]));
    StateFields {
        g: FeField::constant(mesh.clone(), 0.1),
        f: prof(0.2),
        m: prof(0.5),
        e: prof(1.0),
        t: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_names() {
        let p = ModelParams::default();
        assert_eq!(p.get("D_g").unwrap(), 0.0035);
        assert_eq!(p.get("S_me").unwrap(), 1.0);
        assert_eq!(p.get("sigma").unwrap(), 0.04);
        assert_eq!(ModelParams::names().len(), p.to_map().len());
        p.validate().unwrap();
    }

    #[test]
    fn set_and_reject() {
        let mut p = ModelParams::default();
        p.set("S_fm", 0.7).unwrap();
        assert_eq!(p.adhesion.s_max[0][1], 0.7);
        assert!(p.set("nope", 1.0).is_err());
        assert!(p.set("D_f", f64::NAN).is_err());
        p.set("dt", -1.0).unwrap();
        assert!(p.validate().is_err());
    }

    #[test]
    fn initial_data() {
        let mesh = Arc::new(Mesh::unit_square(4).unwrap());
        let s = initial_state(&mesh, &ModelParams::default());
        assert!(s.g.coeffs().iter().all(|&v| v == 0.1));
        assert!((s.m.eval([1.0, 0.0]).unwrap() - 0.5).abs() < 1e-10);
        for y in [-1.0, -0.3, 0.5] {
            assert!((s.e.eval([0.0, y]).unwrap() - 0.004945246313269549).abs() < 1e-12);
        }
        assert!(s.min_value() >= 0.0);
    }
}
