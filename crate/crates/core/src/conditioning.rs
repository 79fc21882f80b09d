//! Empirical condition numbers, calibrated Rayleigh constants and the
//! per-equation bounds.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::Assembler;
use crate::error::{Error, Result};
use crate::linalg::{extreme_eigenvalues, generalized_lambda_max, EigenOptions};
use crate::model::{Equation, ModelParams};
use crate::{FeField, Mesh, SparseMatrix};

/// Outward safety margin applied to every calibrated constant.
pub const ZETA_MARGIN: f64 = 1.05;
/// Random coefficient vectors per mesh for the inverse inequality.
pub const INVERSE_SAMPLES: usize = 200;
/// Random positive weights per mesh for the weighted-mass constants.
pub const WEIGHT_SAMPLES: usize = 8;
/// Bounds within this ratio of each other count as balanced.
pub const BALANCED_RATIO: f64 = 1.2;
/// `dt / h^2` below this is "dt << h^2".
pub const REGIME_SMALL: f64 = 0.1;
/// `dt / h^2` above this is "dt >> h^2".
pub const REGIME_LARGE: f64 = 10.0;

/// Raw per-mesh ratios behind [`ZetaConstants`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaSample {
    pub n: usize,
    pub h: f64,
    pub mass_min: f64,
    pub mass_max: f64,
    /// Largest `<Kc,c> h^2 / <Mc,c>` over the random samples.
    pub inverse: f64,
    /// `lambda_max(K, M) h^2`, the supremum of the same quotient.
    pub inverse_sup: f64,
    pub weighted_min: f64,
    pub weighted_max: f64,
    /// `lambda_max(K)`, needed to check the corrected stiffness term.
    pub stiffness_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaConstants {
    pub zeta1_m: f64,
    pub zeta2_m: f64,
    pub zeta2_inv: f64,
    pub zeta1_t: f64,
    pub zeta2_t: f64,
    pub element_signature: String,
    pub samples: Vec<ZetaSample>,
}

impl ZetaConstants {
    /// Key-value text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("element_signature = {}\n", self.element_signature));
        for (k, v) in [
            ("zeta1_M", self.zeta1_m),
            ("zeta2_M", self.zeta2_m),
            ("zeta2_inv", self.zeta2_inv),
            ("zeta1_T", self.zeta1_t),
            ("zeta2_T", self.zeta2_t),
        ] {
            s.push_str(&format!("{k} = {v:.16e}\n"));
        }
        s
    }
}

fn signature(ns: &[usize]) -> String {
    let list: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
    format!("P2-tri-uniform-diag-ll-ur/n={}", list.join(","))
}

/// Calibrates the Rayleigh-quotient constants on the square `[-1,1]^2` for
/// each mesh size in `ns`.
pub fn calibrate_zeta(ns: &[usize], seed: u64, eig: &EigenOptions) -> Result<ZetaConstants> {
    if ns.len() < 2 {
        return Err(Error::InvalidArgument("calibration needs at least two mesh sizes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(ns.len());
    for &n in ns {
        let mesh = Arc::new(Mesh::unit_square(n)?);
        let asm = Assembler::new(mesh.clone());
        let m = asm.mass();
        let k = asm.stiffness();
        let h = mesh.h();
        let h2 = h * h;
        let em = extreme_eigenvalues(&m, eig)?;
        let l = mesh.node_count();
        let inverse_sup = generalized_lambda_max(&k, &m, eig)? * h2;
        let mut inverse = 0.0f64;
        for _ in 0..INVERSE_SAMPLES {
            let c: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
            inverse = inverse.max(k.quadratic_form(&c) * h2 / m.quadratic_form(&c));
        }
        let stiffness_max = crate::linalg::lanczos_extremes(l, |x, y| k.mul_vec_into(x, y), eig, false)?.max;
        let (mut tmin, mut tmax) = (f64::INFINITY, 0.0f64);
        for _ in 0..WEIGHT_SAMPLES {
            let mut w: Vec<f64> = (0..l).map(|_| rng.gen_range(0.5..1.5)).collect();
            let norm = crate::sparse::norm2(&w);
            w.iter_mut().for_each(|x| *x /= norm);
            let t = asm.weighted_mass(&FeField::new(mesh.clone(), w)?)?;
            let et = extreme_eigenvalues(&t, eig)?;
            tmin = tmin.min(et.min / h2);
            tmax = tmax.max(et.max / h2);
        }
        samples.push(ZetaSample {
            n,
            h,
            mass_min: em.min / h2,
            mass_max: em.max / h2,
            inverse,
            inverse_sup,
            weighted_min: tmin,
            weighted_max: tmax,
            stiffness_max,
        });
    }
    let fold_min = |f: fn(&ZetaSample) -> f64| samples.iter().map(f).fold(f64::INFINITY, f64::min);
    let fold_max = |f: fn(&ZetaSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    Ok(ZetaConstants {
        zeta1_m: fold_min(|s| s.mass_min) / ZETA_MARGIN,
        zeta2_m: fold_max(|s| s.mass_max) * ZETA_MARGIN,
        zeta2_inv: fold_max(|s| s.inverse) * ZETA_MARGIN,
        zeta1_t: fold_min(|s| s.weighted_min) / ZETA_MARGIN,
        zeta2_t: fold_max(|s| s.weighted_max) * ZETA_MARGIN,
        element_signature: signature(ns),
        samples,
    })
}

/// The two bound channels of one equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPair {
    /// Ratio of the Rayleigh upper and lower estimates.
    pub corrected: f64,
    /// The printed formula evaluated as written.
    pub paper_literal: f64,
}

/// Bound for `A_g = (1/dt + lambda_g) M + D_g K`.
pub fn bound_g(p: &ModelParams, h: f64, dt: f64, z: &ZetaConstants) -> BoundPair {
    let a = 1.0 / dt + p.lambda_g;
    let h2 = h * h;
    BoundPair {
        corrected: (a * z.zeta2_m * h2 + p.d_g * z.zeta2_inv) / (a * z.zeta1_m * h2),
        paper_literal: 1.0 + p.d_g * z.zeta2_m / (a * z.zeta2_m) / h2,
    }
}

fn bound_cell(a: f64, pw2: f64, d: f64, h: f64, g_norm_sq: f64, z: &ZetaConstants) -> BoundPair {
    let h2 = h * h;
    let num = a * z.zeta2_m * h2 + pw2 * z.zeta2_t * h2 * g_norm_sq + d * z.zeta2_inv;
    let den = a * z.zeta1_m * h2 + pw2 * z.zeta1_t * h2 * g_norm_sq;
    BoundPair {
        corrected: num / den,
        paper_literal: 1.0 + d * z.zeta2_m / (a * z.zeta1_m + pw2 * z.zeta2_t * g_norm_sq) / h2,
    }
}

/// Bound for the amended `A_f`; `g_norm_sq` is `||c^{g,N}||_2^2`.
pub fn bound_f(p: &ModelParams, h: f64, dt: f64, g_norm_sq: f64, z: &ZetaConstants) -> BoundPair {
    bound_cell(1.0 / dt + p.lambda_f, 2.0 * p.p_f * p.w_f, p.d_f, h, g_norm_sq, z)
}

/// Bound for the amended `A_m`.
pub fn bound_m(p: &ModelParams, h: f64, dt: f64, g_norm_sq: f64, z: &ZetaConstants) -> BoundPair {
    bound_cell(1.0 / dt + p.lambda_m, 2.0 * p.p_m * p.w_m, p.d_m, h, g_norm_sq, z)
}

/// Bound for `A_e`; independent of `h`. The printed ratio has identical
/// numerator and denominator and is therefore 1.
pub fn bound_e(p: &ModelParams, dt: f64, f_norm_sq: f64, m_norm_sq: f64, z: &ZetaConstants) -> BoundPair {
    let a = 1.0 / dt + p.alpha_e;
    let t = (p.alpha_f + 2.0 * p.p_e * p.w_e) * f_norm_sq + p.alpha_m * m_norm_sq;
    BoundPair {
        corrected: (a * z.zeta2_m + t * z.zeta2_t) / (a * z.zeta1_m + t * z.zeta1_t),
        paper_literal: 1.0,
    }
}

/// Squared nodal norms of the fields entering the bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormsSq {
    pub g: f64,
    pub f: f64,
    pub m: f64,
}

impl NormsSq {
    pub fn of(state: &crate::model::StateFields) -> Self {
        Self {
            g: state.g.nodal_norm_sq(),
            f: state.f.nodal_norm_sq(),
            m: state.m.nodal_norm_sq(),
        }
    }
}

/// Corrected and literal bounds of all four equations, in `g, f, m, e` order.
pub fn all_bounds(p: &ModelParams, h: f64, dt: f64, norms: NormsSq, z: &ZetaConstants) -> [BoundPair; 4] {
    [
        bound_g(p, h, dt, z),
        bound_f(p, h, dt, norms.g, z),
        bound_m(p, h, dt, norms.g, z),
        bound_e(p, dt, norms.f, norms.m, z),
    ]
}

/// Index of the largest entry; ties go to the earliest (`g, f, m, e`).
pub fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportLabel {
    Equation(Equation),
    System,
}

impl fmt::Display for ReportLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportLabel::Equation(e) => write!(f, "{e}"),
            ReportLabel::System => f.write_str("system"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    pub label: ReportLabel,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub k_empirical: f64,
    pub bound_corrected: f64,
    pub bound_paper_literal: f64,
    pub h: f64,
    pub dt: f64,
    pub step: usize,
    /// Arg-max equation of the empirical condition numbers.
    pub dominant: Equation,
}

/// `(lambda_min, lambda_max)` of a symmetric positive definite matrix.
pub fn extreme_pair(a: &SparseMatrix, eig: &EigenOptions) -> Result<(f64, f64)> {
    let e = extreme_eigenvalues(a, eig)?;
    Ok((e.min, e.max))
}

/// `lambda_max / lambda_min`.
pub fn empirical_condition(a: &SparseMatrix, eig: &EigenOptions) -> Result<f64> {
    let (lo, hi) = extreme_pair(a, eig)?;
    Ok(hi / lo)
}

/// Report of one equation's matrix.
#[allow(clippy::too_many_arguments)]
pub fn equation_report(
    eq: Equation,
    a: &SparseMatrix,
    bounds: BoundPair,
    h: f64,
    dt: f64,
    step: usize,
    eig: &EigenOptions,
) -> Result<ConditionReport> {
    let (lo, hi) = extreme_pair(a, eig)?;
    Ok(ConditionReport {
        label: ReportLabel::Equation(eq),
        lambda_min: lo,
        lambda_max: hi,
        k_empirical: hi / lo,
        bound_corrected: bounds.corrected,
        bound_paper_literal: bounds.paper_literal,
        h,
        dt,
        step,
        dominant: eq,
    })
}

/// Max rule over the four equations.
pub fn system_condition(reports: &[ConditionReport; 4]) -> ConditionReport {
    let ks: Vec<f64> = reports.iter().map(|r| r.k_empirical).collect();
    let i = argmax_first(&ks);
    let fold = |f: fn(&ConditionReport) -> f64| reports.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    ConditionReport {
        label: ReportLabel::System,
        lambda_min: reports[i].lambda_min,
        lambda_max: reports[i].lambda_max,
        k_empirical: ks[i],
        bound_corrected: fold(|r| r.bound_corrected),
        bound_paper_literal: fold(|r| r.bound_paper_literal),
        h: reports[0].h,
        dt: reports[0].dt,
        step: reports[0].step,
        dominant: Equation::ALL[i],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimestepRegime {
    MuchSmaller,
    Comparable,
    MuchLarger,
}

impl TimestepRegime {
    pub fn of(dt: f64, h: f64) -> Self {
        let r = dt / (h * h);
        if r < REGIME_SMALL {
            TimestepRegime::MuchSmaller
        } else if r > REGIME_LARGE {
            TimestepRegime::MuchLarger
        } else {
            TimestepRegime::Comparable
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TimestepRegime::MuchSmaller => "dt<<h^2",
            TimestepRegime::Comparable => "dt~h^2",
            TimestepRegime::MuchLarger => "dt>>h^2",
        }
    }
}

impl fmt::Display for TimestepRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Parameter-regime case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeCase {
    /// Growth-factor diffusion dominates.
    A,
    /// Fibroblast equation dominates.
    B,
    /// Macrophage equation dominates.
    C,
    /// The h-independent ECM bound dominates.
    D,
    /// No equation dominates and growth-factor damping is strong.
    E,
    /// ECM dominates with fast decay and a large time step.
    F,
}

impl fmt::Display for RegimeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub case: RegimeCase,
    pub regime: TimestepRegime,
    pub dominant: Equation,
    pub bounds: [BoundPair; 4],
}

/// Classifies by the corrected bounds. Total: every input yields a label.
pub fn classify_regime(p: &ModelParams, h: f64, dt: f64, norms: NormsSq, z: &ZetaConstants) -> Classification {
    let bounds = all_bounds(p, h, dt, norms, z);
    let c: Vec<f64> = bounds.iter().map(|b| b.corrected).collect();
    let i = argmax_first(&c);
    let dominant = Equation::ALL[i];
    let regime = TimestepRegime::of(dt, h);
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let balanced = c[i] <= BALANCED_RATIO * lo;
    // Damping term against mass term in the fibroblast denominator.
    let damped = 2.0 * p.p_f * p.w_f * z.zeta1_t * norms.g >= (1.0 / dt + p.lambda_f) * z.zeta1_m;
    let defaults = ModelParams::default();
    let fast_decay = p.lambda_g > 2.0 * defaults.lambda_g
        && p.lambda_f > 2.0 * defaults.lambda_f
        && p.lambda_m > 2.0 * defaults.lambda_m
        && p.alpha_e > 2.0 * defaults.alpha_e;
    let case = if balanced && damped {
        RegimeCase::E
    } else {
        match dominant {
            Equation::G => RegimeCase::A,
            Equation::F => RegimeCase::B,
            Equation::M => RegimeCase::C,
            Equation::E if fast_decay && regime == TimestepRegime::MuchLarger => RegimeCase::F,
            Equation::E => RegimeCase::D,
        }
    };
    Classification {
        case,
        regime,
        dominant,
        bounds,
    }
}
