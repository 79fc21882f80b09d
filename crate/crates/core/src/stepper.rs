//! Split backward-Euler time stepping of the four-field system.
//!
//! Each equation is implicit in its own unknown with every other field frozen
//! at time level `N`, so the four solves of one step are independent.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::Assembler;
use crate::error::{Error, Result};
use crate::linalg::{SolveStats, SolverOptions};
use crate::model::{Equation, ModelParams, Species, StateFields};
use crate::nonlocal::{adhesion_full, reduction_prefactor, NonlocalOptions};
use crate::{FeField, Mesh, SparseMatrix};

/// Treatment of the adhesion flux in the cell equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeVariant {
    /// Flux evaluated with `f^N`, moved to the right-hand side; symmetric systems.
    #[default]
    Amended,
    /// Flux acting on the unknown `f^{N+1}`; non-symmetric systems.
    Original,
}

/// How the adhesion velocity is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlocalMode {
    /// Moment reduction: a gradient combination of `f, m, e`.
    #[default]
    Taylor,
    /// Direct quadrature of the sensing integral.
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct StepperOptions {
    pub variant: SchemeVariant,
    pub nonlocal_mode: NonlocalMode,
    pub nonlocal: NonlocalOptions,
    pub solver: SolverOptions<f64>,
    /// Run the four solves of a step on separate threads.
    pub parallel: bool,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            variant: SchemeVariant::Amended,
            nonlocal_mode: NonlocalMode::Taylor,
            nonlocal: NonlocalOptions::default(),
            solver: SolverOptions::default(),
            parallel: true,
        }
    }
}

/// `A c = F` for one equation.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// Solver statistics in `g, f, m, e` order.
    pub stats: [SolveStats; 4],
}

/// Holds the mesh-dependent matrices `M`, `K` and builds the per-equation systems.
#[derive(Clone, Debug)]
pub struct Stepper {
    asm: Assembler<f64>,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    params: ModelParams,
    opts: StepperOptions,
}

impl Stepper {
    pub fn new(mesh: Arc<Mesh>, params: ModelParams, opts: StepperOptions) -> Result<Self> {
        params.validate()?;
        let asm = Assembler::new(mesh);
        let mass = asm.mass();
        let stiffness = asm.stiffness();
        Ok(Self {
            asm,
            mass,
            stiffness,
            params,
            opts,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.asm.mesh()
    }

    pub fn assembler(&self) -> &Assembler<f64> {
        &self.asm
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> &StepperOptions {
        &self.opts
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    fn combo(&self, fields: &[&[f64]], coef: &[f64]) -> FeField<f64> {
        let l = self.mesh().node_count();
        let mut c = vec![0.0; l];
        for (v, &a) in fields.iter().zip(coef) {
            for i in 0..l {
                c[i] += a * v[i];
            }
        }
        FeField::new(self.mesh().clone(), c).expect("finite combination of finite fields")
    }

    fn check_state(&self, s: &StateFields) -> Result<()> {
        if !Arc::ptr_eq(s.mesh(), self.mesh()) && s.mesh().node_count() != self.mesh().node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.mesh().node_count(),
                got: s.mesh().node_count(),
            });
        }
        Ok(())
    }

    /// `A_g = (1/dt + lambda_g) M + D_g K`, `F_g = M (g/dt + p_g^f f + p_g^m m)`.
    pub fn build_system_g(&self, s: &StateFields) -> Result<LinearSystem> {
        self.check_state(s)?;
        let p = &self.params;
        let inv_dt = 1.0 / p.dt;
        let matrix = SparseMatrix::linear_combination(&[(inv_dt + p.lambda_g, &self.mass), (p.d_g, &self.stiffness)])?;
        let v = self.combo(&[s.g.coeffs(), s.f.coeffs(), s.m.coeffs()], &[inv_dt, p.p_g_f, p.p_g_m]);
        Ok(LinearSystem {
            matrix,
            rhs: self.mass.mul_vec(v.coeffs()),
        })
    }

    /// `A_e = (1/dt + alpha_e) M + (alpha_f + 2 p_e w_e) T(f) + alpha_m T(m)`,
    /// `F_e = M (e/dt + e_c + p_e f) - p_e T(w_g g + w_f f + w_m m) f`.
    pub fn build_system_e(&self, s: &StateFields) -> Result<LinearSystem> {
        self.check_state(s)?;
        let p = &self.params;
        let inv_dt = 1.0 / p.dt;
        let tf = self.asm.weighted_mass(&s.f)?;
        let tm = self.asm.weighted_mass(&s.m)?;
        let matrix = SparseMatrix::linear_combination(&[
            (inv_dt + p.alpha_e, &self.mass),
            (p.alpha_f + 2.0 * p.p_e * p.w_e, &tf),
            (p.alpha_m, &tm),
        ])?;
        let l = self.mesh().node_count();
        let ones = vec![1.0; l];
        let v = self.combo(&[s.e.coeffs(), &ones, s.f.coeffs()], &[inv_dt, p.e_c, p.p_e]);
        let mut rhs = self.mass.mul_vec(v.coeffs());
        let crowd = self.combo(&[s.g.coeffs(), s.f.coeffs(), s.m.coeffs()], &[p.w_g, p.w_f, p.w_m]);
        let tc = self.asm.weighted_mass(&crowd)?.mul_vec(s.f.coeffs());
        for i in 0..l {
            rhs[i] -= p.p_e * tc[i];
        }
        Ok(LinearSystem { matrix, rhs })
    }

    /// Transport operator `B` with `(B c)_o = int c A . grad psi_o` for the
    /// adhesion velocity `A` of `species` at time `N`.
    pub fn flux_matrix(&self, s: &StateFields, species: Species) -> Result<SparseMatrix> {
        let p = &self.params;
        match self.opts.nonlocal_mode {
            NonlocalMode::Taylor => {
                let pref = reduction_prefactor(&p.adhesion, self.opts.nonlocal.prefactor_convention);
                let sm = &p.adhesion.s_max[species.row()];
                let w = self.combo(&[s.f.coeffs(), s.m.coeffs(), s.e.coeffs()], &[pref * sm[0], pref * sm[1], pref * sm[2]]);
                Ok(self.asm.convective(&w)?.transpose())
            }
            NonlocalMode::Full => {
                let v = adhesion_full(&self.asm, s, p, species, &self.opts.nonlocal)?;
                self.asm.flux_operator(&v)
            }
        }
    }

    fn build_cell(&self, s: &StateFields, species: Species, variant: SchemeVariant) -> Result<LinearSystem> {
        self.check_state(s)?;
        let p = &self.params;
        let inv_dt = 1.0 / p.dt;
        let (lambda, prolif, w_self, diff) = p.cell_rates(species);
        let mu = p.adhesion.mu(species);
        let (own, others, w_others) = match species {
            Species::Fibroblast => (&s.f, [&s.g, &s.m, &s.e], [p.w_g, p.w_m, p.w_e]),
            Species::Macrophage => (&s.m, [&s.g, &s.f, &s.e], [p.w_g, p.w_f, p.w_e]),
        };
        let tg = self.asm.weighted_mass(&s.g)?;
        let mut matrix = SparseMatrix::linear_combination(&[
            (inv_dt + lambda, &self.mass),
            (2.0 * prolif * w_self, &tg),
            (diff, &self.stiffness),
        ])?;
        let l = self.mesh().node_count();
        let v = self.combo(&[own.coeffs(), s.g.coeffs()], &[inv_dt, prolif]);
        let mut rhs = self.mass.mul_vec(v.coeffs());
        let crowd = self.combo(
            &[others[0].coeffs(), others[1].coeffs(), others[2].coeffs()],
            &w_others,
        );
        let tc = self.asm.weighted_mass(&crowd)?.mul_vec(s.g.coeffs());
        for i in 0..l {
            rhs[i] -= prolif * tc[i];
        }
        if mu != 0.0 {
            let b = self.flux_matrix(s, species)?;
            match variant {
                SchemeVariant::Amended => {
                    let bf = b.mul_vec(own.coeffs());
                    for i in 0..l {
                        rhs[i] += mu * bf[i];
                    }
                }
                SchemeVariant::Original => {
                    matrix.axpy(-mu, &b)?;
                }
            }
        }
        Ok(LinearSystem { matrix, rhs })
    }

    /// Fibroblast system. Amended:
    /// `A_f = (1/dt + lambda_f) M + 2 p_f w_f T(g) + D_f K`,
    /// `F_f = M (f/dt + p_f g) - p_f T(w_g g + w_m m + w_e e) g + mu_f B f^N`.
    /// Original moves `-mu_f B` to the left-hand side.
    pub fn build_system_f(&self, s: &StateFields, variant: SchemeVariant) -> Result<LinearSystem> {
        self.build_cell(s, Species::Fibroblast, variant)
    }

    /// Macrophage system, the mirror of [`Stepper::build_system_f`].
    pub fn build_system_m(&self, s: &StateFields, variant: SchemeVariant) -> Result<LinearSystem> {
        self.build_cell(s, Species::Macrophage, variant)
    }

    pub fn build_system(&self, s: &StateFields, eq: Equation) -> Result<LinearSystem> {
        let variant = self.opts.variant;
        match eq {
            Equation::G => self.build_system_g(s),
            Equation::F => self.build_system_f(s, variant),
            Equation::M => self.build_system_m(s, variant),
            Equation::E => self.build_system_e(s),
        }
    }

    /// Builds and solves one equation, warm-started from its time-`N` field.
    pub fn solve_equation(&self, s: &StateFields, eq: Equation) -> Result<(Vec<f64>, SolveStats)> {
        let wrap = |e: Error| Error::Equation {
            equation: eq,
            source: Box::new(e),
        };
        let sys = self.build_system(s, eq).map_err(wrap)?;
        let guess = s.field(eq).coeffs();
        crate::linalg::solve::solve_with_guess(&sys.matrix, &sys.rhs, Some(guess), &self.opts.solver).map_err(wrap)
    }

    /// One split backward-Euler step.
    pub fn advance(&self, s: &StateFields) -> Result<(StateFields, StepReport)> {
        self.advance_in_order(s, Equation::ALL)
    }

    /// As [`Stepper::advance`], solving the equations in `order`. The result
    /// does not depend on the order.
    pub fn advance_in_order(&self, s: &StateFields, order: [Equation; 4]) -> Result<(StateFields, StepReport)> {
        let results: Vec<Result<(Vec<f64>, SolveStats)>> = if self.opts.parallel {
            use rayon::prelude::*;
            order.par_iter().map(|&eq| self.solve_equation(s, eq)).collect()
        } else {
            order.iter().map(|&eq| self.solve_equation(s, eq)).collect()
        };
        let mut next = s.clone();
        let mut stats = [SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        }; 4];
        for (&eq, r) in order.iter().zip(results) {
            let (c, st) = r?;
            *next.field_mut(eq) = FeField::new(self.mesh().clone(), c).map_err(|e| Error::Equation {
                equation: eq,
                source: Box::new(e),
            })?;
            stats[eq as usize] = st;
        }
        next.t = s.t + self.params.dt;
        Ok((next, StepReport { stats }))
    }

    /// `sqrt(<M (a - b), a - b>)`.
    pub fn l2_difference(&self, a: &FeField<f64>, b: &FeField<f64>) -> f64 {
        l2_field_difference(&self.mass, a, b)
    }
}

/// `sqrt(<M (a - b), a - b>)` for a given mass matrix.
pub fn l2_field_difference(mass: &SparseMatrix, a: &FeField<f64>, b: &FeField<f64>) -> f64 {
    let d: Vec<f64> = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x - y).collect();
    mass.quadratic_form(&d).max(0.0).sqrt()
}

/// Linearized backward-Euler update of the spatially constant system.
///
/// Mirrors the assembled systems with every field constant in space.
pub fn homogeneous_step(p: &ModelParams, u: [f64; 4]) -> [f64; 4] {
    let [g, f, m, e] = u;
    let inv = 1.0 / p.dt;
    let g1 = (g * inv + p.p_g_f * f + p.p_g_m * m) / (inv + p.lambda_g);
    let f1 = (f * inv + p.p_f * g * (1.0 - p.w_g * g - p.w_m * m - p.w_e * e)) / (inv + p.lambda_f + 2.0 * p.p_f * p.w_f * g);
    let m1 = (m * inv + p.p_m * g * (1.0 - p.w_g * g - p.w_f * f - p.w_e * e)) / (inv + p.lambda_m + 2.0 * p.p_m * p.w_m * g);
    let e1 = (e * inv + p.e_c + p.p_e * f * (1.0 - p.w_g * g - p.w_f * f - p.w_m * m))
        / (inv + p.alpha_e + (p.alpha_f + 2.0 * p.p_e * p.w_e) * f + p.alpha_m * m);
    [g1, f1, m1, e1]
}
