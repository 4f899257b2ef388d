//! Primal-dual solver for the TV-regularized Abel problem and the
//! unregularized onion-peeling baseline.
//!
//! The discrete objective is
//!
//! ```text
//! E_mu(u) = h^2 sum |grad_h u| + (mu / 2) h^2 sum (A u - f)^2
//! ```
//!
//! ([`energy`]). The iteration works in grid units: it uses unit-spacing
//! differences `D = h grad_h` and plain sums, i.e. it minimizes
//! `sum |D u| + (lambda / 2) sum (A u - f)^2`, which equals `E_mu / h` for
//! `mu = lambda / h`. In these units `||D||^2 <= 8`, so the usual step-size
//! condition reads `8 tau gamma < 1` independently of the resolution.

use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{invalid, Error, Result};
use crate::grid::{DualField, ProjectionField, RadialField};
use crate::metrics::{norm_l2_vh, tv_seminorm};
use crate::operators::{apply_abel, divergence_into, gradient_into, AbelMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Data-fit weight in grid units.
    pub lambda: f64,
    /// Primal step.
    pub tau: f64,
    /// Dual step.
    pub gamma: f64,
    pub max_iter: usize,
    /// Energy logging stride.
    pub record_every: usize,
}

impl SolverParams {
    pub fn new(lambda: f64, tau: f64, gamma: f64, max_iter: usize) -> Self {
        Self {
            lambda,
            tau,
            gamma,
            max_iter,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("tau", self.tau),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.max_iter == 0 || self.record_every == 0 {
            return invalid("max_iter and record_every must be at least 1");
        }
        Ok(())
    }

    /// Weight `mu` such that the iteration minimizes [`energy`] with `mu`.
    pub fn energy_weight(&self, h: f64) -> f64 {
        self.lambda / h
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u_star: RadialField,
    /// `(iteration, energy)` pairs, starting with the initial iterate.
    pub energy_trace: Vec<(usize, f64)>,
    pub final_energy: f64,
    pub iterations_run: usize,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn energy_trace_csv(&self) -> String {
        let mut s = String::from("iteration,energy\n");
        for (n, e) in &self.energy_trace {
            s.push_str(&format!("{n},{e}\n"));
        }
        s
    }
}

/// `h^2 sum |grad_h u| + (mu / 2) ||A u - f||^2_{l2(V_h)}`.
pub fn energy(u: &RadialField, a: &AbelMatrix, f: &ProjectionField, mu: f64) -> Result<f64> {
    if u.grid() != f.grid() {
        return invalid("density and data live on different grids");
    }
    let h = u.grid().h();
    let resid = apply_abel(a, u)?.into_values() - f.values();
    let fit = norm_l2_vh(&resid, h);
    Ok(tv_seminorm(u.values(), h) + 0.5 * mu * fit * fit)
}

/// State of the primal-dual iteration. [`solve_tv`] drives it to completion;
/// stepping it by hand exposes the intermediate iterates.
pub struct PrimalDual<'a> {
    a: &'a AbelMatrix,
    params: SolverParams,
    factor: Cholesky<f64, Dyn>,
    data_term: DMatrix<f64>,
    u: DMatrix<f64>,
    w: DMatrix<f64>,
    v: DualField,
    p: DualField,
    q: DMatrix<f64>,
    div: DMatrix<f64>,
    iteration: usize,
}

impl<'a> PrimalDual<'a> {
    pub fn new(
        a: &'a AbelMatrix,
        f: &ProjectionField,
        params: SolverParams,
        u_init: Option<&RadialField>,
    ) -> Result<Self> {
        params.validate()?;
        let grid = *f.grid();
        if a.n() != grid.n_r() {
            return invalid(format!(
                "abel matrix is {0}x{0} but data has {1} radial entries",
                a.n(),
                grid.n_r()
            ));
        }
        let u = match u_init {
            Some(u0) if u0.grid() != f.grid() => {
                return invalid("initial density and data live on different grids")
            }
            Some(u0) => u0.values().clone(),
            None => DMatrix::zeros(grid.n_r(), grid.n_z()),
        };
        let step = params.tau * params.lambda;
        let at = a.entries();
        let system = DMatrix::identity(a.n(), a.n()) + at.tr_mul(at) * step;
        let factor = Cholesky::new(system).ok_or_else(|| {
            Error::InvalidArgument("primal system is not positive definite".into())
        })?;
        let data_term = at.tr_mul(f.values()) * step;
        let shape = grid.shape();
        Ok(Self {
            a,
            params,
            factor,
            data_term,
            w: u.clone(),
            u,
            v: DualField::zeros(shape),
            p: DualField::zeros(shape),
            q: DMatrix::zeros(shape.0, shape.1),
            div: DMatrix::zeros(shape.0, shape.1),
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn primal(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn dual(&self) -> &DualField {
        &self.v
    }

    /// The point `q^n` fed to the last primal update.
    pub fn last_prox_input(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `tau lambda A^T f`.
    pub fn data_term(&self) -> &DMatrix<f64> {
        &self.data_term
    }

    pub fn step(&mut self) -> Result<()> {
        let SolverParams { tau, gamma, .. } = self.params;

        // dual ascent and projection onto the unit ball
        gradient_into(&self.w, 1.0, &mut self.p);
        self.p.radial *= gamma;
        self.p.axial *= gamma;
        self.p.radial += &self.v.radial;
        self.p.axial += &self.v.axial;
        self.p.project_unit_ball();
        std::mem::swap(&mut self.v, &mut self.p);

        // primal descent: (I + tau lambda A^T A) u = q + tau lambda A^T f
        divergence_into(&self.v, 1.0, &mut self.div);
        self.q.copy_from(&self.div);
        self.q *= tau;
        self.q += &self.u;
        let mut next = &self.q + &self.data_term;
        self.factor.solve_mut(&mut next);

        // over-relaxation w = 2 u^{n+1} - u^n
        self.w.copy_from(&next);
        self.w *= 2.0;
        self.w -= &self.u;
        self.u = next;

        self.iteration += 1;
        if self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged {
                iteration: self.iteration,
            });
        }
        Ok(())
    }

    pub fn current(&self, like: &ProjectionField) -> Result<RadialField> {
        RadialField::from_values(*like.grid(), self.u.clone())
    }

    fn abel(&self) -> &AbelMatrix {
        self.a
    }
}

/// Runs exactly `max_iter` primal-dual iterations from `u_init` (zero when
/// absent) with zero dual initialization.
pub fn solve_tv(
    a: &AbelMatrix,
    f: &ProjectionField,
    params: &SolverParams,
    u_init: Option<&RadialField>,
) -> Result<SolveResult> {
    let start = Instant::now();
    let mut state = PrimalDual::new(a, f, *params, u_init)?;
    let mu = params.energy_weight(f.grid().h());
    let mut trace = vec![(0, energy(&state.current(f)?, state.abel(), f, mu)?)];
    while state.iteration() < params.max_iter {
        state.step()?;
        let n = state.iteration();
        if n % params.record_every == 0 || n == params.max_iter {
            trace.push((n, energy(&state.current(f)?, a, f, mu)?));
        }
    }
    let u_star = state.current(f)?;
    let final_energy = trace.last().map(|t| t.1).unwrap_or_default();
    Ok(SolveResult {
        u_star,
        energy_trace: trace,
        final_energy,
        iterations_run: state.iteration(),
        wall_time: start.elapsed(),
    })
}

/// Unregularized inversion: back-substitution of `A u = f` per axial column.
pub fn solve_onion_peeling(a: &AbelMatrix, f: &ProjectionField) -> Result<RadialField> {
    if a.n() != f.grid().n_r() {
        return invalid(format!(
            "abel matrix is {0}x{0} but data has {1} radial entries",
            a.n(),
            f.grid().n_r()
        ));
    }
    let u = a
        .entries()
        .solve_upper_triangular(f.values())
        .ok_or_else(|| Error::InvalidArgument("abel matrix is singular".into()))?;
    RadialField::from_values(*f.grid(), u)
}
