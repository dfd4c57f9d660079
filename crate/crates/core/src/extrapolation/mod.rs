//! Iterative sparse model generation over the projection area.
//!
//! All three engines approximate a signal `f` by `g = Σ ĉ_k φ_k` while
//! minimizing the weighted error `E = Σ w·(f − g)²`:
//!
//! * **FSA** adds the single function with the largest energy decrement per
//!   iteration, scaled by the orthogonality-deficiency factor `gamma`.
//! * **RBA** adds several functions per iteration and re-projects `f` onto
//!   everything selected so far.
//! * **MSA** adds several functions per iteration, projects only the current
//!   residual onto the span of the newly selected ones, and scales that update
//!   by `gamma`. Functions selected earlier are left untouched.

mod select;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::WeightedBasis;
use crate::error::{Error, Result};

pub use select::{argmax, decrement_energies, project_residual, select_candidates, Projection};
pub use solve::{
    cholesky_solve, pivoted_solve, solve_normal_equations, SolveMethod, SubspaceSolution,
    SINGULAR_PIVOT_RATIO,
};

/// Engines stop once the best decrement drops below this fraction of `E⁽⁰⁾`.
pub const CONVERGENCE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fsa,
    Rba,
    Msa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Fsa, Algorithm::Rba, Algorithm::Msa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fsa => "fsa",
            Algorithm::Rba => "rba",
            Algorithm::Msa => "msa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsa" => Ok(Algorithm::Fsa),
            "rba" => Ok(Algorithm::Rba),
            "msa" => Ok(Algorithm::Msa),
            other => Err(Error::param("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtrapolationParams {
    pub algorithm: Algorithm,
    /// Maximum number of iterations.
    pub iterations: usize,
    /// Energy fraction threshold for joint selection.
    pub tau: f64,
    /// Maximum number of functions selected per iteration.
    pub n_bf: usize,
    /// Orthogonality-deficiency compensation factor. Unused by RBA.
    pub gamma: f64,
}

impl ExtrapolationParams {
    pub fn fsa() -> Self {
        Self {
            algorithm: Algorithm::Fsa,
            iterations: 200,
            tau: 0.75,
            n_bf: 1,
            gamma: 0.5,
        }
    }

    pub fn rba() -> Self {
        Self {
            algorithm: Algorithm::Rba,
            iterations: 4,
            tau: 0.75,
            n_bf: 20,
            gamma: 1.0,
        }
    }

    pub fn msa() -> Self {
        Self {
            algorithm: Algorithm::Msa,
            iterations: 12,
            tau: 0.75,
            n_bf: 20,
            gamma: 0.5,
        }
    }

    pub fn defaults(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Fsa => Self::fsa(),
            Algorithm::Rba => Self::rba(),
            Algorithm::Msa => Self::msa(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::param("tau", format!("must lie in (0, 1], got {}", self.tau)));
        }
        if self.n_bf == 0 {
            return Err(Error::param("n_bf", "must be at least 1"));
        }
        if self.algorithm != Algorithm::Rba && !(self.gamma > 0.0 && self.gamma < 2.0) {
            return Err(Error::param(
                "gamma",
                format!("must lie in (0, 2), got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

/// Coefficient map plus its rendering over the projection area.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseModel {
    coefficients: BTreeMap<usize, f64>,
    rendering: Vec<f64>,
}

impl SparseModel {
    pub fn empty(samples: usize) -> Self {
        Self {
            coefficients: BTreeMap::new(),
            rendering: vec![0.0; samples],
        }
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, f64> {
        &self.coefficients
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.coefficients.get(&k).copied().unwrap_or(0.0)
    }

    pub fn rendering(&self) -> &[f64] {
        &self.rendering
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// One iteration's coefficient changes and the resulting weighted error.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// `(k, Δĉ_k)` for MSA/FSA; `(k, ĉ_k)` after the re-projection for RBA.
    pub updates: Vec<(usize, f64)>,
    pub energy: f64,
    pub dropped: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Updated,
    Converged,
}

/// Running state of one engine invocation.
#[derive(Debug, Clone)]
pub struct EngineState {
    signal: Vec<f64>,
    model: SparseModel,
    residual: Vec<f64>,
    /// RBA's cumulative support, in selection order.
    support: Vec<usize>,
    /// `Σ φ_k·f·w`, needed by RBA only.
    signal_inner: Option<Vec<f64>>,
    initial_energy: f64,
    energy: f64,
    converged: bool,
    trace: Vec<StepRecord>,
}

impl EngineState {
    pub fn new(ctx: &WeightedBasis, signal: &[f64]) -> Result<Self> {
        let samples = ctx.basis().samples();
        if signal.len() != samples {
            return Err(Error::DimensionMismatch {
                left: (ctx.basis().width(), ctx.basis().height()),
                right: (signal.len(), 1),
            });
        }
        let energy = ctx.energy(signal);
        Ok(Self {
            signal: signal.to_vec(),
            model: SparseModel::empty(samples),
            residual: signal.to_vec(),
            support: Vec::new(),
            signal_inner: None,
            initial_energy: energy,
            energy,
            converged: false,
            trace: Vec::new(),
        })
    }

    pub fn model(&self) -> &SparseModel {
        &self.model
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    /// Weighted error of the current model.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn into_model(self) -> SparseModel {
        self.model
    }

    fn add(&mut self, ctx: &WeightedBasis, k: usize, delta: f64) {
        *self.model.coefficients.entry(k).or_insert(0.0) += delta;
        let phi = ctx.basis().raster(k);
        for ((g, r), &p) in self
            .model
            .rendering
            .iter_mut()
            .zip(self.residual.iter_mut())
            .zip(phi)
        {
            *g += delta * p;
            *r -= delta * p;
        }
    }

    /// Projects the residual and returns the selection, or `None` when the
    /// best decrement is negligible.
    fn select(&mut self, ctx: &WeightedBasis, tau: f64, n_bf: usize) -> Option<(Projection, Vec<f64>, Vec<usize>)> {
        if self.converged {
            return None;
        }
        let projection = project_residual(ctx, &self.residual);
        let decrements = decrement_energies(&projection.coefficients, ctx.norms());
        let selection = select_candidates(&decrements, tau, n_bf);
        let negligible = selection
            .first()
            .is_none_or(|&k| decrements[k] < CONVERGENCE_RATIO * self.initial_energy);
        if negligible {
            self.converged = true;
            return None;
        }
        Some((projection, decrements, selection))
    }
}

/// Single best function per iteration, coefficient `gamma · p_k`.
pub fn fsa_step(state: &mut EngineState, params: &ExtrapolationParams, ctx: &WeightedBasis) -> StepOutcome {
    let Some((projection, _, selection)) = state.select(ctx, params.tau, 1) else {
        return StepOutcome::Converged;
    };
    let k = selection[0];
    let delta = params.gamma * projection.coefficients[k];
    state.add(ctx, k, delta);
    state.energy = ctx.energy(&state.residual);
    state.trace.push(StepRecord {
        updates: vec![(k, delta)],
        energy: state.energy,
        dropped: Vec::new(),
    });
    StepOutcome::Updated
}

/// Several functions per iteration; the residual is projected onto their
/// span and `gamma` times the subspace coefficients is accumulated.
pub fn msa_step(state: &mut EngineState, params: &ExtrapolationParams, ctx: &WeightedBasis) -> StepOutcome {
    let Some((projection, _, selection)) = state.select(ctx, params.tau, params.n_bf) else {
        return StepOutcome::Converged;
    };
    let solution = if selection.len() == 1 {
        // Same arithmetic as FSA so that n_bf = 1 reproduces it exactly.
        let k = selection[0];
        SubspaceSolution {
            indices: selection,
            coefficients: vec![projection.coefficients[k]],
            dropped: Vec::new(),
            method: SolveMethod::Direct,
        }
    } else {
        solve_normal_equations(ctx, &projection.inner, &selection)
    };
    let mut updates = Vec::with_capacity(solution.indices.len());
    for (k, p) in solution.iter() {
        let delta = params.gamma * p;
        state.add(ctx, k, delta);
        updates.push((k, delta));
    }
    state.energy = ctx.energy(&state.residual);
    state.trace.push(StepRecord {
        updates,
        energy: state.energy,
        dropped: solution.dropped,
    });
    StepOutcome::Updated
}

/// Grows the cumulative support by the current selection and re-projects the
/// input signal onto all of it.
pub fn rba_step(state: &mut EngineState, params: &ExtrapolationParams, ctx: &WeightedBasis) -> StepOutcome {
    let Some((_, decrements, selection)) = state.select(ctx, params.tau, params.n_bf) else {
        return StepOutcome::Converged;
    };
    // Existing support keeps its place; new members follow strongest first,
    // so a singular system sheds the weakest newcomer and never an earlier
    // member (the previous support was solvable).
    let mut fresh: Vec<usize> = selection.into_iter().filter(|k| !state.support.contains(k)).collect();
    fresh.sort_by(|&a, &b| decrements[b].total_cmp(&decrements[a]).then(a.cmp(&b)));
    state.support.extend(fresh);
    let ordered = state.support.clone();
    let signal_inner = state
        .signal_inner
        .get_or_insert_with(|| ctx.weighted_inner_products(&state.signal));
    let solution = solve_normal_equations(ctx, signal_inner, &ordered);
    state.support.retain(|k| !solution.dropped.contains(k));

    state.model.coefficients = solution.iter().collect();
    state.model.rendering = ctx.basis().render(&state.model.coefficients);
    for ((r, &f), &g) in state
        .residual
        .iter_mut()
        .zip(&state.signal)
        .zip(&state.model.rendering)
    {
        *r = f - g;
    }
    state.energy = ctx.energy(&state.residual);
    state.trace.push(StepRecord {
        updates: state.model.coefficients.iter().map(|(&k, &c)| (k, c)).collect(),
        energy: state.energy,
        dropped: solution.dropped,
    });
    StepOutcome::Updated
}

pub fn step(state: &mut EngineState, params: &ExtrapolationParams, ctx: &WeightedBasis) -> StepOutcome {
    match params.algorithm {
        Algorithm::Fsa => fsa_step(state, params, ctx),
        Algorithm::Rba => rba_step(state, params, ctx),
        Algorithm::Msa => msa_step(state, params, ctx),
    }
}

/// Runs an engine for up to `params.iterations` iterations.
pub fn extrapolate(signal: &[f64], ctx: &WeightedBasis, params: &ExtrapolationParams) -> Result<EngineState> {
    params.validate()?;
    let mut state = EngineState::new(ctx, signal)?;
    for _ in 0..params.iterations {
        if step(&mut state, params, ctx) == StepOutcome::Converged {
            break;
        }
    }
    Ok(state)
}
