//! Nash equilibria of the two-provider game.
//!
//! Three routes are provided: the closed form for symmetric markets, exact
//! best-response iteration for any market, and the cooperation counterfactual
//! in which both providers stay out of the overlap. [`verify_nash`] checks any
//! profile against the definition and [`lemma`] turns the boundary-exclusion
//! arguments into executable deviation oracles.

mod best_response;
pub mod lemma;

pub use best_response::{best_response, BestResponse, BestResponseProblem};
pub use lemma::{lemma_deviation, BoundaryFoc, Deviation, Lemma, LemmaFinding};

use crate::error::{Error, Result};
use crate::model::{self, Allocation, MarketConfig, MarketOutcome, Sp};
use crate::potential;

/// Residual below which a profile is accepted as a Nash equilibrium.
pub const NASH_TOL: f64 = 1e-8;
/// Sup-norm step at which best-response iteration stops.
pub const STEP_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;

/// Which providers serve the overlapping sub-market.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    DedicatedOnly,
    OneSpInOverlap(Sp),
    BothInOverlap,
}

impl Regime {
    pub fn of(alloc: &Allocation) -> Regime {
        match (alloc.x1_ab > 0.0, alloc.x2_ab > 0.0) {
            (false, false) => Regime::DedicatedOnly,
            (true, false) => Regime::OneSpInOverlap(Sp::One),
            (false, true) => Regime::OneSpInOverlap(Sp::Two),
            (true, true) => Regime::BothInOverlap,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::DedicatedOnly => "dedicated_only",
            Regime::OneSpInOverlap(Sp::One) => "sp1_in_overlap",
            Regime::OneSpInOverlap(Sp::Two) => "sp2_in_overlap",
            Regime::BothInOverlap => "both_in_overlap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedFormSymmetric,
    NumericPotential,
    Cooperation,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedFormSymmetric => "closed_form_symmetric",
            Method::NumericPotential => "numeric_potential",
            Method::Cooperation => "cooperation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    pub cfg: MarketConfig,
    pub alloc: Allocation,
    pub outcome: MarketOutcome,
    pub regime: Regime,
    pub method: Method,
    /// Largest revenue gain either provider could obtain by best-responding.
    pub residual: f64,
    pub iterations: usize,
}

impl EquilibriumResult {
    fn assemble(
        cfg: &MarketConfig,
        alloc: Allocation,
        method: Method,
        iterations: usize,
    ) -> Result<Self> {
        let alloc = alloc.feasible(cfg)?;
        Ok(EquilibriumResult {
            cfg: *cfg,
            alloc,
            outcome: model::evaluate(&alloc, cfg)?,
            regime: Regime::of(&alloc),
            method,
            residual: verify_nash(&alloc, cfg)?,
            iterations,
        })
    }

    pub fn is_equilibrium(&self) -> bool {
        self.residual <= NASH_TOL
    }
}

/// Dedicated-market monopoly quantity `W m / (2 (W + m))`, the maximizer of
/// `x (1 - x/m - x/W)`.
pub fn dedicated_monopoly(m: f64, w: f64) -> f64 {
    if m > 0.0 {
        w * m / (2.0 * (w + m))
    } else {
        0.0
    }
}

/// Closed-form equilibrium of a symmetric market (`m_a = m_b`).
pub fn closed_form_symmetric(cfg: &MarketConfig) -> Result<EquilibriumResult> {
    if !cfg.is_symmetric() {
        return Err(Error::NotApplicable(format!(
            "closed form needs m_a = m_b (got {} and {}); use the numeric solver",
            cfg.m_a(),
            cfg.m_b()
        )));
    }
    let (m, m_ab, w) = (cfg.m_a(), cfg.m_ab(), cfg.w());
    let (x_a, x_ab) = if w < m / 2.0 {
        (dedicated_monopoly(m, w), 0.0)
    } else {
        let c = 2.0 * (w + m + m_ab) - m * m_ab / w;
        (w * m / c, (2.0 * w - m) * m_ab / (3.0 * c))
    };
    EquilibriumResult::assemble(
        cfg,
        Allocation::new(x_a, x_ab, x_ab, x_a),
        Method::ClosedFormSymmetric,
        0,
    )
}

/// Cooperation counterfactual: both providers commit to leave the overlap
/// empty and each serves its dedicated monopoly quantity.
pub fn solve_cooperation(cfg: &MarketConfig) -> Result<EquilibriumResult> {
    let alloc = Allocation::new(
        dedicated_monopoly(cfg.m_a(), cfg.w()),
        0.0,
        0.0,
        dedicated_monopoly(cfg.m_b(), cfg.w()),
    );
    EquilibriumResult::assemble(cfg, alloc, Method::Cooperation, 0)
}

/// `max_sp (best-response revenue - current revenue)`, never negative.
pub fn verify_nash(alloc: &Allocation, cfg: &MarketConfig) -> Result<f64> {
    let x = alloc.feasible(cfg)?;
    let (r1, r2) = model::revenues_unchecked(&x, cfg);
    let gain =
        |sp: Sp, current: f64| best_response(&BestResponseProblem::at(&x, sp, cfg)).value - current;
    Ok(gain(Sp::One, r1).max(gain(Sp::Two, r2)).max(0.0))
}

/// Trace of one best-response iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseRun {
    pub alloc: Allocation,
    pub iterations: usize,
    /// Sup-norm of the final step.
    pub last_step: f64,
    /// Largest decrease of the potential over any half-step; `None` when the
    /// market has an empty sub-market and the potential is undefined.
    pub potential_drop: Option<f64>,
}

/// Alternating exact best responses, SP1 then SP2.
#[derive(Debug, Clone, Copy)]
pub struct BestResponseDynamics {
    pub cfg: MarketConfig,
    pub step_tol: f64,
    pub max_iterations: usize,
}

impl BestResponseDynamics {
    pub fn new(cfg: MarketConfig) -> Self {
        BestResponseDynamics {
            cfg,
            step_tol: STEP_TOL,
            max_iterations: MAX_ITERATIONS,
        }
    }

    pub fn run_from(&self, start: &Allocation) -> Result<BestResponseRun> {
        let cfg = &self.cfg;
        let form = potential::build_matrix(cfg).ok();
        let phi = |x: &Allocation| form.map(|f| f.evaluate(&x.to_array()));

        let mut x = start.feasible(cfg)?;
        let mut drop: Option<f64> = form.map(|_| 0.0);
        let mut last_step = f64::INFINITY;
        for it in 1..=self.max_iterations {
            let prev = x;
            for sp in [Sp::One, Sp::Two] {
                let before = phi(&x);
                let br = best_response(&BestResponseProblem::at(&x, sp, cfg));
                x = x.with_own(sp, br.dedicated, br.overlap);
                if let (Some(b), Some(a), Some(d)) = (before, phi(&x), drop.as_mut()) {
                    *d = d.max(b - a);
                }
            }
            last_step = x.distance(&prev);
            if last_step < self.step_tol {
                return Ok(BestResponseRun {
                    alloc: x,
                    iterations: it,
                    last_step,
                    potential_drop: drop,
                });
            }
        }
        Err(Error::Solver {
            reason: format!("step {last_step:e} still above {:e}", self.step_tol),
            last: x,
            residual: verify_nash(&x, cfg).unwrap_or(f64::NAN),
            iterations: self.max_iterations,
        })
    }
}

/// Equilibrium by best-response iteration from the empty profile, accepted
/// only if its Nash residual is at most [`NASH_TOL`].
pub fn solve_numeric(cfg: &MarketConfig) -> Result<EquilibriumResult> {
    solve_numeric_from(cfg, &Allocation::ZERO)
}

pub fn solve_numeric_from(cfg: &MarketConfig, start: &Allocation) -> Result<EquilibriumResult> {
    let run = BestResponseDynamics::new(*cfg).run_from(start)?;
    let result =
        EquilibriumResult::assemble(cfg, run.alloc, Method::NumericPotential, run.iterations)?;
    if !result.is_equilibrium() {
        return Err(Error::Solver {
            reason: "limit point fails the Nash check".into(),
            last: result.alloc,
            residual: result.residual,
            iterations: run.iterations,
        });
    }
    Ok(result)
}

/// Agreement of best-response iteration started from several profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartReport {
    pub limits: Vec<Allocation>,
    /// Largest sup-norm distance between any two limits.
    pub max_spread: f64,
    pub max_residual: f64,
}

pub fn multi_start(cfg: &MarketConfig, starts: &[Allocation]) -> Result<MultiStartReport> {
    let dynamics = BestResponseDynamics::new(*cfg);
    let mut limits = Vec::with_capacity(starts.len());
    let mut max_residual = 0.0_f64;
    for start in starts {
        let run = dynamics.run_from(start)?;
        max_residual = max_residual.max(verify_nash(&run.alloc, cfg)?);
        limits.push(run.alloc);
    }
    let mut max_spread = 0.0_f64;
    for (i, a) in limits.iter().enumerate() {
        for b in &limits[i + 1..] {
            max_spread = max_spread.max(a.distance(b));
        }
    }
    Ok(MultiStartReport {
        limits,
        max_spread,
        max_residual,
    })
}
