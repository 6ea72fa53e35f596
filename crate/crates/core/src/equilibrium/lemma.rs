//! Boundary profiles that cannot be equilibria, with the deviations that
//! prove it.
//!
//! * Crowded over dedicated: a provider serves the overlap but not its own
//!   dedicated market. Shifting a small amount to the dedicated market pays,
//!   since the dedicated service price is strictly higher.
//! * Squeezed out entirely: a provider serves nobody. Entering its dedicated
//!   market with a small quantity pays, unless the opponent's overlap traffic
//!   already exceeds the bandwidth, in which case the opponent is charging
//!   negative service prices everywhere and gains by withdrawing.
//! * Squeezed out of the overlap: only the opponent serves the overlap. The
//!   stationarity system restricted to this face is solved and its sign
//!   pattern reported; with narrow bandwidth in a symmetric market the
//!   solution is never feasible. A best-response deviation is attached when
//!   one exists.

use crate::error::{Error, Result};
use crate::model::{self, Allocation, MarketConfig, Sp};

use super::{best_response, BestResponseProblem};

/// Quantities at or below this are treated as zero when matching patterns.
const ZERO_TOL: f64 = 1e-12;
const INITIAL_STEP: f64 = 1e-2;
const MAX_HALVINGS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    CrowdedOverDedicated,
    SqueezedOutEntirely,
    SqueezedOutOfOverlap,
}

/// A unilateral deviation with strictly higher revenue for `sp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub sp: Sp,
    pub alloc: Allocation,
    pub gain: f64,
    /// Shift size `Δ` for the small-step constructions.
    pub step: Option<f64>,
}

/// Solution of the stationarity system on the face where the squeezed
/// provider serves only its dedicated market and the opponent serves both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFoc {
    pub squeezed_dedicated: f64,
    pub opponent_overlap: f64,
    pub opponent_dedicated: f64,
}

impl BoundaryFoc {
    pub fn sign_product(&self) -> f64 {
        self.squeezed_dedicated * self.opponent_overlap
    }

    /// The face has no interior stationary point with both quantities positive.
    pub fn is_infeasible(&self) -> bool {
        self.sign_product() < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaFinding {
    pub lemma: Lemma,
    /// Provider whose quantities sit on the boundary.
    pub squeezed: Sp,
    pub deviation: Option<Deviation>,
    pub first_order: Option<BoundaryFoc>,
}

fn is_zero(v: f64) -> bool {
    v <= ZERO_TOL
}

fn gain_of(sp: Sp, from: &Allocation, to: &Allocation, cfg: &MarketConfig) -> Result<f64> {
    let before = model::revenues(from, cfg)?;
    let after = model::revenues(to, cfg)?;
    Ok(match sp {
        Sp::One => after.0 - before.0,
        Sp::Two => after.1 - before.1,
    })
}

/// Halves `Δ` from `start` until `build(Δ)` is strictly profitable for `sp`.
fn halving_search(
    sp: Sp,
    alloc: &Allocation,
    cfg: &MarketConfig,
    start: f64,
    build: impl Fn(f64) -> Allocation,
) -> Result<Option<Deviation>> {
    let mut delta = start;
    for _ in 0..MAX_HALVINGS {
        let candidate = build(delta);
        let gain = gain_of(sp, alloc, &candidate, cfg)?;
        if gain > 0.0 {
            return Ok(Some(Deviation {
                sp,
                alloc: candidate,
                gain,
                step: Some(delta),
            }));
        }
        delta *= 0.5;
    }
    Ok(None)
}

/// Solves the 3×3 stationarity system in SP1's labelling (SP1 squeezed out
/// of the overlap): unknowns `(x1_a, x2_ab, x2_b)` with `x1_ab = 0`.
fn boundary_foc_sp1(cfg: &MarketConfig) -> BoundaryFoc {
    let iw = 1.0 / cfg.w();
    let m = [
        [2.0 / cfg.m_a() + 2.0 * iw, iw, 0.0],
        [iw, 2.0 / cfg.m_ab() + 2.0 * iw, 2.0 * iw],
        [0.0, 2.0 * iw, 2.0 / cfg.m_b() + 2.0 * iw],
    ];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    let solve_col = |col: usize| {
        let mut mc = m;
        for row in mc.iter_mut() {
            row[col] = 1.0;
        }
        det3(&mc) / d
    };
    BoundaryFoc {
        squeezed_dedicated: solve_col(0),
        opponent_overlap: solve_col(1),
        opponent_dedicated: solve_col(2),
    }
}

fn best_deviation(alloc: &Allocation, cfg: &MarketConfig) -> Option<Deviation> {
    [Sp::One, Sp::Two]
        .into_iter()
        .map(|sp| {
            let current = model::revenue_unchecked(alloc, sp, cfg);
            let br = best_response(&BestResponseProblem::at(alloc, sp, cfg));
            Deviation {
                sp,
                alloc: alloc.with_own(sp, br.dedicated, br.overlap),
                gain: br.value - current,
                step: None,
            }
        })
        .filter(|d| d.gain > 0.0)
        .max_by(|a, b| a.gain.total_cmp(&b.gain))
}

/// Matches `alloc` against the boundary patterns and, when one applies,
/// builds the deviation the corresponding argument prescribes.
pub fn lemma_deviation(alloc: &Allocation, cfg: &MarketConfig) -> Result<LemmaFinding> {
    if !cfg.is_nondegenerate() {
        return Err(Error::Config(
            "boundary deviations need positive sub-market sizes".into(),
        ));
    }
    let x = alloc.feasible(cfg)?;

    for sp in [Sp::One, Sp::Two] {
        let (ded, ovl) = x.own(sp);
        if is_zero(ded) && !is_zero(ovl) {
            let start = INITIAL_STEP.min(ovl).min(cfg.dedicated_size(sp));
            let deviation = halving_search(sp, &x, cfg, start, |d| x.with_own(sp, d, ovl - d))?;
            return Ok(LemmaFinding {
                lemma: Lemma::CrowdedOverDedicated,
                squeezed: sp,
                deviation,
                first_order: None,
            });
        }
    }

    for sp in [Sp::One, Sp::Two] {
        let (ded, ovl) = x.own(sp);
        if is_zero(ded) && is_zero(ovl) {
            let (_, opp_ovl) = x.own(sp.other());
            let deviation = if 1.0 - opp_ovl / cfg.w() > 0.0 {
                let start = INITIAL_STEP.min(cfg.dedicated_size(sp));
                halving_search(sp, &x, cfg, start, |d| x.with_own(sp, d, 0.0))?
            } else {
                // Opponent's service prices are negative in both its markets.
                let other = sp.other();
                let quit = x.with_own(other, 0.0, 0.0);
                let gain = gain_of(other, &x, &quit, cfg)?;
                (gain > 0.0).then_some(Deviation {
                    sp: other,
                    alloc: quit,
                    gain,
                    step: None,
                })
            };
            return Ok(LemmaFinding {
                lemma: Lemma::SqueezedOutEntirely,
                squeezed: sp,
                deviation,
                first_order: None,
            });
        }
    }

    for sp in [Sp::One, Sp::Two] {
        let (_, ovl) = x.own(sp);
        let (_, opp_ovl) = x.own(sp.other());
        if is_zero(ovl) && !is_zero(opp_ovl) {
            let view = match sp {
                Sp::One => *cfg,
                Sp::Two => cfg.mirrored(),
            };
            return Ok(LemmaFinding {
                lemma: Lemma::SqueezedOutOfOverlap,
                squeezed: sp,
                deviation: best_deviation(&x, cfg),
                first_order: Some(boundary_foc_sp1(&view)),
            });
        }
    }

    Err(Error::NotApplicable(format!(
        "{x:?} matches no boundary pattern"
    )))
}
