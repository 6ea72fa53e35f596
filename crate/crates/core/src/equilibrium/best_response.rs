//! Exact best responses.
//!
//! A provider's revenue is a strictly concave quadratic in its own two
//! quantities, and its feasible set is a box: `[0, m_own]` for the dedicated
//! quantity and `[0, m_ab - opponent overlap]` for the overlap quantity. The
//! maximizer is therefore one of at most nine candidates obtained by fixing
//! each variable at its lower bound, its upper bound, or leaving it free and
//! solving the stationarity equations.

use crate::model::{self, Allocation, MarketConfig, Sp};

/// Two candidates whose revenues differ by less than this are considered
/// tied; the one with fewer active bounds wins.
const TIE_TOL: f64 = 1e-14;

/// Slack allowed when testing a stationary candidate against its box.
const BOX_SLACK: f64 = 1e-12;

/// One provider's optimization against fixed opponent quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseProblem {
    pub sp: Sp,
    /// Opponent's `(dedicated, overlap)` quantities.
    pub opponent: (f64, f64),
    pub cfg: MarketConfig,
}

impl BestResponseProblem {
    pub fn new(sp: Sp, opponent: (f64, f64), cfg: MarketConfig) -> Self {
        BestResponseProblem { sp, opponent, cfg }
    }

    /// The problem `sp` faces at profile `alloc`.
    pub fn at(alloc: &Allocation, sp: Sp, cfg: &MarketConfig) -> Self {
        BestResponseProblem::new(sp, alloc.own(sp.other()), *cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub dedicated: f64,
    pub overlap: f64,
    /// Revenue of the responding provider at the response.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Lower,
    Free,
    Upper,
}

impl Bound {
    fn is_active(self) -> bool {
        self != Bound::Free
    }
}

/// Maximizes `g·v - ½ vᵀHv` over `lo <= v <= hi` by active-set enumeration.
/// `H` must be positive definite on the free coordinates of every candidate.
fn maximize_box_qp(h: [[f64; 2]; 2], g: [f64; 2], hi: [f64; 2]) -> ([f64; 2], f64) {
    let objective = |v: [f64; 2]| {
        g[0] * v[0] + g[1] * v[1]
            - 0.5 * (h[0][0] * v[0] * v[0] + 2.0 * h[0][1] * v[0] * v[1] + h[1][1] * v[1] * v[1])
    };
    let states = |i: usize| -> &'static [Bound] {
        if hi[i] > 0.0 {
            &[Bound::Lower, Bound::Free, Bound::Upper]
        } else {
            &[Bound::Lower]
        }
    };

    let mut combos: Vec<[Bound; 2]> = Vec::with_capacity(9);
    for &s0 in states(0) {
        for &s1 in states(1) {
            combos.push([s0, s1]);
        }
    }
    combos.sort_by_key(|c| c.iter().filter(|s| s.is_active()).count());

    let mut best: Option<([f64; 2], f64)> = None;
    for combo in combos {
        let mut v = [0.0; 2];
        for i in 0..2 {
            if combo[i] == Bound::Upper {
                v[i] = hi[i];
            }
        }
        match combo {
            [Bound::Free, Bound::Free] => {
                let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
                v[0] = (g[0] * h[1][1] - g[1] * h[0][1]) / det;
                v[1] = (g[1] * h[0][0] - g[0] * h[0][1]) / det;
            }
            [Bound::Free, _] => v[0] = (g[0] - h[0][1] * v[1]) / h[0][0],
            [_, Bound::Free] => v[1] = (g[1] - h[0][1] * v[0]) / h[1][1],
            _ => {}
        }
        if (0..2).any(|i| !v[i].is_finite() || v[i] < -BOX_SLACK || v[i] > hi[i] + BOX_SLACK) {
            continue;
        }
        for i in 0..2 {
            v[i] = v[i].clamp(0.0, hi[i]);
        }
        let value = objective(v);
        match best {
            Some((_, b)) if value <= b + TIE_TOL => {}
            _ => best = Some((v, value)),
        }
    }
    // The all-lower candidate is always feasible.
    best.expect("box QP has a feasible vertex")
}

fn inv(m: f64) -> f64 {
    if m > 0.0 {
        1.0 / m
    } else {
        0.0
    }
}

/// SP1's exact best response; SP2 is handled by relabelling the market.
fn best_response_sp1(opponent: (f64, f64), cfg: &MarketConfig) -> ([f64; 2], f64) {
    let (d, c) = opponent;
    let (iw, ia, iab) = (1.0 / cfg.w(), inv(cfg.m_a()), inv(cfg.m_ab()));
    let h = [[2.0 * (ia + iw), 2.0 * iw], [2.0 * iw, 2.0 * (iab + iw)]];
    let g = [1.0 - c * iw, 1.0 - c * iab - (c + d) * iw];
    let hi = [cfg.m_a(), (cfg.m_ab() - c).max(0.0)];
    maximize_box_qp(h, g, hi)
}

/// Revenue-maximizing quantities for `problem.sp` against the fixed opponent.
pub fn best_response(problem: &BestResponseProblem) -> BestResponse {
    let cfg = match problem.sp {
        Sp::One => problem.cfg,
        Sp::Two => problem.cfg.mirrored(),
    };
    let (v, _) = best_response_sp1(problem.opponent, &cfg);
    let (d, c) = problem.opponent;
    let profile = Allocation::new(v[0], v[1], c, d);
    BestResponse {
        dedicated: v[0],
        overlap: v[1],
        value: model::revenue_unchecked(&profile, Sp::One, &cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coarse-to-fine grid search over the provider's own box.
    fn grid_oracle(sp: Sp, alloc: &Allocation, cfg: &MarketConfig) -> (f64, f64, f64) {
        let (_, oo) = alloc.own(sp.other());
        let hi_d = cfg.dedicated_size(sp);
        let hi_o = (cfg.m_ab() - oo).max(0.0);
        let rev = |a: f64, b: f64| model::revenue_unchecked(&alloc.with_own(sp, a, b), sp, cfg);
        let (mut lo0, mut hi0, mut lo1, mut hi1) = (0.0, hi_d, 0.0, hi_o);
        let mut best = (0.0, 0.0, rev(0.0, 0.0));
        for _ in 0..6 {
            let n = 200;
            for i in 0..=n {
                for j in 0..=n {
                    let a = lo0 + (hi0 - lo0) * i as f64 / n as f64;
                    let b = lo1 + (hi1 - lo1) * j as f64 / n as f64;
                    let r = rev(a, b);
                    if r > best.2 {
                        best = (a, b, r);
                    }
                }
            }
            let (s0, s1) = ((hi0 - lo0) / 20.0, (hi1 - lo1) / 20.0);
            lo0 = (best.0 - s0).max(0.0);
            hi0 = (best.0 + s0).min(hi_d);
            lo1 = (best.1 - s1).max(0.0);
            hi1 = (best.1 + s1).min(hi_o);
        }
        best
    }

    fn cfg(m_a: f64, m_ab: f64, m_b: f64, w: f64) -> MarketConfig {
        MarketConfig::new(m_a, m_ab, m_b, w).unwrap()
    }

    #[test]
    fn narrow_band_response_stays_out_of_overlap() {
        let c = cfg(0.4, 0.2, 0.4, 0.1);
        // Against SP2 serving 0.04 in B\A the overlap stationary point is
        // negative, leaving x (1 - x/m - x/W) with maximizer W m / (2 (W + m)).
        let br = best_response(&BestResponseProblem::new(Sp::One, (0.04, 0.0), c));
        assert_eq!(br.overlap, 0.0);
        assert!((br.dedicated - 0.04).abs() < 1e-15);
        let x = Allocation::new(0.0, 0.0, 0.0, 0.04);
        let (a, b, v) = grid_oracle(Sp::One, &x, &c);
        assert!((a - br.dedicated).abs() < 1e-5 && b < 1e-5);
        assert!(br.value >= v - 1e-15);
    }

    #[test]
    fn monopolist_serves_the_idle_overlap() {
        // Stationary point of H = [[25, 20], [20, 30]], g = (1, 1) is
        // (10/350, 5/350), inside the box.
        let c = cfg(0.4, 0.2, 0.4, 0.1);
        let br = best_response(&BestResponseProblem::new(Sp::One, (0.0, 0.0), c));
        assert!((br.dedicated - 10.0 / 350.0).abs() < 1e-15);
        assert!((br.overlap - 5.0 / 350.0).abs() < 1e-15);
        let (a, b, _) = grid_oracle(Sp::One, &Allocation::ZERO, &c);
        assert!((a - br.dedicated).abs() < 1e-5 && (b - br.overlap).abs() < 1e-5);
    }

    #[test]
    fn saturated_overlap_forces_zero() {
        let c = cfg(0.4, 0.2, 0.4, 1.0);
        let br = best_response(&BestResponseProblem::new(Sp::One, (0.1, 0.2), c));
        assert_eq!(br.overlap, 0.0);
        let br = best_response(&BestResponseProblem::new(Sp::Two, (0.1, 0.2), c));
        assert_eq!(br.overlap, 0.0);
    }

    #[test]
    fn matches_grid_search() {
        let profiles = [
            (
                cfg(0.4, 0.2, 0.4, 0.4),
                Allocation::new(0.05, 0.01, 0.02, 0.09),
            ),
            (
                cfg(0.2, 0.6, 0.2, 1.0),
                Allocation::new(0.0, 0.0, 0.1, 0.05),
            ),
            (
                cfg(0.5, 0.2, 0.3, 0.25),
                Allocation::new(0.1, 0.0, 0.03, 0.06),
            ),
            (
                cfg(0.3, 0.5, 0.2, 2.0),
                Allocation::new(0.12, 0.2, 0.1, 0.07),
            ),
            (cfg(0.1, 0.8, 0.1, 5.0), Allocation::new(0.1, 0.0, 0.0, 0.1)),
        ];
        for (c, x) in profiles {
            for sp in [Sp::One, Sp::Two] {
                let br = best_response(&BestResponseProblem::at(&x, sp, &c));
                let (a, b, v) = grid_oracle(sp, &x, &c);
                assert!(
                    (br.dedicated - a).abs() < 1e-5 && (br.overlap - b).abs() < 1e-5,
                    "{sp} {c:?}: ({}, {}) vs grid ({a}, {b})",
                    br.dedicated,
                    br.overlap
                );
                assert!(br.value >= v - 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_dedicated_market() {
        let c = cfg(0.0, 1.0, 0.0, 0.5);
        let br = best_response(&BestResponseProblem::new(Sp::One, (0.0, 0.1), c));
        assert_eq!(br.dedicated, 0.0);
        assert!(br.overlap > 0.0);
    }
}
