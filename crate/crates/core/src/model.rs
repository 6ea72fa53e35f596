//! Market primitives: configuration, strategy profiles, and every closed-form
//! evaluation of the market (delivered prices, latency costs, revenues,
//! consumer surplus and welfare).
//!
//! Two providers share one band of bandwidth `W`. SP1 covers `A`, SP2 covers
//! `B`, which splits users into three sub-markets: `A\B` (SP1 only), `AB`
//! (both) and `B\A` (SP2 only). Demand is linear with intercept 1 and the
//! total user mass is normalized to 1.

use crate::error::{Constraint, Error, Result};

/// Absolute tolerance of the coverage constraints. Violations within it are
/// clamped, beyond it they are errors.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance of the unit-mass normalization `m_a + m_ab + m_b = 1`.
pub const MASS_TOL: f64 = 1e-12;

/// Tolerance used to decide `m_a == m_b`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A service provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sp {
    One,
    Two,
}

impl Sp {
    pub fn other(self) -> Sp {
        match self {
            Sp::One => Sp::Two,
            Sp::Two => Sp::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sp::One => 1,
            Sp::Two => 2,
        }
    }
}

impl std::fmt::Display for Sp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SP{}", self.index())
    }
}

/// Sub-market sizes and the shared bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketConfig {
    m_a: f64,
    m_ab: f64,
    m_b: f64,
    w: f64,
}

impl MarketConfig {
    pub fn new(m_a: f64, m_ab: f64, m_b: f64, w: f64) -> Result<Self> {
        for (name, v) in [("m_a", m_a), ("m_ab", m_ab), ("m_b", m_b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be a finite nonnegative size, got {v}"
                )));
            }
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::Config(format!(
                "bandwidth W must be positive and finite, got {w}"
            )));
        }
        let total = m_a + m_ab + m_b;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Config(format!(
                "sub-market sizes must sum to 1 (total market mass is normalized), got {total}"
            )));
        }
        Ok(MarketConfig { m_a, m_ab, m_b, w })
    }

    /// Symmetric configuration `m_a = m_b = (1 - m_ab) / 2`.
    pub fn symmetric(m_ab: f64, w: f64) -> Result<Self> {
        let side = (1.0 - m_ab) / 2.0;
        Self::new(side, m_ab, side, w)
    }

    pub fn m_a(&self) -> f64 {
        self.m_a
    }

    pub fn m_ab(&self) -> f64 {
        self.m_ab
    }

    pub fn m_b(&self) -> f64 {
        self.m_b
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Same sizes, different bandwidth.
    pub fn with_bandwidth(&self, w: f64) -> Result<Self> {
        Self::new(self.m_a, self.m_ab, self.m_b, w)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.m_a - self.m_b).abs() <= SYMMETRY_TOL
    }

    /// All three sub-markets have positive size.
    pub fn is_nondegenerate(&self) -> bool {
        self.m_a > 0.0 && self.m_ab > 0.0 && self.m_b > 0.0
    }

    /// Relabels the providers: SP2 becomes SP1 and `B\A` becomes `A\B`.
    pub fn mirrored(&self) -> Self {
        MarketConfig {
            m_a: self.m_b,
            m_ab: self.m_ab,
            m_b: self.m_a,
            w: self.w,
        }
    }

    /// Size of the dedicated sub-market of `sp`.
    pub fn dedicated_size(&self, sp: Sp) -> f64 {
        match sp {
            Sp::One => self.m_a,
            Sp::Two => self.m_b,
        }
    }
}

/// A strategy profile: the four quantities chosen by the two providers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Allocation {
    pub x1_a: f64,
    pub x1_ab: f64,
    pub x2_ab: f64,
    pub x2_b: f64,
}

impl Allocation {
    pub const ZERO: Allocation = Allocation {
        x1_a: 0.0,
        x1_ab: 0.0,
        x2_ab: 0.0,
        x2_b: 0.0,
    };

    pub fn new(x1_a: f64, x1_ab: f64, x2_ab: f64, x2_b: f64) -> Self {
        Allocation {
            x1_a,
            x1_ab,
            x2_ab,
            x2_b,
        }
    }

    /// Stacked in the order `(x1_a, x1_ab, x2_ab, x2_b)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x1_a, self.x1_ab, self.x2_ab, self.x2_b]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Allocation::new(x[0], x[1], x[2], x[3])
    }

    /// Swaps the providers' roles, matching [`MarketConfig::mirrored`].
    pub fn mirrored(&self) -> Self {
        Allocation::new(self.x2_b, self.x2_ab, self.x1_ab, self.x1_a)
    }

    /// `(dedicated, overlap)` quantities of `sp`.
    pub fn own(&self, sp: Sp) -> (f64, f64) {
        match sp {
            Sp::One => (self.x1_a, self.x1_ab),
            Sp::Two => (self.x2_b, self.x2_ab),
        }
    }

    /// Replaces the quantities of `sp`.
    pub fn with_own(&self, sp: Sp, dedicated: f64, overlap: f64) -> Self {
        let mut out = *self;
        match sp {
            Sp::One => {
                out.x1_a = dedicated;
                out.x1_ab = overlap;
            }
            Sp::Two => {
                out.x2_b = dedicated;
                out.x2_ab = overlap;
            }
        }
        out
    }

    pub fn overlap_total(&self) -> f64 {
        self.x1_ab + self.x2_ab
    }

    pub fn total(&self) -> f64 {
        self.x1_a + self.x1_ab + self.x2_ab + self.x2_b
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Allocation::new(
            lambda * self.x1_a,
            lambda * self.x1_ab,
            lambda * self.x2_ab,
            lambda * self.x2_b,
        )
    }

    /// Sup-norm distance between two profiles.
    pub fn distance(&self, other: &Allocation) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the coverage constraints and returns the profile clamped onto
    /// the feasible set. Sub-markets of size zero force their quantity to 0.
    pub fn feasible(&self, cfg: &MarketConfig) -> Result<Allocation> {
        for v in self.to_array() {
            if !v.is_finite() {
                return Err(Error::Infeasible {
                    constraint: Constraint::Overlap,
                    detail: format!("non-finite quantity in {self:?}"),
                });
            }
        }
        let out_of_box = |v: f64, hi: f64| v < -FEASIBILITY_TOL || v > hi + FEASIBILITY_TOL;
        if out_of_box(self.x1_a, cfg.m_a) {
            return Err(Error::Infeasible {
                constraint: Constraint::DedicatedA,
                detail: format!("x1_a = {} with m_a = {}", self.x1_a, cfg.m_a),
            });
        }
        if self.x1_ab < -FEASIBILITY_TOL
            || self.x2_ab < -FEASIBILITY_TOL
            || out_of_box(self.overlap_total(), cfg.m_ab)
        {
            return Err(Error::Infeasible {
                constraint: Constraint::Overlap,
                detail: format!(
                    "x1_ab = {}, x2_ab = {} with m_ab = {}",
                    self.x1_ab, self.x2_ab, cfg.m_ab
                ),
            });
        }
        if out_of_box(self.x2_b, cfg.m_b) {
            return Err(Error::Infeasible {
                constraint: Constraint::DedicatedB,
                detail: format!("x2_b = {} with m_b = {}", self.x2_b, cfg.m_b),
            });
        }

        let x1_a = self.x1_a.clamp(0.0, cfg.m_a);
        let x2_b = self.x2_b.clamp(0.0, cfg.m_b);
        let mut x1_ab = self.x1_ab.max(0.0);
        let mut x2_ab = self.x2_ab.max(0.0);
        let sum = x1_ab + x2_ab;
        if sum > cfg.m_ab {
            if cfg.m_ab == 0.0 {
                x1_ab = 0.0;
                x2_ab = 0.0;
            } else {
                let s = cfg.m_ab / sum;
                x1_ab *= s;
                x2_ab *= s;
            }
        }
        Ok(Allocation::new(x1_a, x1_ab, x2_ab, x2_b))
    }
}

/// Every market quantity evaluated at one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOutcome {
    pub p_a: f64,
    pub p_ab: f64,
    pub p_b: f64,
    pub l_a: f64,
    pub l_ab: f64,
    pub l_b: f64,
    pub s_a: f64,
    pub s_ab: f64,
    pub s_b: f64,
    pub r1: f64,
    pub r2: f64,
    pub cs_a: f64,
    pub cs_ab: f64,
    pub cs_b: f64,
    pub cs_total: f64,
    pub welfare: f64,
}

impl MarketOutcome {
    pub fn revenue(&self, sp: Sp) -> f64 {
        match sp {
            Sp::One => self.r1,
            Sp::Two => self.r2,
        }
    }

    pub fn revenue_total(&self) -> f64 {
        self.r1 + self.r2
    }
}

// Inverse demand `1 - x/m`; an empty sub-market carries no quantity and
// reports the intercept.
fn clearing_price(x: f64, m: f64) -> f64 {
    if m > 0.0 {
        1.0 - x / m
    } else {
        1.0
    }
}

fn surplus(x: f64, m: f64) -> f64 {
    if m > 0.0 {
        x * x / (2.0 * m)
    } else {
        0.0
    }
}

pub(crate) fn prices_unchecked(x: &Allocation, cfg: &MarketConfig) -> (f64, f64, f64) {
    (
        clearing_price(x.x1_a, cfg.m_a),
        clearing_price(x.overlap_total(), cfg.m_ab),
        clearing_price(x.x2_b, cfg.m_b),
    )
}

pub(crate) fn latencies_unchecked(x: &Allocation, cfg: &MarketConfig) -> (f64, f64, f64) {
    let overlap = x.overlap_total();
    (
        (x.x1_a + overlap) / cfg.w,
        (x.x1_a + overlap + x.x2_b) / cfg.w,
        (overlap + x.x2_b) / cfg.w,
    )
}

/// Revenues without the feasibility check. The formulas are polynomial in the
/// quantities, so this is also meaningful off the feasible set.
pub(crate) fn revenues_unchecked(x: &Allocation, cfg: &MarketConfig) -> (f64, f64) {
    let (p_a, p_ab, p_b) = prices_unchecked(x, cfg);
    let (l_a, l_ab, l_b) = latencies_unchecked(x, cfg);
    let r1 = x.x1_a * (p_a - l_a) + x.x1_ab * (p_ab - l_ab);
    let r2 = x.x2_b * (p_b - l_b) + x.x2_ab * (p_ab - l_ab);
    (r1, r2)
}

pub(crate) fn revenue_unchecked(x: &Allocation, sp: Sp, cfg: &MarketConfig) -> f64 {
    let (r1, r2) = revenues_unchecked(x, cfg);
    match sp {
        Sp::One => r1,
        Sp::Two => r2,
    }
}

/// Market-clearing delivered prices `(p_a, p_ab, p_b)`.
pub fn delivered_prices(alloc: &Allocation, cfg: &MarketConfig) -> Result<(f64, f64, f64)> {
    let x = alloc.feasible(cfg)?;
    Ok(prices_unchecked(&x, cfg))
}

/// Congestion costs `(l_a, l_ab, l_b)`: traffic within range of the
/// sub-market's access point(s) divided by the bandwidth.
pub fn latency_costs(alloc: &Allocation, cfg: &MarketConfig) -> Result<(f64, f64, f64)> {
    let x = alloc.feasible(cfg)?;
    Ok(latencies_unchecked(&x, cfg))
}

/// Provider revenues `(r1, r2)`. Negative service prices are not clamped.
pub fn revenues(alloc: &Allocation, cfg: &MarketConfig) -> Result<(f64, f64)> {
    let x = alloc.feasible(cfg)?;
    Ok(revenues_unchecked(&x, cfg))
}

/// Consumer surplus `(cs_a, cs_ab, cs_b, cs_total)`.
pub fn consumer_surplus(alloc: &Allocation, cfg: &MarketConfig) -> Result<(f64, f64, f64, f64)> {
    let x = alloc.feasible(cfg)?;
    let cs_a = surplus(x.x1_a, cfg.m_a);
    let cs_ab = surplus(x.overlap_total(), cfg.m_ab);
    let cs_b = surplus(x.x2_b, cfg.m_b);
    Ok((cs_a, cs_ab, cs_b, cs_a + cs_ab + cs_b))
}

/// Evaluates the whole market at `alloc`.
pub fn evaluate(alloc: &Allocation, cfg: &MarketConfig) -> Result<MarketOutcome> {
    let x = alloc.feasible(cfg)?;
    let (p_a, p_ab, p_b) = prices_unchecked(&x, cfg);
    let (l_a, l_ab, l_b) = latencies_unchecked(&x, cfg);
    let (r1, r2) = revenues_unchecked(&x, cfg);
    let (cs_a, cs_ab, cs_b, cs_total) = consumer_surplus(&x, cfg)?;
    Ok(MarketOutcome {
        p_a,
        p_ab,
        p_b,
        l_a,
        l_ab,
        l_b,
        s_a: p_a - l_a,
        s_ab: p_ab - l_ab,
        s_b: p_b - l_b,
        r1,
        r2,
        cs_a,
        cs_ab,
        cs_b,
        cs_total,
        welfare: cs_total + r1 + r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m_a: f64, m_ab: f64, m_b: f64, w: f64) -> MarketConfig {
        MarketConfig::new(m_a, m_ab, m_b, w).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn config_rejects_bad_inputs() {
        assert!(MarketConfig::new(0.4, 0.4, 0.4, 0.5).is_err());
        assert!(MarketConfig::new(0.4, 0.2, 0.4, 0.0).is_err());
        assert!(MarketConfig::new(0.4, 0.2, 0.4, -1.0).is_err());
        assert!(MarketConfig::new(-0.1, 0.7, 0.4, 1.0).is_err());
        assert!(MarketConfig::new(0.4, 0.2, 0.4, f64::NAN).is_err());
        assert!(MarketConfig::new(0.0, 1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn empty_market_prices_are_one() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        assert_eq!(
            delivered_prices(&Allocation::ZERO, &c).unwrap(),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn fully_served_dedicated_market_clears_at_zero() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let (p_a, _, _) = delivered_prices(&Allocation::new(0.4, 0.0, 0.0, 0.0), &c).unwrap();
        assert_eq!(p_a, 0.0);
    }

    #[test]
    fn prices_by_substitution() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let (a, ab, b) = delivered_prices(&Allocation::new(0.1, 0.05, 0.05, 0.1), &c).unwrap();
        assert!(close(a, 0.75, 1e-15));
        assert!(close(ab, 0.5, 1e-15));
        assert!(close(b, 0.75, 1e-15));
    }

    #[test]
    fn infeasible_allocations_name_the_constraint() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let cases = [
            (Allocation::new(0.5, 0.0, 0.0, 0.0), Constraint::DedicatedA),
            (Allocation::new(0.0, 0.15, 0.1, 0.0), Constraint::Overlap),
            (Allocation::new(0.0, -0.01, 0.0, 0.0), Constraint::Overlap),
            (Allocation::new(0.0, 0.0, 0.0, 0.41), Constraint::DedicatedB),
        ];
        for (alloc, expected) in cases {
            match delivered_prices(&alloc, &c) {
                Err(Error::Infeasible { constraint, .. }) => assert_eq!(constraint, expected),
                other => panic!("expected infeasibility for {alloc:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn grazing_violations_are_clamped() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let x = Allocation::new(0.4 + 5e-10, 0.1 + 3e-10, 0.1, -2e-10)
            .feasible(&c)
            .unwrap();
        assert_eq!(x.x1_a, 0.4);
        assert!(x.overlap_total() <= 0.2);
        assert_eq!(x.x2_b, 0.0);
    }

    #[test]
    fn latency_by_substitution() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let (a, ab, b) = latency_costs(&Allocation::new(0.1, 0.0, 0.0, 0.1), &c).unwrap();
        assert!(close(a, 0.2, 1e-15) && close(ab, 0.4, 1e-15) && close(b, 0.2, 1e-15));

        assert_eq!(
            latency_costs(&Allocation::ZERO, &c).unwrap(),
            (0.0, 0.0, 0.0)
        );

        let (a, ab, b) = latency_costs(&Allocation::new(0.0, 0.05, 0.05, 0.0), &c).unwrap();
        assert!(close(a, 0.2, 1e-15) && close(ab, 0.2, 1e-15) && close(b, 0.2, 1e-15));
    }

    #[test]
    fn revenue_at_dedicated_equilibrium() {
        // x = W m / (2 (W + m)) = 1/15; r = x (1 - x/m - x/W) = 1/30 by hand.
        let c = cfg(0.4, 0.2, 0.4, 0.2);
        let x = 0.2 * 0.4 / (2.0 * 0.6);
        let (r1, r2) = revenues(&Allocation::new(x, 0.0, 0.0, x), &c).unwrap();
        assert!(close(r1, 1.0 / 30.0, 1e-15));
        assert_eq!(r1, r2);
        assert_eq!(revenues(&Allocation::ZERO, &c).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn surplus_cases() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let (cs_a, _, _, total) =
            consumer_surplus(&Allocation::new(0.4, 0.0, 0.0, 0.0), &c).unwrap();
        assert!(close(cs_a, 0.2, 1e-15));
        assert_eq!(total, cs_a);
        assert_eq!(
            consumer_surplus(&Allocation::ZERO, &c).unwrap(),
            (0.0, 0.0, 0.0, 0.0)
        );
        let (_, cs_ab, _, _) =
            consumer_surplus(&Allocation::new(0.0, 0.05, 0.05, 0.0), &c).unwrap();
        assert!(close(cs_ab, 0.025, 1e-15));
    }

    #[test]
    fn evaluate_empty_market() {
        let c = cfg(0.4, 0.2, 0.4, 0.5);
        let o = evaluate(&Allocation::ZERO, &c).unwrap();
        assert_eq!((o.p_a, o.p_ab, o.p_b), (1.0, 1.0, 1.0));
        assert_eq!((o.s_a, o.s_ab, o.s_b), (1.0, 1.0, 1.0));
        for v in [o.l_a, o.l_ab, o.l_b, o.r1, o.r2, o.cs_total, o.welfare] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn evaluate_symmetric_profile_is_symmetric() {
        let c = cfg(0.3, 0.4, 0.3, 0.7);
        let o = evaluate(&Allocation::new(0.1, 0.07, 0.07, 0.1), &c).unwrap();
        assert_eq!(o.r1, o.r2);
        assert_eq!(o.cs_a, o.cs_b);
        assert_eq!(o.welfare, o.cs_total + o.r1 + o.r2);
    }

    #[test]
    fn degenerate_sub_markets() {
        let c = cfg(0.5, 0.0, 0.5, 0.3);
        let o = evaluate(&Allocation::new(0.1, 0.0, 0.0, 0.1), &c).unwrap();
        assert_eq!(o.p_ab, 1.0);
        assert_eq!(o.cs_ab, 0.0);
        assert!(o.welfare.is_finite());
        assert!(evaluate(&Allocation::new(0.1, 1e-3, 0.0, 0.1), &c).is_err());

        let c = cfg(0.0, 1.0, 0.0, 0.3);
        let o = evaluate(&Allocation::new(0.0, 0.2, 0.1, 0.0), &c).unwrap();
        assert_eq!((o.p_a, o.p_b), (1.0, 1.0));
        assert_eq!((o.cs_a, o.cs_b), (0.0, 0.0));
    }

    #[test]
    fn mirroring_swaps_revenues() {
        let c = cfg(0.5, 0.2, 0.3, 0.4);
        let x = Allocation::new(0.1, 0.03, 0.05, 0.08);
        let (r1, r2) = revenues(&x, &c).unwrap();
        let (m1, m2) = revenues(&x.mirrored(), &c.mirrored()).unwrap();
        assert!(close(r1, m2, 1e-15) && close(r2, m1, 1e-15));
    }
}
