//! Random markets and profiles for property checks.

use rand::Rng;

use crate::model::{Allocation, MarketConfig, Sp};

/// Uniform point of the feasible set of `cfg`.
pub fn random_allocation<R: Rng + ?Sized>(cfg: &MarketConfig, rng: &mut R) -> Allocation {
    let x1_a = rng.gen::<f64>() * cfg.m_a();
    let overlap = rng.gen::<f64>() * cfg.m_ab();
    let split = rng.gen::<f64>();
    let x2_b = rng.gen::<f64>() * cfg.m_b();
    Allocation::new(x1_a, overlap * split, overlap * (1.0 - split), x2_b)
}

/// Random feasible replacement of `sp`'s quantities in `alloc`.
pub fn random_deviation<R: Rng + ?Sized>(
    alloc: &Allocation,
    sp: Sp,
    cfg: &MarketConfig,
    rng: &mut R,
) -> Allocation {
    let (_, opp_overlap) = alloc.own(sp.other());
    let dedicated = rng.gen::<f64>() * cfg.dedicated_size(sp);
    let overlap = rng.gen::<f64>() * (cfg.m_ab() - opp_overlap).max(0.0);
    alloc.with_own(sp, dedicated, overlap)
}

/// Symmetric market with every size at least `min_size` and `W` uniform in
/// `w_range`.
pub fn random_symmetric_config<R: Rng + ?Sized>(
    rng: &mut R,
    min_size: f64,
    w_range: (f64, f64),
) -> MarketConfig {
    let side = rng.gen_range(min_size..(1.0 - min_size) / 2.0);
    let w = rng.gen_range(w_range.0..=w_range.1);
    MarketConfig::new(side, 1.0 - 2.0 * side, side, w).expect("sizes lie on the unit simplex")
}

/// Market with sizes drawn uniformly from the simplex (conditioned on each
/// being at least `min_size`) and `W` uniform in `w_range`.
pub fn random_config<R: Rng + ?Sized>(
    rng: &mut R,
    min_size: f64,
    w_range: (f64, f64),
) -> MarketConfig {
    loop {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let (m_a, m_b) = (lo, 1.0 - hi);
        let m_ab = 1.0 - m_a - m_b;
        if m_a >= min_size && m_ab >= min_size && m_b >= min_size {
            let w = rng.gen_range(w_range.0..=w_range.1);
            return MarketConfig::new(m_a, m_ab, m_b, w).expect("sizes lie on the unit simplex");
        }
    }
}

/// Profile in which `sp` serves the overlap but not its dedicated market.
pub fn crowded_boundary<R: Rng + ?Sized>(cfg: &MarketConfig, sp: Sp, rng: &mut R) -> Allocation {
    let own_overlap = cfg.m_ab() * (0.01 + 0.99 * rng.gen::<f64>());
    let opp_overlap = (cfg.m_ab() - own_overlap) * rng.gen::<f64>();
    let opp_dedicated = cfg.dedicated_size(sp.other()) * rng.gen::<f64>();
    Allocation::ZERO
        .with_own(sp, 0.0, own_overlap)
        .with_own(sp.other(), opp_dedicated, opp_overlap)
}

/// Profile in which `sp` serves nobody.
pub fn idle_boundary<R: Rng + ?Sized>(cfg: &MarketConfig, sp: Sp, rng: &mut R) -> Allocation {
    let opp_overlap = cfg.m_ab() * rng.gen::<f64>();
    let opp_dedicated = cfg.dedicated_size(sp.other()) * rng.gen::<f64>();
    Allocation::ZERO.with_own(sp.other(), opp_dedicated, opp_overlap)
}
