//! The exact potential of the game and its quadratic-form representation.
//!
//! A unilateral change of either provider's quantities moves the potential by
//! exactly the deviating provider's revenue change, so maximizing the
//! potential over the feasible set yields Nash equilibria. When the
//! coefficient matrix is positive definite the potential is strictly concave
//! and the equilibrium is unique.

use crate::error::{Error, Result};
use crate::model::{self, Allocation, MarketConfig, Sp};

/// Pivot threshold of the positive-definiteness test.
pub const PD_PIVOT_TOL: f64 = 1e-12;

/// Coefficient matrix `A` of `Φ(x) = -xᵀAx + 1ᵀx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialForm {
    pub matrix: [[f64; 4]; 4],
}

impl PotentialForm {
    /// Variable order of the rows and columns.
    pub const ORDERING: [&'static str; 4] = ["x1_a", "x1_ab", "x2_ab", "x2_b"];

    pub fn quadratic(&self, x: &[f64; 4]) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                acc += x[i] * a * x[j];
            }
        }
        acc
    }

    /// `-xᵀAx + 1ᵀx`.
    pub fn evaluate(&self, x: &[f64; 4]) -> f64 {
        -self.quadratic(x) + x.iter().sum::<f64>()
    }

    /// Largest `|A[i][j] - A[j][i]|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.matrix[i][j] - self.matrix[j][i]).abs());
            }
        }
        worst
    }

    /// Pivots of the `LDLᵀ` factorization. Each pivot is the ratio of
    /// consecutive leading principal minors; stops at the first pivot that is
    /// not above [`PD_PIVOT_TOL`].
    pub fn pivots(&self) -> Vec<f64> {
        let a = &self.matrix;
        let mut l = [[0.0_f64; 4]; 4];
        let mut d = [0.0_f64; 4];
        let mut out = Vec::with_capacity(4);
        for j in 0..4 {
            let mut dj = a[j][j];
            for k in 0..j {
                dj -= l[j][k] * l[j][k] * d[k];
            }
            d[j] = dj;
            out.push(dj);
            if dj <= PD_PIVOT_TOL {
                break;
            }
            l[j][j] = 1.0;
            for i in (j + 1)..4 {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k] * d[k];
                }
                l[i][j] = s / dj;
            }
        }
        out
    }

    /// Leading principal minors, computed as running products of the pivots.
    pub fn leading_minors(&self) -> Vec<f64> {
        let mut prod = 1.0;
        self.pivots()
            .into_iter()
            .map(|p| {
                prod *= p;
                prod
            })
            .collect()
    }
}

/// Builds `A` for `cfg`. Requires every sub-market to have positive size.
pub fn build_matrix(cfg: &MarketConfig) -> Result<PotentialForm> {
    if !cfg.is_nondegenerate() {
        return Err(Error::Config(format!(
            "the potential form needs positive sub-market sizes, got ({}, {}, {})",
            cfg.m_a(),
            cfg.m_ab(),
            cfg.m_b()
        )));
    }
    let iw = 1.0 / cfg.w();
    let ia = 1.0 / cfg.m_a();
    let iab = 1.0 / cfg.m_ab();
    let ib = 1.0 / cfg.m_b();
    let coupling = 0.5 * iab + 0.5 * iw;
    Ok(PotentialForm {
        matrix: [
            [ia + iw, iw, 0.5 * iw, 0.0],
            [iw, iab + iw, coupling, 0.5 * iw],
            [0.5 * iw, coupling, iab + iw, iw],
            [0.0, 0.5 * iw, iw, ib + iw],
        ],
    })
}

/// `Φ(x)` via the quadratic form. Defined off the feasible set as well.
pub fn potential_value(alloc: &Allocation, cfg: &MarketConfig) -> Result<f64> {
    Ok(build_matrix(cfg)?.evaluate(&alloc.to_array()))
}

/// `Φ(x)` expanded term by term, independent of [`build_matrix`].
pub fn potential_expanded(alloc: &Allocation, cfg: &MarketConfig) -> Result<f64> {
    if !cfg.is_nondegenerate() {
        return Err(Error::Config(
            "the potential needs positive sub-market sizes".into(),
        ));
    }
    let Allocation {
        x1_a,
        x1_ab,
        x2_ab,
        x2_b,
    } = *alloc;
    let (m_a, m_ab, m_b, w) = (cfg.m_a(), cfg.m_ab(), cfg.m_b(), cfg.w());
    let bracket = (1.0 / m_a + 1.0 / w) * x1_a * x1_a
        + (1.0 / m_ab + 1.0 / w) * x1_ab * x1_ab
        + (1.0 / m_ab + 1.0 / w) * x2_ab * x2_ab
        + (1.0 / m_b + 1.0 / w) * x2_b * x2_b
        + (1.0 / m_ab + 1.0 / w) * x1_ab * x2_ab
        + (2.0 / w) * x1_a * x1_ab
        + (1.0 / w) * x1_a * x2_ab
        + (1.0 / w) * x2_b * x1_ab
        + (2.0 / w) * x2_b * x2_ab;
    Ok(-bracket + x1_a + x2_b + x1_ab + x2_ab)
}

/// True iff every leading principal minor of `A` is positive, tested through
/// the `LDLᵀ` pivots with threshold [`PD_PIVOT_TOL`].
pub fn is_positive_definite(form: &PotentialForm) -> bool {
    let pivots = form.pivots();
    pivots.len() == 4 && pivots.iter().all(|&p| p > PD_PIVOT_TOL)
}

/// `|[Φ(x') - Φ(x)] - [R_sp(x') - R_sp(x)]|` for a unilateral deviation `x'`
/// of `which`.
pub fn potential_identity_check(
    alloc: &Allocation,
    deviation: &Allocation,
    which: Sp,
    cfg: &MarketConfig,
) -> Result<f64> {
    let untouched = match which {
        Sp::One => alloc.x2_ab == deviation.x2_ab && alloc.x2_b == deviation.x2_b,
        Sp::Two => alloc.x1_a == deviation.x1_a && alloc.x1_ab == deviation.x1_ab,
    };
    if !untouched {
        return Err(Error::Usage(format!(
            "deviation must change only {which}'s quantities"
        )));
    }
    let form = build_matrix(cfg)?;
    let d_phi = form.evaluate(&deviation.to_array()) - form.evaluate(&alloc.to_array());
    let d_rev = model::revenue_unchecked(deviation, which, cfg)
        - model::revenue_unchecked(alloc, which, cfg);
    Ok((d_phi - d_rev).abs())
}
