//! Bandwidth sweeps, entry-threshold detection and competition-versus-
//! cooperation comparisons.

use rayon::prelude::*;

use crate::equilibrium::{self, EquilibriumResult};
use crate::error::{Error, Result};
use crate::model::{MarketConfig, MarketOutcome, Sp};

/// Overlap quantity above which a provider counts as having entered.
pub const ENTRY_TOL: f64 = 1e-10;
/// Width of the final bisection bracket around an entry threshold.
pub const THRESHOLD_BRACKET: f64 = 1e-6;
/// Differences at or below this are not treated as decreases or wins.
pub const NOISE_FLOOR: f64 = 1e-12;
pub const MAX_GRID_STEPS: f64 = 1e6;

/// Grid values are snapped to this decimal resolution so that e.g. the
/// eleventh point of `0.01, 0.02, ...` is exactly `0.11`.
const GRID_DECIMALS: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// Sub-market sizes; the bandwidth of this config is ignored.
    pub cfg_base: MarketConfig,
    pub w_min: f64,
    pub w_max: f64,
    pub w_step: f64,
    pub include_cooperation: bool,
}

impl SweepSpec {
    pub fn new(
        cfg_base: MarketConfig,
        w_min: f64,
        w_max: f64,
        w_step: f64,
        include_cooperation: bool,
    ) -> Result<Self> {
        let invalid = |field: &str, message: String| {
            Err(Error::Validation {
                field: field.into(),
                message,
            })
        };
        if !(w_min.is_finite() && w_min > 0.0) {
            return invalid("w_min", format!("must be positive, got {w_min}"));
        }
        if !(w_max.is_finite() && w_max >= w_min) {
            return invalid(
                "w_max",
                format!("must be at least w_min = {w_min}, got {w_max}"),
            );
        }
        if !(w_step.is_finite() && w_step > 0.0) {
            return invalid("w_step", format!("must be positive, got {w_step}"));
        }
        if w_max > w_min && w_step < 1e-10 {
            return invalid(
                "w_step",
                format!("below the grid resolution 1e-10: {w_step}"),
            );
        }
        if (w_max - w_min) / w_step > MAX_GRID_STEPS {
            return invalid(
                "w_step",
                format!("grid would exceed {MAX_GRID_STEPS} steps"),
            );
        }
        Ok(SweepSpec {
            cfg_base,
            w_min,
            w_max,
            w_step,
            include_cooperation,
        })
    }

    /// The default grid `W = 0.01, 0.02, ..., 1.00`.
    pub fn default_grid(cfg_base: MarketConfig, include_cooperation: bool) -> Self {
        SweepSpec::new(cfg_base, 0.01, 1.0, 0.01, include_cooperation)
            .expect("default grid is valid")
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.w_max - self.w_min) / self.w_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let w = self.w_min + i as f64 * self.w_step;
                (w * GRID_DECIMALS).round() / GRID_DECIMALS
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub w: f64,
    pub competition: EquilibriumResult,
    pub cooperation: Option<EquilibriumResult>,
}

/// Bandwidth at which `sp` starts serving the overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub sp: Sp,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub thresholds: Vec<Threshold>,
}

impl SweepTable {
    /// First detected entry bandwidth of `sp`.
    pub fn threshold(&self, sp: Sp) -> Option<f64> {
        self.thresholds.iter().find(|t| t.sp == sp).map(|t| t.w)
    }
}

fn enters(result: &EquilibriumResult, sp: Sp) -> bool {
    result.alloc.own(sp).1 > ENTRY_TOL
}

fn solve_at(cfg_base: &MarketConfig, w: f64) -> Result<EquilibriumResult> {
    let cfg = cfg_base.with_bandwidth(w)?;
    equilibrium::solve_numeric(&cfg).map_err(|e| Error::SweepRow {
        w,
        source: Box::new(e),
    })
}

/// Bisects the entry indicator of `sp` on `[lo, hi]` (out at `lo`, in at
/// `hi`) down to [`THRESHOLD_BRACKET`] and returns the bracket midpoint.
pub fn bisect_threshold(cfg_base: &MarketConfig, sp: Sp, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > THRESHOLD_BRACKET {
        let mid = 0.5 * (lo + hi);
        if enters(&solve_at(cfg_base, mid)?, sp) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves every grid point (in parallel), then locates entry thresholds
/// between adjacent rows.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let rows = spec
        .grid()
        .into_par_iter()
        .map(|w| {
            let competition = solve_at(&spec.cfg_base, w)?;
            let cooperation = if spec.include_cooperation {
                Some(equilibrium::solve_cooperation(&competition.cfg)?)
            } else {
                None
            };
            Ok(SweepRow {
                w,
                competition,
                cooperation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut thresholds = Vec::new();
    for sp in [Sp::One, Sp::Two] {
        for pair in rows.windows(2) {
            if !enters(&pair[0].competition, sp) && enters(&pair[1].competition, sp) {
                thresholds.push(Threshold {
                    sp,
                    w: bisect_threshold(&spec.cfg_base, sp, pair[0].w, pair[1].w)?,
                });
            }
        }
    }
    Ok(SweepTable { rows, thresholds })
}

/// Closed interval of grid bandwidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WInterval {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RevenueTotal,
    CsTotal,
    Welfare,
    R1,
    R2,
}

impl Metric {
    pub fn of(&self, o: &MarketOutcome) -> f64 {
        match self {
            Metric::RevenueTotal => o.r1 + o.r2,
            Metric::CsTotal => o.cs_total,
            Metric::Welfare => o.welfare,
            Metric::R1 => o.r1,
            Metric::R2 => o.r2,
        }
    }
}

/// Maximal runs of consecutive points over which the value strictly
/// decreases by more than [`NOISE_FLOOR`]. Each interval spans from the first
/// point of its run to the last.
pub fn decreasing_intervals(points: &[(f64, f64)]) -> Vec<WInterval> {
    let mut out: Vec<WInterval> = Vec::new();
    let mut open: Option<WInterval> = None;
    for pair in points.windows(2) {
        let ((w0, v0), (w1, v1)) = (pair[0], pair[1]);
        if v1 < v0 - NOISE_FLOOR {
            match open.as_mut() {
                Some(iv) => iv.end = w1,
                None => open = Some(WInterval { start: w0, end: w1 }),
            }
        } else if let Some(iv) = open.take() {
            out.push(iv);
        }
    }
    out.extend(open);
    out
}

/// Decreasing stretches of `metric` along the competition equilibria.
pub fn monotonicity_report(table: &SweepTable, metric: Metric) -> Vec<WInterval> {
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.w, metric.of(&r.competition.outcome)))
        .collect();
    decreasing_intervals(&points)
}

/// Maximal runs of grid points where `flag` holds.
fn runs(ws: &[f64], flags: &[bool]) -> Vec<WInterval> {
    let mut out = Vec::new();
    let mut open: Option<WInterval> = None;
    for (&w, &f) in ws.iter().zip(flags) {
        if f {
            match open.as_mut() {
                Some(iv) => iv.end = w,
                None => open = Some(WInterval { start: w, end: w }),
            }
        } else if let Some(iv) = open.take() {
            out.push(iv);
        }
    }
    out.extend(open);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMetrics {
    pub r1: f64,
    pub r2: f64,
    pub revenue_total: f64,
    pub cs_total: f64,
    pub welfare: f64,
}

impl From<&MarketOutcome> for ModeMetrics {
    fn from(o: &MarketOutcome) -> Self {
        ModeMetrics {
            r1: o.r1,
            r2: o.r2,
            revenue_total: o.r1 + o.r2,
            cs_total: o.cs_total,
            welfare: o.welfare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub w: f64,
    pub competition: ModeMetrics,
    pub cooperation: ModeMetrics,
}

/// Where cooperation beats competition (strictly, beyond [`NOISE_FLOOR`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Both providers earn more under cooperation.
    pub both_revenues: Vec<WInterval>,
    pub total_revenue: Vec<WInterval>,
    pub cs_total: Vec<WInterval>,
    pub welfare: Vec<WInterval>,
    /// r1, r2 and total consumer surplus are all higher under cooperation.
    pub revenues_and_cs: Vec<WInterval>,
    /// Competition yields strictly more total consumer surplus.
    pub competition_cs_wins: Vec<WInterval>,
}

/// Compares every row against its cooperation counterpart, computing the
/// counterpart when the table was built without it.
pub fn compare_cooperation(table: &SweepTable) -> ComparisonReport {
    let rows: Vec<ComparisonRow> = table
        .rows
        .iter()
        .map(|r| {
            let coop = r.cooperation.unwrap_or_else(|| {
                equilibrium::solve_cooperation(&r.competition.cfg)
                    .expect("cooperation profile is feasible for any valid market")
            });
            ComparisonRow {
                w: r.w,
                competition: (&r.competition.outcome).into(),
                cooperation: (&coop.outcome).into(),
            }
        })
        .collect();

    let beats = |a: f64, b: f64| a > b + NOISE_FLOOR;
    let ws: Vec<f64> = rows.iter().map(|r| r.w).collect();
    let flags = |f: &dyn Fn(&ModeMetrics, &ModeMetrics) -> bool| -> Vec<bool> {
        rows.iter()
            .map(|r| f(&r.cooperation, &r.competition))
            .collect()
    };

    let both_revenues = runs(
        &ws,
        &flags(&|co, cm| beats(co.r1, cm.r1) && beats(co.r2, cm.r2)),
    );
    let total_revenue = runs(
        &ws,
        &flags(&|co, cm| beats(co.revenue_total, cm.revenue_total)),
    );
    let cs_total = runs(&ws, &flags(&|co, cm| beats(co.cs_total, cm.cs_total)));
    let welfare = runs(&ws, &flags(&|co, cm| beats(co.welfare, cm.welfare)));
    let revenues_and_cs = runs(
        &ws,
        &flags(&|co, cm| {
            beats(co.r1, cm.r1) && beats(co.r2, cm.r2) && beats(co.cs_total, cm.cs_total)
        }),
    );
    let competition_cs_wins = runs(&ws, &flags(&|co, cm| beats(cm.cs_total, co.cs_total)));

    ComparisonReport {
        rows,
        both_revenues,
        total_revenue,
        cs_total,
        welfare,
        revenues_and_cs,
        competition_cs_wins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(m_a: f64, m_ab: f64, m_b: f64) -> MarketConfig {
        MarketConfig::new(m_a, m_ab, m_b, 1.0).unwrap()
    }

    #[test]
    fn spec_validation() {
        let c = sizes(0.4, 0.2, 0.4);
        assert!(SweepSpec::new(c, 0.5, 0.4, 0.01, false).is_err());
        assert!(SweepSpec::new(c, 0.0, 0.4, 0.01, false).is_err());
        assert!(SweepSpec::new(c, 0.1, 0.4, 0.0, false).is_err());
        assert!(SweepSpec::new(c, 0.1, 2.0e6, 1.0, false).is_err());
        assert!(SweepSpec::new(c, 0.1, 0.1, 1.0, false).is_ok());
    }

    #[test]
    fn grid_is_snapped() {
        let g = SweepSpec::default_grid(sizes(0.4, 0.2, 0.4), false).grid();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[10], 0.11);
        assert_eq!(g[99], 1.0);
        assert!(g.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn zero_length_grid_gives_one_row() {
        let spec = SweepSpec::new(sizes(0.4, 0.2, 0.4), 0.3, 0.3, 0.01, true).unwrap();
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].cooperation.is_some());
    }

    #[test]
    fn constant_series_has_no_decrease() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0)).collect();
        assert!(decreasing_intervals(&pts).is_empty());
    }

    #[test]
    fn decreasing_runs_are_maximal() {
        let pts = [
            (1.0, 1.0),
            (2.0, 0.5),
            (3.0, 0.2),
            (4.0, 0.3),
            (5.0, 0.1),
            (6.0, 0.1 - 1e-13),
        ];
        assert_eq!(
            decreasing_intervals(&pts),
            vec![
                WInterval {
                    start: 1.0,
                    end: 3.0
                },
                WInterval {
                    start: 4.0,
                    end: 5.0
                }
            ]
        );
    }

    #[test]
    fn symmetric_thresholds() {
        let spec = SweepSpec::new(sizes(0.4, 0.2, 0.4), 0.05, 0.5, 0.05, false).unwrap();
        let t = sweep(&spec).unwrap();
        for sp in [Sp::One, Sp::Two] {
            let w = t.threshold(sp).unwrap();
            assert!((w - 0.2).abs() <= 1e-6, "{sp}: {w}");
        }
    }

    #[test]
    fn below_threshold_competition_equals_cooperation() {
        let spec = SweepSpec::new(sizes(0.2, 0.6, 0.2), 0.01, 0.09, 0.01, true).unwrap();
        let t = sweep(&spec).unwrap();
        for r in &t.rows {
            let coop = r.cooperation.unwrap();
            assert!(r.competition.alloc.distance(&coop.alloc) <= 1e-10);
        }
        let report = compare_cooperation(&t);
        assert!(report.both_revenues.is_empty());
        assert!(report.cs_total.is_empty());
    }
}
