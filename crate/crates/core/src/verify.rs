//! Property suites run by the `verify` subcommand against one scenario's
//! market sizes and bandwidth grid.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{self, lemma_deviation, BestResponseDynamics, Lemma, NASH_TOL};
use crate::error::Result;
use crate::model::{MarketConfig, Sp};
use crate::potential::{self, build_matrix, is_positive_definite};
use crate::sampling;
use crate::scenario::ScenarioFile;

pub const IDENTITY_SAMPLES: usize = 1000;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const LEMMA_SAMPLES: usize = 100;
pub const UNIQUENESS_STARTS: usize = 50;
pub const UNIQUENESS_SPREAD: f64 = 1e-7;
pub const UNIQUENESS_BANDWIDTHS: usize = 5;
pub const CLOSED_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            failed
        ));
        out
    }
}

/// Runs every suite on the scenario. Deterministic for a given `seed`.
pub fn run_suite(scenario: &ScenarioFile, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = scenario.sizes()?;
    let grid = scenario.sweep_spec()?.grid();
    let configs: Vec<MarketConfig> = grid
        .iter()
        .map(|&w| sizes.with_bandwidth(w))
        .collect::<Result<_>>()?;
    let mut report = VerifyReport::default();

    if !sizes.is_nondegenerate() {
        report.push(
            "potential-identity",
            true,
            "skipped: a sub-market is empty, the potential needs positive sizes".into(),
        );
    } else {
        potential_suites(&mut report, &configs, &mut rng)?;
        lemma_suites(&mut report, &configs, &mut rng)?;
    }
    uniqueness_suite(&mut report, &configs, &mut rng)?;
    if sizes.is_symmetric() {
        closed_form_suite(&mut report, &configs)?;
    }
    Ok(report)
}

fn potential_suites(
    report: &mut VerifyReport,
    configs: &[MarketConfig],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut worst = 0.0_f64;
    for _ in 0..IDENTITY_SAMPLES {
        let cfg = configs.choose(rng).expect("grid is non-empty");
        let x = sampling::random_allocation(cfg, rng);
        let sp = if rng.gen::<bool>() { Sp::One } else { Sp::Two };
        let y = sampling::random_deviation(&x, sp, cfg, rng);
        worst = worst.max(potential::potential_identity_check(&x, &y, sp, cfg)?);
    }
    report.push(
        "potential-identity",
        worst <= IDENTITY_TOL,
        format!("{IDENTITY_SAMPLES} unilateral deviations, max |dPhi - dR| = {worst:e}"),
    );

    // Positive definiteness is only claimed for symmetric markets with
    // W >= m_a / 2; elsewhere the status is reported.
    let mut claimed = (0, 0);
    let mut other = (0, 0);
    for cfg in configs {
        let pd = is_positive_definite(&build_matrix(cfg)?);
        let bucket = if cfg.is_symmetric() && cfg.w() >= cfg.m_a() / 2.0 {
            &mut claimed
        } else {
            &mut other
        };
        bucket.0 += pd as usize;
        bucket.1 += 1;
    }
    report.push(
        "positive-definite",
        claimed.0 == claimed.1,
        format!(
            "PD at {}/{} bandwidths where guaranteed; {}/{} elsewhere (reported only)",
            claimed.0, claimed.1, other.0, other.1
        ),
    );

    let mut worst_drop = 0.0_f64;
    for cfg in configs {
        let run =
            BestResponseDynamics::new(*cfg).run_from(&sampling::random_allocation(cfg, rng))?;
        worst_drop = worst_drop.max(run.potential_drop.unwrap_or(0.0));
    }
    report.push(
        "potential-ascent",
        worst_drop <= IDENTITY_TOL,
        format!("largest potential decrease along best-response steps: {worst_drop:e}"),
    );
    Ok(())
}

fn lemma_suites(
    report: &mut VerifyReport,
    configs: &[MarketConfig],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    type Sampler = fn(&MarketConfig, Sp, &mut ChaCha8Rng) -> crate::model::Allocation;
    let patterns: [(&'static str, Lemma, Sampler); 2] = [
        (
            "lemma-crowded-over-dedicated",
            Lemma::CrowdedOverDedicated,
            sampling::crowded_boundary,
        ),
        (
            "lemma-squeezed-out",
            Lemma::SqueezedOutEntirely,
            sampling::idle_boundary,
        ),
    ];
    for (name, lemma, sample) in patterns {
        let mut profitable = 0;
        let mut min_gain = f64::INFINITY;
        for i in 0..LEMMA_SAMPLES {
            let cfg = configs.choose(rng).expect("grid is non-empty");
            let sp = if i % 2 == 0 { Sp::One } else { Sp::Two };
            let x = sample(cfg, sp, rng);
            let finding = lemma_deviation(&x, cfg)?;
            if let Some(d) = finding.deviation.filter(|_| finding.lemma == lemma) {
                if d.gain > 0.0 {
                    profitable += 1;
                    min_gain = min_gain.min(d.gain);
                }
            }
        }
        report.push(
            name,
            profitable == LEMMA_SAMPLES,
            format!("{profitable}/{LEMMA_SAMPLES} boundary profiles have a profitable deviation (min gain {min_gain:e})"),
        );
    }

    // The overlap-squeeze face has no feasible stationary point for symmetric
    // markets with W < m_a / 2.
    let mut claimed = (0, 0);
    let mut other = (0, 0);
    for cfg in configs {
        let x =
            crate::model::Allocation::new(cfg.m_a() / 4.0, 0.0, cfg.m_ab() / 4.0, cfg.m_b() / 4.0);
        let Some(foc) = lemma_deviation(&x, cfg)?.first_order else {
            continue;
        };
        let bucket = if cfg.is_symmetric() && cfg.w() < cfg.m_a() / 2.0 {
            &mut claimed
        } else {
            &mut other
        };
        bucket.0 += foc.is_infeasible() as usize;
        bucket.1 += 1;
    }
    report.push(
        "lemma-overlap-squeeze",
        claimed.0 == claimed.1,
        format!(
            "stationary point infeasible at {}/{} bandwidths where guaranteed; {}/{} elsewhere (reported only)",
            claimed.0, claimed.1, other.0, other.1
        ),
    );
    Ok(())
}

fn uniqueness_suite(
    report: &mut VerifyReport,
    configs: &[MarketConfig],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let stride = (configs.len() / UNIQUENESS_BANDWIDTHS).max(1);
    let mut spread = 0.0_f64;
    let mut residual = 0.0_f64;
    let mut probed = 0;
    for cfg in configs.iter().step_by(stride).take(UNIQUENESS_BANDWIDTHS) {
        let starts: Vec<_> = (0..UNIQUENESS_STARTS)
            .map(|_| sampling::random_allocation(cfg, rng))
            .collect();
        let r = equilibrium::multi_start(cfg, &starts)?;
        spread = spread.max(r.max_spread);
        residual = residual.max(r.max_residual);
        probed += 1;
    }
    report.push(
        "uniqueness-probe",
        spread <= UNIQUENESS_SPREAD && residual <= NASH_TOL,
        format!(
            "{probed} bandwidths x {UNIQUENESS_STARTS} starts: spread {spread:e}, residual {residual:e}"
        ),
    );
    Ok(())
}

fn closed_form_suite(report: &mut VerifyReport, configs: &[MarketConfig]) -> Result<()> {
    let mut worst = 0.0_f64;
    for cfg in configs {
        let num = equilibrium::solve_numeric(cfg)?;
        let cf = equilibrium::closed_form_symmetric(cfg)?;
        worst = worst.max(num.alloc.distance(&cf.alloc));
    }
    report.push(
        "closed-form-agreement",
        worst <= CLOSED_FORM_TOL,
        format!("{} bandwidths, max deviation {worst:e}", configs.len()),
    );
    Ok(())
}
