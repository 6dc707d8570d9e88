//! Numerical experiments comparing rank-truncated CUR with SVD truncation.
//!
//! A test problem is a rank-`r` matrix `M = UΣVᵀ` with orthonormalised
//! Gaussian factors and singular values `σ_i = 10^{-(i-1)/4}`, sampled on
//! the `s` rows and `c` columns of largest leverage score. Every experiment
//! fixes one unit perturbation `E` and sweeps `A_ε = M + εE`, recording
//!
//! * `err_cur = ‖Φ_r(A_ε) − M‖_F` and `pred_cur = ε‖I(E)‖_F`
//! * `err_svd = ‖(A_ε)_r − M‖_F` and `pred_svd = ε‖P_T(E)‖_F`

mod csv_io;
mod svg;

use std::path::PathBuf;

pub(crate) use csv_io::write_records;
pub use csv_io::{read_csv, write_csv, CSV_HEADER};
pub use svg::{render_svg_loglog, write_svg_loglog, Field, LogLogFrame, SeriesSpec, XAxis};

use crate::calculus::{self, DEFAULT_C};
use crate::cur;
use crate::dense::{self, CompactSvd, DenseMatrix};
use crate::error::{invalid, Error, Result};
use crate::perturb;
use crate::sampling::{self, SelectionPair, DEFAULT_ADMISSIBILITY_TOL};
use crate::tangent::{self, TangentPoint};

/// Seed offset of the right factor relative to the left factor.
pub const RIGHT_FACTOR_SEED_OFFSET: u64 = 1;
/// Seed offset of the perturbation draw relative to the configured seed.
pub const PERTURBATION_SEED_OFFSET: u64 = 100;
/// Seed stride between construction attempts.
pub const RETRY_SEED_STRIDE: u64 = 2;
/// Number of construction attempts before giving up.
pub const MAX_ATTEMPTS: u64 = 16;

/// Problem size, seed and sweep grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    /// Number of sampled rows.
    pub rows: usize,
    /// Number of sampled columns.
    pub cols: usize,
    pub seed: u64,
    pub eps_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// Perturbation sizes of the visibility sweep.
    pub eps_fixed: Vec<f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 80,
            n: 70,
            rank: 5,
            rows: 10,
            cols: 10,
            seed: 1,
            eps_grid: log_grid(1e-8, 1e-1, 2).expect("static grid"),
            alpha_grid: log_grid(1e-3, 1e1, 5).expect("static grid"),
            eps_fixed: vec![1e-6, 1e-5, 1e-4],
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    /// Default configuration with a different seed.
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let budget = self.rows.min(self.cols);
        if self.rank == 0 || self.rank > budget || budget > self.m.min(self.n) {
            return Err(invalid(format!(
                "need 1 ≤ rank ≤ min(rows, cols) ≤ min(m, n), got rank={} rows={} cols={} m={} n={}",
                self.rank, self.rows, self.cols, self.m, self.n
            )));
        }
        for (name, grid) in [("eps_grid", &self.eps_grid), ("alpha_grid", &self.alpha_grid), ("eps_fixed", &self.eps_fixed)] {
            if grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(invalid(format!("{name} must be strictly positive")));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(format!("{name} must be sorted strictly ascending")));
            }
        }
        Ok(())
    }

    /// `σ_i = 10^{-(i-1)/4}` for `i = 1..=rank`.
    pub fn singular_values(&self) -> Vec<f64> {
        (0..self.rank).map(|i| 10f64.powf(-(i as f64) / 4.0)).collect()
    }
}

/// `10^{k/per_decade}` for every integer `k` between `min` and `max` on that lattice.
pub fn log_grid(min: f64, max: f64, per_decade: u32) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || per_decade == 0 {
        return Err(invalid(format!("bad grid: min={min} max={max} per_decade={per_decade}")));
    }
    let pd = f64::from(per_decade);
    let start = (min.log10() * pd).round() as i64;
    let end = (max.log10() * pd).round() as i64;
    Ok((start..=end).map(|k| pow10(k, per_decade)).collect())
}

/// `10^{k/per_decade}`, exact for integer exponents.
fn pow10(k: i64, per_decade: u32) -> f64 {
    let pd = i64::from(per_decade);
    if k % pd == 0 {
        let e = (k / pd) as i32;
        if e >= 0 {
            10f64.powi(e)
        } else {
            1.0 / 10f64.powi(-e)
        }
    } else {
        10f64.powf(k as f64 / pd as f64)
    }
}

/// An admissible base point built from a seed.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub svd: CompactSvd,
    pub sel: SelectionPair,
    pub tangent: TangentPoint,
    /// Seed of the left factor in the successful attempt.
    pub seed_used: u64,
}

impl TestProblem {
    pub fn base(&self) -> &DenseMatrix {
        self.tangent.base()
    }

    /// `1e3 · 2⁻⁵² · ‖M‖_F`; differences below this are rounding noise.
    pub fn rounding_floor(&self) -> f64 {
        rounding_floor(dense::fro_norm(self.base()))
    }
}

pub fn rounding_floor(base_norm: f64) -> f64 {
    1e3 * f64::EPSILON * base_norm
}

/// Builds `M` and its leverage-score selection, retrying with seeds
/// `seed, seed + 2, …` until the selection is admissible.
pub fn build_test_problem(cfg: &ExperimentConfig) -> Result<TestProblem> {
    cfg.validate()?;
    let sigmas = cfg.singular_values();
    let mut tried = Vec::new();
    for attempt in 0..MAX_ATTEMPTS {
        let seed = cfg.seed.wrapping_add(attempt * RETRY_SEED_STRIDE);
        tried.push(seed);
        let u = dense::orthonormalize_gaussian(cfg.m, cfg.rank, seed)?;
        let v = dense::orthonormalize_gaussian(cfg.n, cfg.rank, seed.wrapping_add(RIGHT_FACTOR_SEED_OFFSET))?;
        let rows = sampling::top_k_selection(&sampling::leverage_scores(&u)?, cfg.rows)?;
        let cols = sampling::top_k_selection(&sampling::leverage_scores(&v)?, cfg.cols)?;
        let svd = CompactSvd::new(u, sigmas.clone(), v)?;
        let sel = SelectionPair::new(rows, cols, cfg.m, cfg.n)?;
        if sampling::is_admissible(&svd, &sel, DEFAULT_ADMISSIBILITY_TOL)? {
            let tangent = tangent::make_tangent_point(&svd, &sel)?;
            return Ok(TestProblem { svd, sel, tangent, seed_used: seed });
        }
        log::warn!("seed {seed}: leverage-score selection is not admissible, retrying");
    }
    Err(Error::Construction { seeds: tried })
}

/// One row of experiment output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRecord {
    pub epsilon: f64,
    /// Visibility parameter; only set by the visibility sweep.
    pub alpha: Option<f64>,
    pub err_cur: f64,
    pub err_svd: f64,
    pub pred_cur: f64,
    pub pred_svd: f64,
}

/// A record plus whether each map was inside its local hypothesis
/// (`ε‖SᵀEP‖₂ ≤ 0.2 σ_r(SᵀMP)` for CUR, `ε‖E‖₂ ≤ 0.2 σ_r(M)` for SVD).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub record: ExperimentRecord,
    pub cur_local: bool,
    pub svd_local: bool,
}

/// Output of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub points: Vec<SweepPoint>,
    /// `‖M‖_F`
    pub base_norm: f64,
}

impl ExperimentRun {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        self.points.iter().map(|p| p.record).collect()
    }

    pub fn rounding_floor(&self) -> f64 {
        rounding_floor(self.base_norm)
    }
}

/// Which structured family to sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredFamily {
    Invisible,
    Normal,
}

fn sweep(problem: &TestProblem, e: &DenseMatrix, eps: &[f64], alpha: Option<f64>) -> Result<Vec<SweepPoint>> {
    let m = problem.base();
    let r = problem.svd.rank();
    let cur_unit = dense::fro_norm(&tangent::oblique_tangent_project(&problem.tangent, e)?);
    let svd_unit = dense::fro_norm(&tangent::orthogonal_tangent_project(&problem.svd, e)?);
    let cur_ratio = calculus::cur_hypothesis_ratio(&problem.tangent, e)?;
    let svd_ratio = calculus::svd_hypothesis_ratio(&problem.svd, e)?;
    eps.iter()
        .map(|&epsilon| {
            let a = m + e * epsilon;
            let err_cur = dense::fro_norm(&(cur::cur_rank_truncated(&a, &problem.sel, r)? - m));
            let err_svd = dense::fro_norm(&(dense::truncate_rank(&a, r)? - m));
            Ok(SweepPoint {
                record: ExperimentRecord {
                    epsilon,
                    alpha,
                    err_cur,
                    err_svd,
                    pred_cur: epsilon * cur_unit,
                    pred_svd: epsilon * svd_unit,
                },
                cur_local: epsilon * cur_ratio <= DEFAULT_C,
                svd_local: epsilon * svd_ratio <= DEFAULT_C,
            })
        })
        .collect()
}

fn finish(problem: &TestProblem, mut points: Vec<SweepPoint>) -> ExperimentRun {
    points.sort_by(|a, b| {
        a.record
            .epsilon
            .total_cmp(&b.record.epsilon)
            .then(a.record.alpha.unwrap_or(0.0).total_cmp(&b.record.alpha.unwrap_or(0.0)))
    });
    ExperimentRun { points, base_norm: dense::fro_norm(problem.base()) }
}

fn perturbation_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.wrapping_add(PERTURBATION_SEED_OFFSET)
}

/// Generic Gaussian perturbation over `eps_grid`.
pub fn run_generic_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let problem = build_test_problem(cfg)?;
    let e = perturb::generic_perturbation(cfg.m, cfg.n, perturbation_seed(cfg));
    let points = sweep(&problem, &e, &cfg.eps_grid, None)?;
    Ok(finish(&problem, points))
}

/// Sampling-invisible or orthogonal-normal perturbation over `eps_grid`.
pub fn run_structured_experiment(cfg: &ExperimentConfig, family: StructuredFamily) -> Result<ExperimentRun> {
    let problem = build_test_problem(cfg)?;
    let e = match family {
        StructuredFamily::Invisible => perturb::invisible_perturbation(&problem.sel, perturbation_seed(cfg))?,
        StructuredFamily::Normal => perturb::normal_perturbation(&problem.svd, perturbation_seed(cfg))?,
    };
    let points = sweep(&problem, &e, &cfg.eps_grid, None)?;
    Ok(finish(&problem, points))
}

/// Gradually visible perturbations: every `(ε, α)` in
/// `eps_fixed × alpha_grid`, one Gaussian draw shared across the α sweep.
pub fn run_visibility_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    if cfg.eps_fixed.is_empty() {
        return Err(invalid("eps_fixed must not be empty"));
    }
    let problem = build_test_problem(cfg)?;
    let mut points = Vec::with_capacity(cfg.alpha_grid.len() * cfg.eps_fixed.len());
    for &alpha in &cfg.alpha_grid {
        let e = perturb::visible_perturbation(&problem.sel, alpha, perturbation_seed(cfg))?;
        points.extend(sweep(&problem, &e, &cfg.eps_fixed, Some(alpha))?);
    }
    Ok(finish(&problem, points))
}

/// Least-squares slope of `log₁₀ y` against `log₁₀ x`. Needs at least two
/// points with distinct abscissae; non-positive values are skipped.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_match_protocol() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.eps_grid.len(), 15);
        assert_eq!(cfg.eps_grid[0], 1e-8);
        assert_eq!(*cfg.eps_grid.last().unwrap(), 1e-1);
        assert_eq!(cfg.alpha_grid.len(), 21);
        assert_eq!(cfg.alpha_grid[0], 1e-3);
        assert_eq!(*cfg.alpha_grid.last().unwrap(), 10.0);
        for (k, eps) in cfg.eps_grid.iter().enumerate() {
            let expect = 10f64.powf(-8.0 + 0.5 * k as f64);
            assert!((eps / expect - 1.0).abs() < 1e-14);
        }
        cfg.validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig { rank: 11, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.rank = 5;
        cfg.eps_grid = vec![1e-3, 1e-4];
        assert!(cfg.validate().is_err());
        cfg.eps_grid = vec![0.0, 1e-4];
        assert!(cfg.validate().is_err());
        assert!(log_grid(1.0, 0.1, 2).is_err());
        assert!(log_grid(1e-2, 1.0, 0).is_err());
        assert_eq!(log_grid(1.0, 1.0, 3).unwrap(), vec![1.0]);
    }

    #[test]
    fn singular_values_decay() {
        let s = ExperimentConfig::default().singular_values();
        assert_eq!(s.len(), 5);
        assert_eq!(s[0], 1.0);
        assert!((s[4] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn default_problem_is_admissible_and_deterministic() {
        let cfg = ExperimentConfig::default();
        let p = build_test_problem(&cfg).unwrap();
        let (l, r) = sampling::admissibility_margins(&p.svd, &p.sel).unwrap();
        assert!(l > 1e-8 && r > 1e-8);
        let w = sampling::intersection(p.base(), &p.sel).unwrap();
        let s = dense::singular_values(&w);
        assert!(s[4] > 1e-8 * s[0]);
        assert!(s[5] < 1e-12 * s[0]);
        let q = build_test_problem(&cfg).unwrap();
        assert_eq!(p.svd, q.svd);
        assert_eq!(p.sel, q.sel);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1e-3, 1e-2, 1e-1].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
        assert!(loglog_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }
}
