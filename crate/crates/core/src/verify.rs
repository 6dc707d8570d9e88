//! Monte Carlo property suites run by `curtangent verify`.
//!
//! Each suite draws independent instances from consecutive seeds and reports
//! one [`CheckOutcome`] per property, with the worst observed value.

use std::fmt;

use crate::calculus::{self, TruncatedMap, DEFAULT_C};
use crate::cur;
use crate::dense::{self, CompactSvd, DenseMatrix};
use crate::error::Result;
use crate::experiment::{self, build_test_problem, ExperimentConfig, TestProblem};
use crate::perturb;
use crate::sampling::{self, SelectionPair};
use crate::tangent;

/// Named group of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Projectors,
    Calculus,
    Bounds,
    All,
}

/// Result of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Sample counts per property.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub projector_instances: usize,
    pub comparison_instances: usize,
    pub derivative_instances: usize,
    pub consequence_instances: usize,
    pub expansion_instances: usize,
    pub exactness_instances: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            projector_instances: 100,
            comparison_instances: 200,
            derivative_instances: 50,
            consequence_instances: 100,
            expansion_instances: 500,
            exactness_instances: 100,
        }
    }
}

/// Tracks the worst ratio `value / limit` over many samples.
struct Worst {
    name: &'static str,
    limit_desc: String,
    worst: f64,
    failures: usize,
    samples: usize,
}

impl Worst {
    fn new(name: &'static str, limit_desc: impl Into<String>) -> Self {
        Self { name, limit_desc: limit_desc.into(), worst: f64::NEG_INFINITY, failures: 0, samples: 0 }
    }

    fn record(&mut self, value: f64, ok: bool) {
        self.samples += 1;
        if !ok || value.is_nan() {
            self.failures += 1;
        }
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.failures == 0 && self.samples > 0,
            detail: format!(
                "{} samples, {} failures, worst {:.3e} ({})",
                self.samples, self.failures, self.worst, self.limit_desc
            ),
        }
    }
}

fn instance(cfg: &ExperimentConfig, k: usize) -> Result<TestProblem> {
    // Construction retries use seed + 2j, so instances are spaced 64 apart.
    build_test_problem(&ExperimentConfig::with_seed(cfg.seed.wrapping_add(64 * k as u64)).sized_like(cfg))
}

impl ExperimentConfig {
    fn sized_like(mut self, other: &ExperimentConfig) -> Self {
        self.m = other.m;
        self.n = other.n;
        self.rank = other.rank;
        self.rows = other.rows;
        self.cols = other.cols;
        self
    }
}

fn tangent_vector(svd: &CompactSvd, seed: u64) -> DenseMatrix {
    let (m, n, r) = (svd.nrows(), svd.ncols(), svd.rank());
    svd.left() * dense::gaussian_matrix(r, n, seed) + dense::gaussian_matrix(m, r, seed.wrapping_add(1)) * svd.right().transpose()
}

/// Random rank-`r` `s×c` matrix with singular values in `[0.01, 1]`.
pub fn random_rank_r(s: usize, c: usize, r: usize, seed: u64) -> Result<CompactSvd> {
    let q = dense::orthonormalize_gaussian(s, r, seed)?;
    let z = dense::orthonormalize_gaussian(c, r, seed.wrapping_add(1))?;
    let g = dense::gaussian_matrix(1, r, seed.wrapping_add(2));
    let mut sig: Vec<f64> = g.iter().map(|x| 10f64.powf(-(x.abs().min(2.0)))).collect();
    sig.sort_by(|a, b| b.total_cmp(a));
    CompactSvd::new(q, sig, z)
}

/// Oblique tangent projector: idempotence, fixed points, range and kernel.
pub fn projector_checks(cfg: &ExperimentConfig, sizes: &SuiteSizes) -> Result<Vec<CheckOutcome>> {
    let mut idem = Worst::new("oblique projector idempotence", "‖I²E − IE‖_F/‖E‖_F ≤ 1e-10");
    let mut fixed = Worst::new("oblique projector fixes tangent vectors", "‖IZ − Z‖_F/‖Z‖_F ≤ 1e-10");
    let mut range = Worst::new("oblique projector range in tangent space", "‖P⊥(IE)‖_F/‖E‖_F ≤ 1e-10");
    let mut kernel = Worst::new("oblique projector kills invisible directions", "‖IE‖_F/‖E‖_F ≤ 1e-13");
    let mut full = Worst::new("full selection gives orthogonal projector", "‖IE − P_T E‖_F/‖E‖_F ≤ 1e-12");
    for k in 0..sizes.projector_instances {
        let p = instance(cfg, k)?;
        let seed = 1000 + k as u64;
        let e = dense::gaussian_matrix(cfg.m, cfg.n, seed);
        let en = dense::fro_norm(&e);
        let ie = tangent::oblique_tangent_project(&p.tangent, &e)?;
        let iie = tangent::oblique_tangent_project(&p.tangent, &ie)?;
        let v = dense::fro_norm(&(iie - &ie)) / en;
        idem.record(v, v <= 1e-10);
        let v = dense::fro_norm(&tangent::normal_project(&p.svd, &ie)?) / en;
        range.record(v, v <= 1e-10);

        let z = tangent_vector(&p.svd, seed.wrapping_add(7));
        let v = dense::fro_norm(&(tangent::oblique_tangent_project(&p.tangent, &z)? - &z)) / dense::fro_norm(&z);
        fixed.record(v, v <= 1e-10);

        let inv = perturb::invisible_perturbation(&p.sel, seed.wrapping_add(11))?;
        let v = dense::fro_norm(&tangent::oblique_tangent_project(&p.tangent, &inv)?);
        kernel.record(v, v <= 1e-13);

        if k < 10 {
            let all = SelectionPair::full(cfg.m, cfg.n)?;
            let tp = tangent::make_tangent_point(&p.svd, &all)?;
            let diff = tangent::oblique_tangent_project(&tp, &e)? - tangent::orthogonal_tangent_project(&p.svd, &e)?;
            let v = dense::fro_norm(&diff) / en;
            full.record(v, v <= 1e-12);
        }
    }

    let mut gap = Worst::new("obliqueness comparison bound", "lhs − rhs ≤ 1e-10");
    let mut gap_full = Worst::new("obliqueness comparison, full selection", "lhs ≤ 1e-12");
    for k in 0..sizes.comparison_instances {
        let p = instance(cfg, k)?;
        let e = dense::gaussian_matrix(cfg.m, cfg.n, 5000 + k as u64);
        let (lhs, rhs) = tangent::comparison_gap(&p.tangent, &e)?;
        gap.record(lhs - rhs, lhs <= rhs + 1e-10);
        if k < 10 {
            let tp = tangent::make_tangent_point(&p.svd, &SelectionPair::full(cfg.m, cfg.n)?)?;
            let (lhs, _) = tangent::comparison_gap(&tp, &e)?;
            gap_full.record(lhs, lhs <= 1e-12);
        }
    }
    Ok(vec![idem.finish(), fixed.finish(), range.finish(), kernel.finish(), full.finish(), gap.finish(), gap_full.finish()])
}

/// Ratio `err(t) / err(t/10)` of two central-difference errors.
fn fd_ratio<F>(f: F, x: &DenseMatrix, dir: &DenseMatrix, exact: &DenseMatrix, t: f64) -> Result<f64>
where
    F: Fn(&DenseMatrix) -> Result<DenseMatrix>,
{
    let coarse = dense::fro_norm(&(calculus::central_difference(&f, x, dir, t)? - exact));
    let fine = dense::fro_norm(&(calculus::central_difference(&f, x, dir, t / 10.0)? - exact));
    Ok(coarse / fine)
}

/// Derivative of the CUR map, pseudoinverse derivative, fixed-rank velocity
/// and the CUR pseudoinverse identities.
pub fn calculus_checks(cfg: &ExperimentConfig, sizes: &SuiteSizes) -> Result<Vec<CheckOutcome>> {
    let eps: Vec<f64> = experiment::log_grid(1e-6, 1e-3, 2)?;
    let mut slope = Worst::new("CUR remainder is second order", "|slope − 2| ≤ 0.1");
    let mut fd = Worst::new("finite differences match the CUR derivative", "ratio ∈ [100/3, 300], reported as |log₁₀(ratio/100)|");
    let mut pinv_fd = Worst::new("pseudoinverse derivative matches finite differences", "ratio ∈ [100/3, 300], reported as |log₁₀(ratio/100)|");
    let mut velocity = Worst::new("numerical velocity of rank-r truncation is tangent", "residual/‖Δ‖_F ≤ 1e-6");
    for k in 0..sizes.derivative_instances {
        let p = instance(cfg, k)?;
        let m = p.base();
        let r = p.svd.rank();
        let e = perturb::generic_perturbation(cfg.m, cfg.n, 9000 + k as u64);
        let ie = calculus::cur_frechet_derivative(&p.tangent, &e)?;
        let floor = p.rounding_floor();
        let mut pts = Vec::new();
        for &x in &eps {
            let out = cur::cur_rank_truncated(&(m + &e * x), &p.sel, r)?;
            let res = dense::fro_norm(&(out - m - &ie * x));
            if res >= floor {
                pts.push((x, res));
            }
        }
        let s = experiment::loglog_slope(&pts).unwrap_or(f64::NAN);
        slope.record((s - 2.0).abs(), (s - 2.0).abs() <= 0.1);

        let map = TruncatedMap::Cur { sel: &p.sel, rank: r };
        let ratio = fd_ratio(|a| map.apply(a), m, &e, &ie, 1e-3)?;
        fd.record((ratio / 100.0).log10().abs(), (100.0 / 3.0..=300.0).contains(&ratio));

        let w = sampling::intersection(m, &p.sel)?;
        let svd_w = dense::compact_svd(&w, dense::DEFAULT_REL_TOL)?.truncated(r)?;
        let delta = dense::gaussian_matrix(cfg.rows, cfg.cols, 9500 + k as u64);
        let delta = &delta / dense::fro_norm(&delta);
        let wdot = tangent::orthogonal_tangent_project(&svd_w, &delta)?;
        let exact = calculus::pinv_derivative(&w, &wdot, r)?;
        let ratio = fd_ratio(|a| dense::pinv_truncated(a, r), &w, &wdot, &exact, 1e-3)?;
        pinv_fd.record((ratio / 100.0).log10().abs(), (100.0 / 3.0..=300.0).contains(&ratio));

        let vel = calculus::central_difference(|a| dense::truncate_rank(a, r), &w, &delta, calculus::default_fd_step(&w))?;
        let v = calculus::fixed_rank_velocity_residual(&svd_w, &vel)? / dense::fro_norm(&delta);
        velocity.record(v, v <= 1e-6);
    }

    let mut consequence = Worst::new("CUR pseudoinverse identities", "residual/‖M‖_F ≤ 1e-10");
    for k in 0..sizes.consequence_instances {
        let p = instance(cfg, k)?;
        let (l, r) = calculus::cur_pinv_consequence_check(&p.svd, &p.sel)?;
        let v = l.max(r) / dense::fro_norm(p.base());
        consequence.record(v, v <= 1e-10);
    }
    Ok(vec![slope.finish(), fd.finish(), pinv_fd.finish(), velocity.finish(), consequence.finish()])
}

/// Rank-truncation remainder bound, Weyl step and exactness.
pub fn bound_checks(cfg: &ExperimentConfig, sizes: &SuiteSizes) -> Result<Vec<CheckOutcome>> {
    let mut bound = Worst::new("rank-truncation remainder bound (c = 0.2, ‖E‖₂ = 0.1γ)", "remainder/bound ≤ 1");
    let mut weyl = Worst::new("σ_{r+1}(W + E) ≤ ‖E‖₂", "excess ≤ 1e-12");
    let r = cfg.rank;
    for k in 0..sizes.expansion_instances {
        let seed = cfg.seed.wrapping_add(20_000 + 8 * k as u64);
        let svd_w = random_rank_r(cfg.rows, cfg.cols, r, seed)?;
        let w = svd_w.reconstruct();
        let gamma = svd_w.smallest_sigma().unwrap_or(0.0);
        let g = dense::gaussian_matrix(cfg.rows, cfg.cols, seed.wrapping_add(5));
        let mut e = match k % 3 {
            0 => g,
            1 => tangent::orthogonal_tangent_project(&svd_w, &g)?,
            _ => tangent::normal_project(&svd_w, &g)?,
        };
        e *= 0.1 * gamma / dense::spectral_norm(&e);
        let rep = calculus::truncation_expansion(&w, &e, r, DEFAULT_C)?;
        bound.record(rep.remainder_norm / rep.bound.max(f64::MIN_POSITIVE), rep.satisfied);
        let s = dense::singular_values(&(&w + &e));
        let excess = s.get(r).copied().unwrap_or(0.0) - dense::spectral_norm(&e);
        weyl.record(excess, excess <= 1e-12);
    }

    let mut exact = Worst::new("admissible CUR reproduces M", "‖Φ_r(M) − M‖_F/‖M‖_F ≤ 1e-11");
    for k in 0..sizes.exactness_instances {
        let p = instance(cfg, k)?;
        let m = p.base();
        let out = cur::cur_rank_truncated(m, &p.sel, p.svd.rank())?;
        let v = dense::fro_norm(&(out - m)) / dense::fro_norm(m);
        exact.record(v, v <= 1e-11);
    }
    Ok(vec![bound.finish(), weyl.finish(), exact.finish()])
}

/// Runs `suite` with problems shaped like `cfg`.
pub fn run_suite(suite: Suite, cfg: &ExperimentConfig, sizes: &SuiteSizes) -> Result<Vec<CheckOutcome>> {
    cfg.validate()?;
    Ok(match suite {
        Suite::Projectors => projector_checks(cfg, sizes)?,
        Suite::Calculus => calculus_checks(cfg, sizes)?,
        Suite::Bounds => bound_checks(cfg, sizes)?,
        Suite::All => {
            let mut all = projector_checks(cfg, sizes)?;
            all.extend(calculus_checks(cfg, sizes)?);
            all.extend(bound_checks(cfg, sizes)?);
            all
        }
    })
}
