//! The limiting endpoint ensemble with density `∝ h_Z(y)` on
//! `W_A ∩ (-1,1)^k` or `W_C ∩ (0,1)^k`: Metropolis sampling, empirical
//! measures, the discrete rate functional, the normalising constant `d_Z`
//! and the law-of-large-numbers check against the limit laws.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chamber::WeylType;
use crate::error::{require_positive, Result, WeylError};
use crate::exec;
use crate::linalg;
use crate::rng::{self, domain};
use crate::spectral::ln_reduite_integral;

fn require_a_or_c(weyl_type: WeylType) -> Result<()> {
    match weyl_type {
        WeylType::A | WeylType::C => Ok(()),
        WeylType::D => Err(WeylError::Unsupported(
            "type D has no endpoint ensemble limit: the reduite does not factor into one-particle terms after the sine substitution".into(),
        )),
    }
}

/// Support of the ensemble coordinates.
pub fn support(weyl_type: WeylType) -> (f64, f64) {
    match weyl_type {
        WeylType::C => (0.0, 1.0),
        _ => (-1.0, 1.0),
    }
}

/// Uniformly weighted atoms, kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub weyl_type: WeylType,
    pub atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(weyl_type: WeylType, mut atoms: Vec<f64>) -> Result<Self> {
        require_a_or_c(weyl_type)?;
        if atoms.is_empty() {
            return Err(WeylError::Config("empirical measure needs at least one atom".into()));
        }
        let (lo, hi) = support(weyl_type);
        if let Some(&bad) = atoms.iter().find(|a| !(**a >= lo && **a <= hi)) {
            return Err(WeylError::Domain(format!("atom {bad} outside [{lo}, {hi}]")));
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { weyl_type, atoms })
    }

    pub fn k(&self) -> usize {
        self.atoms.len()
    }

    /// `i`-th of `k` quantile atoms `Q((i + ½)/k)` of a distribution.
    pub fn from_quantiles(weyl_type: WeylType, k: usize, quantile: impl Fn(f64) -> f64) -> Result<Self> {
        let atoms = (0..k).map(|i| quantile((i as f64 + 0.5) / k as f64)).collect();
        Self::new(weyl_type, atoms)
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// Single-coordinate Metropolis settings. A step is one proposed update of
/// one uniformly chosen coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// steps between retained states
    pub steps: u64,
    pub burnin: u64,
    /// standard deviation of the Gaussian coordinate proposal
    pub proposal_scale: f64,
    pub seed: u64,
    /// independent chains; sample `i` comes from chain `i mod chains`
    pub chains: usize,
}

impl McmcConfig {
    /// Scale `0.5/k`, `10k²` burn-in steps, thinning by `k` steps.
    pub fn defaults(k: usize, seed: u64) -> Self {
        Self {
            steps: k as u64,
            burnin: 10 * (k * k) as u64,
            proposal_scale: 0.5 / k as f64,
            seed,
            chains: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("proposal_scale", self.proposal_scale)?;
        if self.steps == 0 || self.chains == 0 {
            return Err(WeylError::Config("steps and chains must be positive".into()));
        }
        Ok(())
    }
}

/// Change of `log h_Z` when coordinate `i` moves from `y[i]` to `v`.
fn log_density_delta(weyl_type: WeylType, y: &[f64], i: usize, v: f64) -> f64 {
    let u = y[i];
    let mut d = 0.0;
    match weyl_type {
        WeylType::C => {
            let (u2, v2) = (u * u, v * v);
            for (j, &w) in y.iter().enumerate() {
                if j != i {
                    let w2 = w * w;
                    d += ((v2 - w2) / (u2 - w2)).abs().ln();
                }
            }
            d += (v / u).ln();
        }
        _ => {
            for (j, &w) in y.iter().enumerate() {
                if j != i {
                    d += ((v - w) / (u - w)).abs().ln();
                }
            }
        }
    }
    d
}

fn run_chain(weyl_type: WeylType, k: usize, n_out: usize, cfg: &McmcConfig, chain: usize) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(cfg.seed, domain::ENSEMBLE, chain as u64);
    let (lo, hi) = support(weyl_type);
    let mut y: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect();
    let step = |y: &mut Vec<f64>, rng: &mut rng::StreamRng| {
        let i = rng.random_range(0..k);
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let v = y[i] + cfg.proposal_scale * z;
        let left = if i == 0 { lo } else { y[i - 1] };
        let right = if i + 1 == k { hi } else { y[i + 1] };
        if !(v > left && v < right) {
            return;
        }
        let d = log_density_delta(weyl_type, y, i, v);
        if d.is_finite() && u.ln() < d {
            y[i] = v;
        }
    };
    for _ in 0..cfg.burnin {
        step(&mut y, &mut rng);
    }
    let mut out = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        for _ in 0..cfg.steps {
            step(&mut y, &mut rng);
        }
        out.push(y.clone());
    }
    out
}

/// Draws `n_samples` states of the ensemble `∝ h_Z` by single-coordinate
/// Metropolis within the ordered region, started from an even grid.
/// Chains run in parallel; the output does not depend on the thread count.
pub fn sample_h_ensemble(weyl_type: WeylType, k: usize, n_samples: usize, cfg: &McmcConfig) -> Result<Vec<EmpiricalMeasure>> {
    require_a_or_c(weyl_type)?;
    cfg.validate()?;
    if k == 0 || n_samples == 0 {
        return Err(WeylError::Config("k and n_samples must be positive".into()));
    }
    let chains = cfg.chains.min(n_samples);
    let per_chain = n_samples.div_ceil(chains);
    let runs = exec::map_indexed(chains, |c| run_chain(weyl_type, k, per_chain, cfg, c));
    (0..n_samples)
        .map(|i| EmpiricalMeasure::new(weyl_type, runs[i % chains][i / chains].clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// Rate functional

/// Discrete rate functional split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    pub energy: f64,
    pub external_field: f64,
    pub d_z: f64,
    pub rate: f64,
}

/// Off-diagonal logarithmic energy
/// `(1/(2k(k-1))) Σ_{i≠j} log 1/|x_i - x_j|` (with `x²` for C), the
/// external field `-(1/k) Σ log x_i` for C, and `rate = energy + field - d_Z`.
/// Coincident atoms give an infinite rate.
pub fn rate_function(weyl_type: WeylType, mu: &EmpiricalMeasure, d_z: f64) -> Result<RateValue> {
    require_a_or_c(weyl_type)?;
    let x = &mu.atoms;
    let k = x.len();
    if k < 2 {
        return Err(WeylError::Config("rate functional needs at least two atoms".into()));
    }
    if weyl_type == WeylType::C && x.iter().any(|&v| !(v > 0.0)) {
        return Err(WeylError::Domain("type C atoms must be positive".into()));
    }
    let rows = exec::map_indexed(k, |i| {
        (i + 1..k)
            .map(|j| match weyl_type {
                WeylType::C => -(x[i] * x[i] - x[j] * x[j]).abs().ln(),
                _ => -(x[i] - x[j]).abs().ln(),
            })
            .sum::<f64>()
    });
    // each unordered pair appears twice in Σ_{i≠j}
    let energy = exec::pairwise_sum(&rows) / (k * (k - 1)) as f64;
    let external_field = match weyl_type {
        WeylType::C => -x.iter().map(|v| v.ln()).sum::<f64>() / k as f64,
        _ => 0.0,
    };
    Ok(RateValue {
        energy,
        external_field,
        d_z,
        rate: energy + external_field - d_z,
    })
}

// ---------------------------------------------------------------------------
// Normalising constant

/// `(1/k²) log ∫_{W_Z ∩ (2I/π)^k} h_Z`, exact through the Selberg integral.
pub fn ln_partition_per_k2(weyl_type: WeylType, k: usize) -> Result<f64> {
    require_a_or_c(weyl_type)?;
    if k == 0 {
        return Err(WeylError::Config("k must be positive".into()));
    }
    Ok(ln_reduite_integral(weyl_type, k) / (k * k) as f64)
}

/// Extrapolated `d_Z` with the data it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DzEstimate {
    pub weyl_type: WeylType,
    /// `d_Z = -lim (1/k²) log ∫ h_Z`, the sign that makes `inf R_Z = 0`
    pub value: f64,
    /// change of the limit when the last basis function is dropped
    pub spread: f64,
    pub k_list: Vec<usize>,
    /// `(1/k²) log ∫ h_Z` at each `k`
    pub points: Vec<f64>,
}

/// Default sizes for the extrapolation.
pub fn default_k_list() -> Vec<usize> {
    (0..=8).map(|i| (256.0 * 2f64.powf(i as f64 / 2.0)).round() as usize).collect()
}

/// Extrapolation tolerance on [`DzEstimate::spread`].
pub const DZ_SPREAD_TOL: f64 = 1e-4;

fn fit_limit(k_list: &[usize], points: &[f64], n_basis: usize) -> Option<f64> {
    let m = k_list.len();
    let a: Vec<f64> = k_list
        .iter()
        .flat_map(|&k| {
            let k = k as f64;
            let l = k.ln();
            [1.0, l / k, 1.0 / k, l / (k * k), 1.0 / (k * k)].into_iter().take(n_basis)
        })
        .collect();
    linalg::least_squares(&a, m, n_basis, points).map(|c| c[0])
}

/// Fits `(1/k²) log ∫ h_Z` over `k_list` to
/// `c₀ + c₁ log k/k + c₂/k + c₃ log k/k² + c₄/k²` and returns `d_Z = -c₀`.
/// Fails if the fit is underdetermined or if dropping the last basis
/// function moves the limit by more than [`DZ_SPREAD_TOL`].
pub fn estimate_dz(weyl_type: WeylType, k_list: &[usize]) -> Result<DzEstimate> {
    require_a_or_c(weyl_type)?;
    let points = k_list.iter().map(|&k| ln_partition_per_k2(weyl_type, k)).collect::<Result<Vec<_>>>()?;
    let mut distinct = k_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 6 {
        return Err(WeylError::Config("d_Z extrapolation needs at least six distinct k".into()));
    }
    let full = fit_limit(k_list, &points, 5).ok_or_else(|| WeylError::Numerical("d_Z fit is rank deficient".into()))?;
    let reduced = fit_limit(k_list, &points, 4).ok_or_else(|| WeylError::Numerical("d_Z fit is rank deficient".into()))?;
    let spread = (full - reduced).abs();
    if !(spread <= DZ_SPREAD_TOL) {
        return Err(WeylError::Numerical(format!("d_Z extrapolation did not settle (spread {spread:.3e})")));
    }
    Ok(DzEstimate {
        weyl_type,
        value: -full,
        spread,
        k_list: k_list.to_vec(),
        points,
    })
}

/// Cached `d_Z` values shipped with the crate (regenerate with `weylsim dz`).
pub const DZ_CACHE: &str = include_str!("../data/dz.json");

/// `d_Z` from the cache.
pub fn cached_dz(weyl_type: WeylType) -> Result<DzEstimate> {
    require_a_or_c(weyl_type)?;
    let all: Vec<DzEstimate> = serde_json::from_str(DZ_CACHE).map_err(|e| WeylError::Numerical(format!("d_Z cache: {e}")))?;
    all.into_iter()
        .find(|d| d.weyl_type == weyl_type)
        .ok_or_else(|| WeylError::Numerical(format!("d_Z cache has no entry for {weyl_type}")))
}

// ---------------------------------------------------------------------------
// Limit laws

/// Arcsine CDF `½ + arcsin(x)/π` on `[-1, 1]`.
pub fn arcsine_cdf(x: f64) -> f64 {
    0.5 + x.clamp(-1.0, 1.0).asin() / PI
}

pub fn arcsine_quantile(u: f64) -> f64 {
    (PI * (u - 0.5)).sin()
}

const MU_C_LOW: f64 = 1.0 / 9.0;

/// Density `3/(2πx) √((x - 1/9)/(1 - x))` on `[1/9, 1]`.
pub fn mu_c_density(x: f64) -> f64 {
    if x <= MU_C_LOW || x >= 1.0 {
        return 0.0;
    }
    3.0 / (2.0 * PI * x) * ((x - MU_C_LOW) / (1.0 - x)).sqrt()
}

/// CDF of [`mu_c_density`]. With `x = 1/9 + (8/9) sin²θ` the density
/// becomes `(3/π)(1 - (1/9)/(1/9 + (8/9) sin²θ)) dθ`, which integrates to
/// `(3θ - arctan(3 tan θ))/π`.
pub fn mu_c_cdf(x: f64) -> f64 {
    if x <= MU_C_LOW {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let theta = ((x - MU_C_LOW) / (1.0 - MU_C_LOW)).sqrt().asin();
    let v = if theta < FRAC_PI_2 {
        (3.0 * theta - (3.0 * theta.tan()).atan()) / PI
    } else {
        1.0
    };
    v.clamp(0.0, 1.0)
}

fn bisect_quantile(cdf: impl Fn(f64) -> f64, u: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn mu_c_quantile(u: f64) -> f64 {
    bisect_quantile(mu_c_cdf, u, MU_C_LOW, 1.0)
}

/// Limit law `μ_Z` of the empirical measure.
pub fn limit_cdf(weyl_type: WeylType) -> fn(f64) -> f64 {
    match weyl_type {
        WeylType::C => mu_c_cdf,
        _ => arcsine_cdf,
    }
}

pub fn limit_quantile(weyl_type: WeylType) -> fn(f64) -> f64 {
    match weyl_type {
        WeylType::C => mu_c_quantile,
        _ => arcsine_quantile,
    }
}

/// Distances from the pooled empirical measure to the limit law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlnReport {
    /// sup-distance between the averaged empirical CDF and the limit CDF
    pub ks_to_limit: f64,
    /// first Wasserstein distance by sorted-quantile comparison
    pub wasserstein1: f64,
    pub atoms: usize,
}

/// Compares the average of the sample measures with `μ_Z`.
pub fn lln_check(weyl_type: WeylType, samples: &[EmpiricalMeasure]) -> Result<LlnReport> {
    require_a_or_c(weyl_type)?;
    if samples.is_empty() {
        return Err(WeylError::Config("lln_check needs at least one sample".into()));
    }
    if samples.iter().any(|s| s.weyl_type != weyl_type) {
        return Err(WeylError::Config("samples of mixed type".into()));
    }
    // equal weight per sample, then uniform within each sample
    let mut pooled: Vec<(f64, f64)> = samples
        .iter()
        .flat_map(|s| {
            let w = 1.0 / (samples.len() * s.k()) as f64;
            s.atoms.iter().map(move |&a| (a, w))
        })
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cdf = limit_cdf(weyl_type);
    let quantile = limit_quantile(weyl_type);
    let mut ks: f64 = 0.0;
    let mut w1 = 0.0;
    let mut acc = 0.0;
    for &(a, w) in &pooled {
        let f = cdf(a);
        ks = ks.max((f - acc).abs());
        let mid = acc + 0.5 * w;
        acc += w;
        ks = ks.max((f - acc).abs());
        w1 += w * (a - quantile(mid.min(1.0))).abs();
    }
    Ok(LlnReport {
        ks_to_limit: ks,
        wasserstein1: w1,
        atoms: pooled.len(),
    })
}

/// `½ log 2`, the logarithmic energy of the arcsine law on `[-1, 1]`.
pub const ARCSINE_ENERGY: f64 = 0.5 * LN_2;
