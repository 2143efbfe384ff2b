//! Large-time survival asymptotics in growing truncated chambers.
//!
//! With box size `r(t)`, `P_x(τ_{W_Z ∩ r(t)I^k} > t)` behaves in four
//! regimes: constant `r` (spectral leading term), `1 ≪ r(t) ≪ √t`
//! (`K_0 r^{-α} h_Z(x) e^{-tλ/r²}`), `r(t) ~ r√t` (`K_r h_Z(x) t^{-α/2}`)
//! and `r(t) ≫ √t` (`K_∞ h_Z(x) t^{-α/2}`).

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::chamber::{reduite, ChamberPoint, ChamberSpec, WeylType};
use crate::error::{require_positive, Result, WeylError};
use crate::exec;
use crate::linalg;
use crate::rng;
use crate::special::{factorial, ln_factorial, ln_gamma};
use crate::spectral::{
    enumerate_indices, gamma_bound, integrate_eigenfunction, ln_principal_constant, ln_reduite_integral, principal_eigenvalue, survival_leading_term,
    survival_ratio_to_leading, survival_spectral_series, MultiIndex, SeriesBudget,
};
use crate::stochastic::{chamber_walls, smc_survival, walls, Drift, BATCH};

/// `α_A = k(k-1)/2`, `α_C = k²`, `α_D = k(k-1)`; also the degree of `h_Z`.
pub fn alpha(weyl_type: WeylType, k: usize) -> f64 {
    let k = k as f64;
    match weyl_type {
        WeylType::A => k * (k - 1.0) / 2.0,
        WeylType::C => k * k,
        WeylType::D => k * (k - 1.0),
    }
}

/// `ln K_0^Z = ln c_Z + ln ∫ f^Z = 2 ln c_Z + ln ∫ h_Z`, where `c_Z` is the
/// constant of the closed-form principal eigenfunction.
pub fn ln_k_zero(weyl_type: WeylType, k: usize) -> f64 {
    2.0 * ln_principal_constant(weyl_type, k) + ln_reduite_integral(weyl_type, k)
}

pub fn k_zero(weyl_type: WeylType, k: usize) -> f64 {
    ln_k_zero(weyl_type, k).exp()
}

/// `ln K_∞^Z` from the closed-form table, in log space.
pub fn ln_k_infinity(weyl_type: WeylType, k: usize) -> f64 {
    let kf = k as f64;
    let ln_pi = PI.ln();
    // Σ_{i<j} ln[(2j-1)² - (2i-1)²] = Σ ln[4(j-i)(i+j-1)]
    let odd_square_gaps = || -> f64 {
        let mut s = 0.0;
        for j in 1..=k {
            for i in 1..j {
                s += (4.0 * (j - i) as f64 * (i + j - 1) as f64).ln();
            }
        }
        s
    };
    let gaps: f64 = (1..=k).map(|j| ln_factorial(j - 1)).sum(); // ln ∏_{i<j}(j-i)
    match weyl_type {
        WeylType::A => {
            let g: f64 = (1..=k).map(|i| ln_gamma(i as f64 / 2.0 + 1.0)).sum();
            kf * LN_2 + g - 0.5 * kf * ln_pi - ln_factorial(k) - gaps
        }
        WeylType::C => {
            let g: f64 = (1..=k).map(|i| ln_gamma(i as f64 / 2.0 + 1.0) + ln_gamma((i as f64 + 1.0) / 2.0)).sum();
            let tail: f64 = (1..=k).map(|i| ((2 * k + 1 - 2 * i) as f64).ln()).sum();
            1.5 * kf * kf * LN_2 + g - kf * ln_pi - ln_factorial(k) - odd_square_gaps() - tail
        }
        WeylType::D => {
            let g: f64 = (1..=k).map(|i| ln_gamma(i as f64 / 2.0 + 1.0) + ln_gamma(i as f64 / 2.0)).sum();
            (3.0 * kf * kf - 3.0 * kf + 2.0) / 2.0 * LN_2 + g - kf * ln_pi - ln_factorial(k) - odd_square_gaps()
        }
    }
}

pub fn k_infinity(weyl_type: WeylType, k: usize) -> f64 {
    ln_k_infinity(weyl_type, k).exp()
}

/// `lim_{x→0} f_l^Z(x)/h_Z(x)`: the lowest-order coefficient of the
/// determinant's Taylor expansion, which factors through `h_Z`.
pub fn eigenfunction_origin_ratio(index: &MultiIndex) -> f64 {
    let k = index.k();
    let ls = index.indices();
    let norm = (2.0 / PI).sqrt().powi(k as i32) * crate::spectral::prefactor(index.weyl_type(), k);
    let mut m = vec![0.0; k * k];
    match index.weyl_type() {
        WeylType::A => {
            // m-th Taylor coefficient of cos(lx) (odd l) or sin(lx) (even l)
            for (i, &l) in ls.iter().enumerate() {
                let lf = l as f64;
                for p in 0..k {
                    let even_fn = l % 2 == 1;
                    let v = if even_fn == (p % 2 == 0) {
                        let sign = if (p / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * lf.powi(p as i32) / factorial(p)
                    } else {
                        0.0
                    };
                    m[i * k + p] = v;
                }
            }
        }
        WeylType::C => {
            for (i, &l) in ls.iter().enumerate() {
                for p in 1..=k {
                    let sign = if (p - 1) % 2 == 0 { 1.0 } else { -1.0 };
                    m[i * k + p - 1] = sign * (l as f64).powi(2 * p as i32 - 1) / factorial(2 * p - 1);
                }
            }
        }
        WeylType::D => {
            if ls[0].is_multiple_of(2) {
                // sin-based: vanishes to higher order than h_D
                return 0.0;
            }
            for (i, &l) in ls.iter().enumerate() {
                for p in 1..=k {
                    let sign = if (p - 1) % 2 == 0 { 1.0 } else { -1.0 };
                    m[i * k + p - 1] = sign * (l as f64).powi(2 * p as i32 - 2) / factorial(2 * p - 2);
                }
            }
        }
    }
    norm * linalg::det_in_place(&mut m, k)
}

/// `K_r^Z` from the eigenfunction expansion:
/// `Σ_l e^{-λ_l/r²} r^{-α} (f_l/h_Z)(0) ∫ f_l`, summed up to
/// `λ ≤ λ^Z + 60r² + 40`.
pub fn k_r_series(weyl_type: WeylType, k: usize, r: f64) -> Result<f64> {
    require_positive("r", r)?;
    ChamberSpec::new(weyl_type, k, r)?;
    let lam = principal_eigenvalue(weyl_type, k);
    let cutoff = lam + 60.0 * r * r + 40.0;
    let idx = enumerate_indices(weyl_type, k, cutoff);
    let a = alpha(weyl_type, k);
    let terms = exec::map_indexed(idx.len(), |i| {
        let l = &idx[i];
        let lead = eigenfunction_origin_ratio(l);
        if lead == 0.0 {
            return 0.0;
        }
        // e^{-λ/r²} r^{-α} combined in log space
        let scale = (-l.lambda() / (r * r) - a * r.ln()).exp();
        scale * lead * integrate_eigenfunction(l)
    });
    Ok(exec::pairwise_sum(&terms))
}

/// Settings of the Monte Carlo estimator of `K_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrConfig {
    /// total paths, split evenly over the four sub-estimates
    pub paths: u64,
    pub seed: u64,
    /// largest time step; the grid starts at `dt/64` and grows
    /// geometrically to resolve the start near the chamber apex
    pub dt: f64,
    /// starting scale `δ`; the estimator starts at `δ·(1, …, k)` and `δ/2·(1, …, k)`
    pub delta: Option<f64>,
}

impl KrConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        Self {
            paths,
            seed,
            dt: 5e-3,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrPoint {
    pub delta: f64,
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrEstimate {
    pub value: f64,
    /// 95% confidence half-width
    pub ci_halfwidth: f64,
    pub coarse: KrPoint,
    pub fine: KrPoint,
    pub k_infinity: f64,
}

/// Time grid on `[0, t]` with steps growing geometrically from `dt/64` to `dt`.
pub(crate) fn graded_steps(t: f64, dt: f64) -> Vec<f64> {
    let mut steps = Vec::new();
    let mut h = dt / 64.0;
    let mut acc = 0.0;
    while acc < t {
        let s = h.min(t - acc);
        if s <= 1e-12 * t {
            break;
        }
        steps.push(s);
        acc += s;
        h = (h * 1.25).min(dt);
    }
    steps
}

/// Mean and standard error of `E[L·bridge·1{alive}]` from independent
/// sequential Monte Carlo populations of `BATCH` particles each.
fn weighted_survival(x0: &[f64], steps: &[f64], walls: &[crate::stochastic::Wall], drift: Drift, paths: u64, seed: u64, domain: u64) -> (f64, f64) {
    let n_batches = (paths / BATCH).max(2) as usize;
    let z = exec::map_indexed(n_batches, |b| {
        let mut rng = rng::stream(seed, domain, b as u64);
        smc_survival(x0, steps, walls, drift, BATCH as usize, &mut rng)
    });
    let n = n_batches as f64;
    let mean = exec::pairwise_sum(&z) / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of `K_r^Z = lim_{x→0} P_x(τ_{W∩rI^k} > 1)/P_x(τ_W > 1) · K_∞^Z`.
///
/// Numerator and denominator are importance sampled: the numerator with
/// drift `∇ log f^Z(x/r)` (the ground state of the truncated chamber), the
/// denominator with `∇ log h_Z`; likelihood ratios keep both unbiased for
/// the bridge-corrected discretely monitored Brownian motion. Weights are
/// carried by resampled particle populations (see `smc_survival`), whose
/// spread gives the standard errors. The ratio is
/// formed at `δ` and `δ/2` and extrapolated to `δ = 0` assuming an `O(δ²)`
/// correction (both ratios are even in `x` about the apex).
pub fn k_r_estimate(weyl_type: WeylType, k: usize, r: f64, cfg: &KrConfig) -> Result<KrEstimate> {
    require_positive("r", r)?;
    require_positive("dt", cfg.dt)?;
    let spec = ChamberSpec::new(weyl_type, k, r)?;
    if cfg.paths < 10_000 {
        return Err(WeylError::Config(format!("k_r_estimate needs at least 10^4 paths, got {}", cfg.paths)));
    }
    if cfg.dt > 0.1 {
        return Err(WeylError::Config("dt must be <= 0.1 for a unit horizon".into()));
    }
    let delta = cfg.delta.unwrap_or(0.2 * r.min(1.0) / k as f64);
    let start = |d: f64| -> Result<Vec<f64>> {
        let x: Vec<f64> = (1..=k).map(|i| d * i as f64).collect();
        ChamberPoint::new(spec, x.clone())?;
        Ok(x)
    };
    let steps = graded_steps(1.0, cfg.dt);
    let box_walls = walls(&spec);
    let free_walls = chamber_walls(weyl_type, k);
    let per = cfg.paths / 4;
    let kinf = k_infinity(weyl_type, k);
    let point = |d: f64, tag: u64| -> Result<KrPoint> {
        let x0 = start(d)?;
        let (num, se_n) = weighted_survival(
            &x0,
            &steps,
            &box_walls,
            Drift::Ground(weyl_type, r),
            per,
            cfg.seed ^ tag,
            rng::domain::KR_NUMERATOR,
        );
        let (den, se_d) = weighted_survival(
            &x0,
            &steps,
            &free_walls,
            Drift::Reduite(weyl_type),
            per,
            cfg.seed ^ tag,
            rng::domain::KR_DENOMINATOR,
        );
        if !(num > 0.0) || !(den > 0.0) || se_n > 0.5 * num || se_d > 0.5 * den {
            return Err(WeylError::Statistical(format!(
                "too few weighted survivors at δ = {d}: numerator {num} ± {se_n}, denominator {den} ± {se_d}"
            )));
        }
        let ratio = num / den;
        let rel = ((se_n / num).powi(2) + (se_d / den).powi(2)).sqrt();
        Ok(KrPoint {
            delta: d,
            ratio,
            std_error: ratio * rel,
        })
    };
    let coarse = point(delta, 0)?;
    let fine = point(delta / 2.0, 0x9e37_79b9)?;
    let extrapolated = (4.0 * fine.ratio - coarse.ratio) / 3.0;
    let se = (16.0 * fine.std_error.powi(2) + coarse.std_error.powi(2)).sqrt() / 3.0;
    Ok(KrEstimate {
        value: kinf * extrapolated,
        ci_halfwidth: 1.96 * kinf * se,
        coarse,
        fine,
        k_infinity: kinf,
    })
}

/// Growth of the box size `r(t)` with time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum GrowthRegime {
    /// `r(t) ≡ r`
    ConstantR { r: f64 },
    /// `r(t) = t^β` with `0 < β < ½`
    Intermediate { beta: f64 },
    /// `r(t) = c√t`
    Diffusive { c: f64 },
    /// `√t ≪ r(t)`; observed values use `r(t) = t^{3/4}`
    Superdiffusive,
}

impl GrowthRegime {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GrowthRegime::ConstantR { r } => require_positive("r", r),
            GrowthRegime::Intermediate { beta } => {
                if beta > 0.0 && beta < 0.5 {
                    Ok(())
                } else {
                    Err(WeylError::Parameter {
                        name: "beta",
                        value: beta,
                        constraint: "intermediate growth needs 0 < β < 1/2".into(),
                    })
                }
            }
            GrowthRegime::Diffusive { c } => require_positive("c", c),
            GrowthRegime::Superdiffusive => Ok(()),
        }
    }

    /// The box size used at time `t`.
    pub fn radius(&self, t: f64) -> f64 {
        match *self {
            GrowthRegime::ConstantR { r } => r,
            GrowthRegime::Intermediate { beta } => t.powf(beta),
            GrowthRegime::Diffusive { c } => c * t.sqrt(),
            GrowthRegime::Superdiffusive => t.powf(0.75),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GrowthRegime::ConstantR { .. } => "constant_r",
            GrowthRegime::Intermediate { .. } => "intermediate",
            GrowthRegime::Diffusive { .. } => "diffusive",
            GrowthRegime::Superdiffusive => "superdiffusive",
        }
    }
}

/// Regime constants; `None` where a constant does not enter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub k0: Option<f64>,
    pub kr: Option<f64>,
    pub kinf: Option<f64>,
}

/// Asymptotic value of `P_x(τ_{W_Z ∩ r(t)I^k} > t)` in the given regime.
///
/// The limit theorem holds uniformly only for `|x| ≤ θ_t r(t)` (middle
/// regimes) or `|x| ≤ θ_t √t` (last regime) with `θ_t → 0`; this is a
/// documented precondition, not checked here. `x` must lie in `W_Z`, and in
/// `W_Z ∩ r(t)I^k` for the truncated regimes.
pub fn predict(weyl_type: WeylType, k: usize, regime: &GrowthRegime, t: f64, x: &[f64]) -> Result<f64> {
    regime.validate()?;
    require_positive("t", t)?;
    let a = alpha(weyl_type, k);
    let check_in = |r: f64| -> Result<ChamberPoint> {
        let spec = ChamberSpec::new(weyl_type, k, r)?;
        ChamberPoint::new(spec, x.to_vec())
    };
    match *regime {
        GrowthRegime::ConstantR { r } => {
            let p = check_in(r)?;
            Ok(survival_leading_term(p.spec(), t, &p))
        }
        GrowthRegime::Intermediate { .. } => {
            let r = regime.radius(t);
            check_in(r)?;
            let lam = principal_eigenvalue(weyl_type, k);
            Ok((ln_k_zero(weyl_type, k) - a * r.ln() - t * lam / (r * r)).exp() * reduite(weyl_type, x))
        }
        GrowthRegime::Diffusive { c } => {
            check_in(regime.radius(t))?;
            Ok(k_r_series(weyl_type, k, c)? * reduite(weyl_type, x) * t.powf(-a / 2.0))
        }
        GrowthRegime::Superdiffusive => {
            // any chamber radius works for the membership test of W_Z
            let big = 4.0 * x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            check_in(big)?;
            Ok((ln_k_infinity(weyl_type, k) - a / 2.0 * t.ln()).exp() * reduite(weyl_type, x))
        }
    }
}

/// One row of a regime report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub t: f64,
    pub r: f64,
    pub predicted: f64,
    pub observed: f64,
    pub observed_error: f64,
    pub ratio: f64,
    /// `e^{kγ(t/r²)}` when `t/r² > 14` in the constant-r regime
    pub uniform_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub weyl_type: WeylType,
    pub k: usize,
    pub regime: GrowthRegime,
    pub alpha: f64,
    pub lambda_principal: f64,
    pub constants: RegimeConstants,
    pub x: Vec<f64>,
    pub rows: Vec<RegimeRow>,
}

/// Predicted against observed values on a grid of times; the observed
/// value is the spectral survival probability in `W_Z ∩ r(t)I^k`.
pub fn regime_report(weyl_type: WeylType, k: usize, regime: GrowthRegime, times: &[f64], x: &[f64]) -> Result<RegimeReport> {
    regime.validate()?;
    let constants = match regime {
        GrowthRegime::ConstantR { .. } => RegimeConstants {
            k0: None,
            kr: None,
            kinf: None,
        },
        GrowthRegime::Intermediate { .. } => RegimeConstants {
            k0: Some(k_zero(weyl_type, k)),
            kr: None,
            kinf: None,
        },
        GrowthRegime::Diffusive { c } => RegimeConstants {
            k0: None,
            kr: Some(k_r_series(weyl_type, k, c)?),
            kinf: None,
        },
        GrowthRegime::Superdiffusive => RegimeConstants {
            k0: None,
            kr: None,
            kinf: Some(k_infinity(weyl_type, k)),
        },
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let r = regime.radius(t);
        let spec = ChamberSpec::new(weyl_type, k, r)?;
        let p = ChamberPoint::new(spec, x.to_vec())?;
        let predicted = predict(weyl_type, k, &regime, t, x)?;
        let obs = survival_spectral_series(&spec, t, &p, SeriesBudget::default_cutoff(&spec, t))?;
        let tau = t / (r * r);
        let uniform_bound = match regime {
            GrowthRegime::ConstantR { .. } => gamma_bound(tau).ok().map(|g| (k as f64 * g).exp()),
            _ => None,
        };
        // for constant r the prediction is the leading term, whose ratio is
        // evaluated with the decay factored out (both sides may underflow)
        let ratio = match regime {
            GrowthRegime::ConstantR { .. } => survival_ratio_to_leading(&spec, t, &p, SeriesBudget::default_cutoff(&spec, t))?.value,
            _ => obs.value / predicted,
        };
        rows.push(RegimeRow {
            t,
            r,
            predicted,
            observed: obs.value,
            observed_error: obs.error_bound,
            ratio,
            uniform_bound,
        });
    }
    Ok(RegimeReport {
        weyl_type,
        k,
        regime,
        alpha: alpha(weyl_type, k),
        lambda_principal: principal_eigenvalue(weyl_type, k),
        constants,
        x: x.to_vec(),
        rows,
    })
}
