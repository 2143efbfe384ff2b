//! Karlin–McGregor determinants of the one-dimensional killed heat kernel.
//!
//! The kernel `p_t^{rI}(x, y)` of Brownian motion killed on leaving
//! `rI = (-rπ/2, rπ/2)` is evaluated either by its eigenfunction series or
//! by the method of images; the k-dimensional density in `W_Z ∩ rI^k` is a
//! determinant (or, for type D, half the sum of two determinants) of
//! kernel values.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::chamber::{integrate_over_chamber, ChamberPoint, ChamberSpec, WeylType};
use crate::error::{require_positive, Result, WeylError};
use crate::linalg;
use crate::quadrature::GaussLegendre;
use crate::special::factorial;
use crate::spectral::{eigen1d_raw, Method, SurvivalResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    EigenSeries,
    ImageSeries,
}

impl std::str::FromStr for KernelMethod {
    type Err = WeylError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" | "eigen_series" => Ok(Self::EigenSeries),
            "image" | "image_series" => Ok(Self::ImageSeries),
            other => Err(WeylError::Config(format!("unknown kernel method '{other}'"))),
        }
    }
}

/// One-dimensional killed kernel on `rI` at time `t`.
///
/// For the eigen series `truncation` is the number of eigenfunctions; for
/// the image series it is the number of reflected copies on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel1D {
    pub t: f64,
    pub r: f64,
    pub method: KernelMethod,
    pub truncation: usize,
}

impl Kernel1D {
    pub fn new(t: f64, r: f64, method: KernelMethod, truncation: usize) -> Result<Self> {
        require_positive("t", t)?;
        require_positive("r", r)?;
        if truncation == 0 {
            return Err(WeylError::Config("kernel truncation must be >= 1".into()));
        }
        Ok(Self { t, r, method, truncation })
    }

    /// Images for `t/r² < 1`, eigenfunctions otherwise, with the default
    /// truncation of that method.
    pub fn with_defaults(t: f64, r: f64) -> Result<Self> {
        require_positive("t", t)?;
        require_positive("r", r)?;
        let method = if t / (r * r) < 1.0 {
            KernelMethod::ImageSeries
        } else {
            KernelMethod::EigenSeries
        };
        Self::new(t, r, method, default_truncation(method, t, r))
    }

    fn half_width(&self) -> f64 {
        self.r * FRAC_PI_2
    }

    /// `p_t^{rI}(x, y)` without the domain check.
    pub(crate) fn eval_raw(&self, x: f64, y: f64) -> f64 {
        match self.method {
            KernelMethod::EigenSeries => {
                let tau = self.t / (self.r * self.r);
                let (u, v) = (x / self.r, y / self.r);
                let mut acc = 0.0;
                for l in 1..=self.truncation as u32 {
                    let lf = l as f64;
                    acc += (-tau * lf * lf / 2.0).exp() * eigen1d_raw(l, u) * eigen1d_raw(l, v);
                }
                acc / self.r
            }
            KernelMethod::ImageSeries => {
                let w = self.half_width();
                let period = 4.0 * w;
                let n = self.truncation as i64;
                let norm = 1.0 / (2.0 * PI * self.t).sqrt();
                let g = |d: f64| (-d * d / (2.0 * self.t)).exp();
                let mut acc = 0.0;
                // symmetric order keeps the large central terms first
                for m in 0..=n {
                    for s in if m == 0 { [0i64, 0] } else { [m, -m] } {
                        let shift = s as f64 * period;
                        acc += g(y - x + shift) - g(y + x + 2.0 * w + shift);
                        if m == 0 {
                            break;
                        }
                    }
                }
                norm * acc
            }
        }
    }

    /// Bound on `|kernel - truncated kernel|`, uniform in `x, y ∈ rI`.
    pub fn truncation_bound(&self) -> f64 {
        match self.method {
            KernelMethod::EigenSeries => {
                let tau = self.t / (self.r * self.r);
                let first = self.truncation as f64 + 1.0;
                let lead = (-tau * first * first / 2.0).exp();
                let ratio = (-tau * (2.0 * first + 1.0) / 2.0).exp();
                2.0 / (PI * self.r) * lead / (1.0 - ratio)
            }
            KernelMethod::ImageSeries => {
                // an omitted copy with index |m| ≥ N+1 sits at distance at
                // least 4w(|m| - 1) from y; four terms share each |m|
                let w = self.half_width();
                let norm = 1.0 / (2.0 * PI * self.t).sqrt();
                let mut acc = 0.0;
                let mut m = self.truncation as f64 + 1.0;
                loop {
                    let d = 4.0 * w * (m - 1.0);
                    let term = 4.0 * norm * (-d * d / (2.0 * self.t)).exp();
                    acc += term;
                    if term <= 1e-20 * acc.max(1e-300) || term == 0.0 {
                        // remaining terms shrink faster than a ratio-½ series
                        return acc + term;
                    }
                    m += 1.0;
                }
            }
        }
    }

    /// `sup |p_t^{rI}|` bound, by domination by the free Gaussian kernel.
    fn sup_bound(&self) -> f64 {
        1.0 / (2.0 * PI * self.t).sqrt()
    }

    /// Sharper `sup |p_t^{rI}|` for long times: the eigen series is
    /// bounded termwise by `(2/(πr)) Σ_l e^{-τl²/2}`.
    fn long_time_sup_bound(&self) -> f64 {
        let tau = self.t / (self.r * self.r);
        let mut acc = 0.0;
        let mut l = 1.0f64;
        loop {
            let term = (-tau * l * l / 2.0).exp();
            acc += term;
            if term <= 1e-17 * acc {
                break;
            }
            l += 1.0;
        }
        (2.0 / (PI * self.r) * acc).min(self.sup_bound())
    }
}

/// Default truncation: `1 + ⌈4r/√t⌉` images per side, or
/// `⌈√(2(40 + t/r²) r²/t)⌉` eigenfunctions.
pub fn default_truncation(method: KernelMethod, t: f64, r: f64) -> usize {
    match method {
        KernelMethod::ImageSeries => 1 + (4.0 * r / t.sqrt()).ceil() as usize,
        KernelMethod::EigenSeries => {
            let tau = t / (r * r);
            ((2.0 * (40.0 + tau) / tau).sqrt().ceil() as usize).max(1)
        }
    }
}

/// `p_t^{rI}(x, y)` with domain checks.
pub fn kernel1d(kern: &Kernel1D, x: f64, y: f64) -> Result<f64> {
    let w = kern.half_width();
    for v in [x, y] {
        if !(v.abs() <= w) {
            return Err(WeylError::Domain(format!("{v} outside [-{w}, {w}]")));
        }
    }
    Ok(kern.eval_raw(x, y))
}

fn check_kernel(spec: &ChamberSpec, t: f64, kern: &Kernel1D) -> Result<()> {
    require_positive("t", t)?;
    if kern.t != t || kern.r != spec.r {
        return Err(WeylError::Config(format!(
            "kernel built for (t={}, r={}) used with (t={t}, r={})",
            kern.t, kern.r, spec.r
        )));
    }
    Ok(())
}

/// Chamber density from raw coordinates.
pub(crate) fn density_raw(weyl_type: WeylType, kern: &Kernel1D, x: &[f64], y: &[f64], buf: &mut [f64]) -> f64 {
    let k = x.len();
    match weyl_type {
        WeylType::A => {
            for i in 0..k {
                for j in 0..k {
                    buf[i * k + j] = kern.eval_raw(x[i], y[j]);
                }
            }
            linalg::det_in_place(buf, k)
        }
        WeylType::C => {
            for i in 0..k {
                for j in 0..k {
                    buf[i * k + j] = kern.eval_raw(x[i], y[j]) - kern.eval_raw(x[i], -y[j]);
                }
            }
            linalg::det_in_place(buf, k)
        }
        WeylType::D => {
            let mut plus = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    let a = kern.eval_raw(x[i], y[j]);
                    let b = kern.eval_raw(x[i], -y[j]);
                    buf[i * k + j] = a - b;
                    plus[i * k + j] = a + b;
                }
            }
            0.5 * linalg::det_in_place(buf, k) + 0.5 * linalg::det_in_place(&mut plus, k)
        }
    }
}

/// The two determinants of the type-D formula, `(det[p - p̄], det[p + p̄])`
/// with `p̄(x, y) = p(x, -y)`.
pub fn type_d_parts(kern: &Kernel1D, x: &[f64], y: &[f64]) -> (f64, f64) {
    let k = x.len();
    let mut minus = vec![0.0; k * k];
    let mut plus = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let a = kern.eval_raw(x[i], y[j]);
            let b = kern.eval_raw(x[i], -y[j]);
            minus[i * k + j] = a - b;
            plus[i * k + j] = a + b;
        }
    }
    (linalg::det_in_place(&mut minus, k), linalg::det_in_place(&mut plus, k))
}

/// Bound on the density error caused by kernel truncation: every matrix
/// entry moves by at most `ε` (2ε for C, D) with entries bounded by `M`
/// (2M), so each of the `k!` products moves by at most `(M+ε)^k - M^k`.
pub fn density_truncation_bound(spec: &ChamberSpec, kern: &Kernel1D) -> f64 {
    let eps = kern.truncation_bound();
    let m = kern.sup_bound();
    let (m, eps) = match spec.weyl_type {
        WeylType::A => (m, eps),
        WeylType::C | WeylType::D => (2.0 * m, 2.0 * eps),
    };
    let k = spec.k as i32;
    factorial(spec.k) * ((m + eps).powi(k) - m.powi(k))
}

/// Bound on the floating-point error of one density evaluation: LU with
/// partial pivoting has a backward error of a few `k·ε` relative to the
/// entries, and Hadamard's inequality bounds the resulting determinant
/// change by `4k²ε(√k·M)^k` with `M` the entry bound.
pub fn density_roundoff_bound(spec: &ChamberSpec, kern: &Kernel1D) -> f64 {
    let m = match spec.weyl_type {
        WeylType::A => kern.long_time_sup_bound(),
        WeylType::C | WeylType::D => 2.0 * kern.long_time_sup_bound(),
    };
    let k = spec.k as f64;
    4.0 * k * k * f64::EPSILON * (k.sqrt() * m).powi(spec.k as i32)
}

/// Transition density of Brownian motion killed on leaving `W_Z ∩ rI^k`.
pub fn transition_density_kmgr(spec: &ChamberSpec, t: f64, x: &ChamberPoint, y: &ChamberPoint, kern: &Kernel1D) -> Result<f64> {
    check_kernel(spec, t, kern)?;
    for p in [x, y] {
        if p.spec() != spec {
            return Err(WeylError::Config("point was validated against a different chamber".into()));
        }
    }
    let k = spec.k;
    let mut buf = vec![0.0; k * k];
    Ok(density_raw(spec.weyl_type, kern, x.coords(), y.coords(), &mut buf))
}

/// Default quadrature order: enough nodes per dimension to resolve the
/// kernel's spatial scale `√t` across the chamber width.
pub fn default_quadrature_order(spec: &ChamberSpec, t: f64) -> usize {
    let scale = (spec.half_width() / t.sqrt()).ceil() as usize;
    (2 * scale).clamp(16, 96)
}

/// `P_x(τ > t)` by integrating the Karlin–McGregor density over the
/// chamber with an ordered-limits Gauss–Legendre rule of the given order.
///
/// The error bound combines the difference to the half-order rule with the
/// kernel truncation and roundoff bounds times the chamber volume.
pub fn survival_kmgr(spec: &ChamberSpec, t: f64, x: &ChamberPoint, kern: &Kernel1D, quadrature_order: usize) -> Result<SurvivalResult> {
    check_kernel(spec, t, kern)?;
    if x.spec() != spec {
        return Err(WeylError::Config("point was validated against a different chamber".into()));
    }
    if quadrature_order < 2 {
        return Err(WeylError::Config("quadrature order must be >= 2".into()));
    }
    let integrate = |n: usize| {
        let rule = GaussLegendre::new(n);
        let k = spec.k;
        let xc = x.coords();
        integrate_over_chamber(spec, &rule, &|y: &[f64]| {
            let mut buf = vec![0.0; k * k];
            density_raw(spec.weyl_type, kern, xc, y, &mut buf)
        })
    };
    let fine = integrate(quadrature_order);
    let coarse = integrate(quadrature_order / 2 + 1);
    let err = (fine - coarse).abs() + (density_truncation_bound(spec, kern) + density_roundoff_bound(spec, kern)) * spec.volume();
    Ok(SurvivalResult {
        value: fine,
        error_bound: err,
        method: Method::Kmgr,
    })
}
