//! Eigenfunction expansion of the killed heat kernel on `W_Z ∩ rI^k`.
//!
//! The one-dimensional Dirichlet eigenpairs on `I = (-π/2, π/2)` are
//! `λ_l = l²/2` with `√(2/π)·cos(lx)` for odd `l` and `√(2/π)·sin(lx)` for
//! even `l`. The k-dimensional eigenfunctions are prefactored determinants
//! of these, indexed by strictly increasing multi-indices with the parity
//! restriction of the chamber type.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::chamber::{reduite, ChamberPoint, ChamberSpec, WeylType};
use crate::error::{require_positive, Result, WeylError};
use crate::exec;
use crate::linalg;
use crate::special::{ln_factorial, ln_selberg};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `f_l^I(x)` without domain checks; zero outside the closed interval is
/// not enforced.
#[inline]
pub(crate) fn eigen1d_raw(l: u32, x: f64) -> f64 {
    let lx = l as f64 * x;
    if l.is_multiple_of(2) {
        SQRT_2_OVER_PI * lx.sin()
    } else {
        SQRT_2_OVER_PI * lx.cos()
    }
}

/// Normalized Dirichlet eigenfunction `f_l^I(x)` on `I = (-π/2, π/2)`.
pub fn eigen1d(l: u32, x: f64) -> Result<f64> {
    if l == 0 {
        return Err(WeylError::Config("eigen index l must be >= 1".into()));
    }
    if !(x.abs() <= FRAC_PI_2) {
        return Err(WeylError::Domain(format!("x = {x} outside [-π/2, π/2]")));
    }
    Ok(eigen1d_raw(l, x))
}

/// Eigenpair on the dilated interval `rI`: `(l²/(2r²), r^{-1/2} f_l^I(x/r))`.
pub fn eigen1d_scaled(l: u32, r: f64, x: f64) -> Result<(f64, f64)> {
    require_positive("r", r)?;
    if !(x.abs() <= r * FRAC_PI_2) {
        return Err(WeylError::Domain(format!("x = {x} outside [-rπ/2, rπ/2] with r = {r}")));
    }
    let v = eigen1d(l, x / r)?;
    let lf = l as f64;
    Ok((lf * lf / (2.0 * r * r), v / r.sqrt()))
}

/// A strictly increasing multi-index `l ∈ W_A ∩ N_Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    l: Vec<u32>,
    weyl_type: WeylType,
}

impl MultiIndex {
    pub fn new(weyl_type: WeylType, l: Vec<u32>) -> Result<Self> {
        if l.is_empty() {
            return Err(WeylError::Config("multi-index must be non-empty".into()));
        }
        if l[0] == 0 || l.windows(2).any(|w| w[0] >= w[1]) {
            return Err(WeylError::Config(format!("multi-index {l:?} must be strictly increasing positive integers")));
        }
        let ok = match weyl_type {
            WeylType::A => true,
            WeylType::C => l.iter().all(|v| v % 2 == 0),
            WeylType::D => l.iter().all(|v| v % 2 == 0) || l.iter().all(|v| v % 2 == 1),
        };
        if !ok {
            return Err(WeylError::Config(format!("multi-index {l:?} violates the parity rule of type {weyl_type}")));
        }
        Ok(Self { l, weyl_type })
    }

    /// Index of the principal eigenpair: `id`, `2·id`, `2·id - 1`.
    pub fn principal(weyl_type: WeylType, k: usize) -> Self {
        let l = (1..=k as u32)
            .map(|i| match weyl_type {
                WeylType::A => i,
                WeylType::C => 2 * i,
                WeylType::D => 2 * i - 1,
            })
            .collect();
        Self { l, weyl_type }
    }

    pub fn indices(&self) -> &[u32] {
        &self.l
    }

    pub fn weyl_type(&self) -> WeylType {
        self.weyl_type
    }

    pub fn k(&self) -> usize {
        self.l.len()
    }

    /// `Σ l_i²`, i.e. twice the eigenvalue, held exactly.
    pub fn sum_sq(&self) -> u64 {
        self.l.iter().map(|&v| (v as u64) * (v as u64)).sum()
    }

    pub fn lambda(&self) -> f64 {
        self.sum_sq() as f64 / 2.0
    }

    pub fn eigen_pair(&self) -> EigenPair {
        EigenPair {
            index: self.clone(),
            lambda: self.lambda(),
            prefactor: prefactor(self.weyl_type, self.k()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub index: MultiIndex,
    pub lambda: f64,
    pub prefactor: f64,
}

/// Normalizing prefactor of the determinant: `1`, `2^{k/2}`, `2^{(k-1)/2}`.
pub fn prefactor(weyl_type: WeylType, k: usize) -> f64 {
    match weyl_type {
        WeylType::A => 1.0,
        WeylType::C => 2f64.powf(k as f64 / 2.0),
        WeylType::D => 2f64.powf((k as f64 - 1.0) / 2.0),
    }
}

/// All multi-indices with `λ_l ≤ energy_cutoff`, ascending by eigenvalue,
/// ties broken lexicographically.
pub fn enumerate_indices(weyl_type: WeylType, k: usize, energy_cutoff: f64) -> Vec<MultiIndex> {
    if k == 0 || !(energy_cutoff >= 0.0) {
        return Vec::new();
    }
    // Σ l² ≤ 2·cutoff, compared in integers
    let max_sq = (2.0 * energy_cutoff + 1e-9).floor() as u64;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    match weyl_type {
        WeylType::A => grow(k, 1, 1, max_sq, &mut cur, &mut out),
        WeylType::C => grow(k, 2, 2, max_sq, &mut cur, &mut out),
        WeylType::D => {
            grow(k, 1, 2, max_sq, &mut cur, &mut out);
            grow(k, 2, 2, max_sq, &mut cur, &mut out);
        }
    }
    let mut idx: Vec<MultiIndex> = out.into_iter().map(|l| MultiIndex { l, weyl_type }).collect();
    idx.sort_by(|a, b| a.sum_sq().cmp(&b.sum_sq()).then_with(|| a.l.cmp(&b.l)));
    idx
}

/// Depth-first growth of increasing sequences `first, first+step, ...`
/// with a lower bound on the squared norm of the remaining entries.
fn grow(k: usize, first: u32, step: u32, budget: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let remaining = k - cur.len();
    if remaining == 0 {
        out.push(cur.clone());
        return;
    }
    let mut v = first;
    loop {
        // the smallest completion uses v, v+step, ..., v+(remaining-1)·step
        let min_rest: u64 = (0..remaining as u64)
            .map(|j| {
                let w = v as u64 + j * step as u64;
                w * w
            })
            .sum();
        if min_rest > budget {
            break;
        }
        cur.push(v);
        grow(k, v + step, step, budget - (v as u64) * (v as u64), cur, out);
        cur.pop();
        v += step;
    }
}

/// Divided differences `P[v_1..v_m]`, `m = 1..k`, of the polynomials in
/// the three-term family `P_{n+1}(v) = (a·v + b)·P_n(v) - P_{n-1}(v)`,
/// for every `n < count`. The Leibniz rule `(v·f)[v_1..v_m] =
/// v_m·f[v_1..v_m] + f[v_1..v_{m-1}]` makes the recurrence division-free,
/// so it stays accurate for nearly coincident nodes.
fn divided_difference_table(nodes: &[f64], a: f64, b: f64, p_prev: f64, p0: f64, count: usize) -> Vec<Vec<f64>> {
    let k = nodes.len();
    let mut prev = vec![0.0; k];
    let mut cur = vec![0.0; k];
    prev[0] = p_prev;
    cur[0] = p0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(cur.clone());
        let next: Vec<f64> = (0..k)
            .map(|m| {
                let shifted = if m == 0 { 0.0 } else { cur[m - 1] };
                a * (nodes[m] * cur[m] + shifted) + b * cur[m] - prev[m]
            })
            .collect();
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

/// `det[g_{l_i}(x_j)]` with `g_l = cos(l·)` (odd `l`) or `sin(l·)` (even
/// `l`), evaluated to full relative accuracy.
///
/// `g_l(x) = σ_l cos(x) U_{l-1}(sin x)` with `σ_l = (-1)^{⌊(l-1)/2⌋}` and
/// `U` the Chebyshev polynomials of the second kind, and by Newton's form
/// `det[P_i(v_j)] = ∏_{a<b}(v_b - v_a) · det[P_i[v_1..v_m]]`. Type A
/// works in `v = sin x`; types C and D have indices of one parity, so
/// `U_{l-1}` is a polynomial in `v = sin² x` (times `sin x` for even `l`)
/// obeying `U_{n+2} = (4v - 2) U_n - U_{n-2}`.
fn trig_det(weyl_type: WeylType, ls: &[u32], x: &[f64]) -> f64 {
    let k = ls.len();
    let s: Vec<f64> = x.iter().map(|v| v.sin()).collect();
    let mut scale: f64 = x.iter().map(|v| v.cos()).product();
    for &l in ls {
        if ((l - 1) / 2) % 2 == 1 {
            scale = -scale;
        }
    }
    let max_l = *ls.iter().max().expect("k >= 1") as usize;
    let (nodes, rows): (Vec<f64>, Vec<Vec<f64>>) = match weyl_type {
        WeylType::A => {
            let table = divided_difference_table(&s, 2.0, 0.0, 0.0, 1.0, max_l);
            (s, ls.iter().map(|&l| table[l as usize - 1].clone()).collect())
        }
        WeylType::C | WeylType::D => {
            let u: Vec<f64> = s.iter().map(|v| v * v).collect();
            let even = ls[0].is_multiple_of(2);
            debug_assert!(ls.iter().all(|&l| (l % 2 == 0) == even));
            // entry n of the table is U_{2n+1}/sin (even l) or U_{2n} (odd l)
            let table = if even {
                scale *= s.iter().product::<f64>();
                divided_difference_table(&u, 4.0, -2.0, 0.0, 2.0, max_l / 2)
            } else {
                divided_difference_table(&u, 4.0, -2.0, -1.0, 1.0, max_l.div_ceil(2))
            };
            (u, ls.iter().map(|&l| table[(l as usize - 1) / 2].clone()).collect())
        }
    };
    let mut vander = 1.0;
    for j in 0..k {
        for i in 0..j {
            vander *= nodes[j] - nodes[i];
        }
    }
    if vander == 0.0 || scale == 0.0 {
        return 0.0;
    }
    let mut m: Vec<f64> = rows.into_iter().flatten().collect();
    scale * vander * linalg::det_in_place(&mut m, k)
}

/// `f_l^Z(x)` without domain checks (x in the closure of the unit chamber).
pub(crate) fn eigenfunction_raw(index: &MultiIndex, x: &[f64]) -> f64 {
    let k = index.k();
    prefactor(index.weyl_type, k) * SQRT_2_OVER_PI.powi(k as i32) * trig_det(index.weyl_type, &index.l, x)
}

/// `f_l^Z(x)` on the unit chamber `W_Z ∩ I^k`.
pub fn eigenfunction(index: &MultiIndex, x: &[f64]) -> Result<f64> {
    let spec = ChamberSpec::new(index.weyl_type, index.k(), 1.0)?;
    spec.check_len(x)?;
    if let Some(msg) = spec.violation(x) {
        return Err(WeylError::Domain(msg));
    }
    Ok(eigenfunction_raw(index, x))
}

/// Principal eigenvalue `λ^Z` of `-½Δ` on `W_Z ∩ I^k`.
pub fn principal_eigenvalue(weyl_type: WeylType, k: usize) -> f64 {
    MultiIndex::principal(weyl_type, k).lambda()
}

/// `ln` of the constant in the closed form of the principal eigenfunction:
/// `2^{k²/2}`, `2^{k(k+1)}`, `2^{(2k²-1)/2}` over `π^{k/2}`.
pub fn ln_principal_constant(weyl_type: WeylType, k: usize) -> f64 {
    let k = k as f64;
    let pow2 = match weyl_type {
        WeylType::A => k * k / 2.0,
        WeylType::C => k * (k + 1.0),
        WeylType::D => (2.0 * k * k - 1.0) / 2.0,
    };
    pow2 * std::f64::consts::LN_2 - 0.5 * k * PI.ln()
}

pub(crate) fn principal_eigenfunction_raw(weyl_type: WeylType, x: &[f64]) -> f64 {
    let s: Vec<f64> = x.iter().map(|v| v.sin()).collect();
    let h = reduite(weyl_type, &s);
    let cos_prod: f64 = x.iter().map(|v| v.cos()).product();
    let mag = h * cos_prod;
    if mag == 0.0 {
        return 0.0;
    }
    mag.signum() * (ln_principal_constant(weyl_type, x.len()) + mag.abs().ln()).exp()
}

/// Closed form of the positive principal eigenfunction `f^Z` on the unit
/// chamber, `c_Z · h_Z(sin x) · ∏ cos x_i`.
pub fn principal_eigenfunction(weyl_type: WeylType, x: &[f64]) -> Result<f64> {
    let spec = ChamberSpec::new(weyl_type, x.len(), 1.0)?;
    if let Some(msg) = spec.violation(x) {
        return Err(WeylError::Domain(msg));
    }
    Ok(principal_eigenfunction_raw(weyl_type, x))
}

/// `γ(t) = -ln(1 - e^{-(t/2-7)}) - (t/2 - 7)`, defined for `t > 14`.
pub fn gamma_bound(t: f64) -> Result<f64> {
    if !(t > 14.0) {
        return Err(WeylError::Parameter {
            name: "t",
            value: t,
            constraint: "the uniform error bound needs t > 14".into(),
        });
    }
    let c = t / 2.0 - 7.0;
    Ok(-(-(-c).exp()).ln_1p() - c)
}

// ---------------------------------------------------------------------------
// Integrals of eigenfunctions

#[derive(Clone, Copy)]
enum Trig {
    Cos,
    Sin,
}

fn int_cos(p: i64, a: f64, b: f64) -> f64 {
    if p == 0 {
        b - a
    } else {
        let p = p as f64;
        ((p * b).sin() - (p * a).sin()) / p
    }
}

fn int_sin(p: i64, a: f64, b: f64) -> f64 {
    if p == 0 {
        0.0
    } else {
        let p = p as f64;
        ((p * a).cos() - (p * b).cos()) / p
    }
}

fn int_trig(kind: Trig, m: i64, a: f64, b: f64) -> f64 {
    match kind {
        Trig::Cos => int_cos(m, a, b),
        Trig::Sin => int_sin(m, a, b),
    }
}

/// `∫_a^b T1(m y) T2(n y) dy` by product-to-sum.
fn int_product(t1: Trig, m: i64, t2: Trig, n: i64, a: f64, b: f64) -> f64 {
    match (t1, t2) {
        (Trig::Cos, Trig::Cos) => 0.5 * (int_cos(m - n, a, b) + int_cos(m + n, a, b)),
        (Trig::Sin, Trig::Sin) => 0.5 * (int_cos(m - n, a, b) - int_cos(m + n, a, b)),
        (Trig::Sin, Trig::Cos) => 0.5 * (int_sin(m + n, a, b) + int_sin(m - n, a, b)),
        (Trig::Cos, Trig::Sin) => 0.5 * (int_sin(m + n, a, b) - int_sin(m - n, a, b)),
    }
}

fn trig_of(l: u32) -> Trig {
    if l.is_multiple_of(2) {
        Trig::Sin
    } else {
        Trig::Cos
    }
}

/// `∫_{a<y_1<...<y_k<b} det[g_{l_i}(y_j)] dy` with `g_l = trig(l·)` (no
/// normalization), by de Bruijn's Pfaffian identity. The skew matrix
/// entries `∫∫ sgn(y-x) g_i(x) g_j(y)` are evaluated in closed form.
fn ordered_det_integral(ls: &[u32], a: f64, b: f64) -> f64 {
    let k = ls.len();
    let n = if k.is_multiple_of(2) { k } else { k + 1 };
    let singles: Vec<f64> = ls.iter().map(|&l| int_trig(trig_of(l), l as i64, a, b)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..k {
        for j in i + 1..k {
            // ∫_a^b g_j(y) (G_i(y) - G_i(a)) dy with G_i an antiderivative of g_i
            let (li, lj) = (ls[i] as i64, ls[j] as i64);
            let (ti, tj) = (trig_of(ls[i]), trig_of(ls[j]));
            let li_f = li as f64;
            let lower = match ti {
                Trig::Cos => (li_f * a).sin() / li_f,
                Trig::Sin => -(li_f * a).cos() / li_f,
            };
            let upper_part = match ti {
                Trig::Cos => int_product(Trig::Sin, li, tj, lj, a, b) / li_f,
                Trig::Sin => -int_product(Trig::Cos, li, tj, lj, a, b) / li_f,
            };
            let below = upper_part - lower * singles[j];
            let v = 2.0 * below - singles[i] * singles[j];
            m[i * n + j] = v;
            m[j * n + i] = -v;
        }
    }
    if n > k {
        for i in 0..k {
            m[i * n + k] = singles[i];
            m[k * n + i] = -singles[i];
        }
    }
    linalg::pfaffian_in_place(&mut m, n)
}

/// `∫_{W_Z ∩ I^k} f_l^Z(y) dy` in closed form.
///
/// Type A integrates over `-π/2 < y_1 < ... < y_k < π/2`, type C over
/// `0 < y_1 < ... < π/2`. For type D the eigenfunction is odd in `y_1` when
/// all `l_i` are even (integral zero) and even when all are odd, which
/// folds the region `|y_1| < y_2` onto twice the type-C simplex.
pub fn integrate_eigenfunction(index: &MultiIndex) -> f64 {
    let k = index.k();
    let norm = SQRT_2_OVER_PI.powi(k as i32) * prefactor(index.weyl_type, k);
    let ls = &index.l;
    match index.weyl_type {
        WeylType::A => norm * ordered_det_integral(ls, -FRAC_PI_2, FRAC_PI_2),
        WeylType::C => norm * ordered_det_integral(ls, 0.0, FRAC_PI_2),
        WeylType::D => {
            if ls[0].is_multiple_of(2) {
                0.0
            } else {
                2.0 * norm * ordered_det_integral(ls, 0.0, FRAC_PI_2)
            }
        }
    }
}

/// `ln ∫_{W_Z ∩ (-1,1)^k} h_Z(s) ds` via Selberg's integral.
///
/// With `s = u^{1/2}` on the positive half line, `h_C` and `h_D` reduce to
/// `|Δ(u)|` against the weights `u^0` and `u^{-1/2}`.
pub fn ln_reduite_integral(weyl_type: WeylType, k: usize) -> f64 {
    let kf = k as f64;
    let ln2 = std::f64::consts::LN_2;
    match weyl_type {
        WeylType::A => 0.5 * kf * (kf + 1.0) * ln2 + ln_selberg(k, 1.0, 1.0, 0.5) - ln_factorial(k),
        WeylType::C => -kf * ln2 + ln_selberg(k, 1.0, 1.0, 0.5) - ln_factorial(k),
        WeylType::D => (1.0 - kf) * ln2 + ln_selberg(k, 0.5, 1.0, 0.5) - ln_factorial(k),
    }
}

/// `ln ∫ f^Z` for the principal eigenfunction. Substituting `s = sin y` in
/// the closed form turns the integral into `c_Z ∫ h_Z(s) ds`.
pub fn ln_integral_principal(weyl_type: WeylType, k: usize) -> f64 {
    ln_principal_constant(weyl_type, k) + ln_reduite_integral(weyl_type, k)
}

// ---------------------------------------------------------------------------
// Truncated expansions

/// Outcome of a truncation: the cutoff used, the certified bound on the
/// omitted part, and the number of terms summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBudget {
    pub energy_cutoff: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

impl SeriesBudget {
    /// Default cutoff `λ^Z + max(20, 40·r²/t)`.
    pub fn default_cutoff(spec: &ChamberSpec, t: f64) -> f64 {
        principal_eigenvalue(spec.weyl_type, spec.k) + (40.0 * spec.r * spec.r / t).max(20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Kmgr,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Spectral => "spectral",
            Method::Kmgr => "kmgr",
            Method::MonteCarlo => "montecarlo",
        })
    }
}

/// A probability with either a certified error bound (spectral, kmgr) or a
/// confidence half-width (Monte Carlo). Values are raw, not clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
}

impl SurvivalResult {
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub budget: SeriesBudget,
}

/// `Σ_{l ∈ P} e^{-s l²/2}` over positive integers of the given parity
/// class (`step = 1` all, `first = 1, step = 2` odd, `first = 2, step = 2`
/// even), with a rigorous geometric bound on the remainder.
fn theta_sum(s: f64, first: u32, step: u32) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    let mut l = first as f64;
    let st = step as f64;
    loop {
        let term = (-s * l * l / 2.0).exp();
        // successive ratio e^{-s(2l·st + st²)/2} is decreasing in l
        let ratio = (-s * (2.0 * l * st + st * st) / 2.0).exp();
        if term < 1e-300 || (ratio < 0.5 && term < 1e-18 * acc) {
            return acc + term / (1.0 - ratio);
        }
        acc += term;
        l += st;
    }
}

/// Certified bound on `Σ e^{-τ λ_l}` over `l ∈ W_A ∩ N_Z` with `λ_l > cutoff`.
///
/// Uses `1{λ > E} ≤ e^{θ(λ - E)}`, and that each increasing multi-index
/// appears `k!` times among unordered ones, so the sum is at most
/// `e^{-θE} Σ_P θ_P(τ-θ)^k / k!`, minimized over a grid of `θ ∈ [0, τ)`.
pub fn spectral_tail_mass(weyl_type: WeylType, k: usize, tau: f64, cutoff: f64) -> f64 {
    ln_spectral_tail_mass(weyl_type, k, tau, cutoff).exp()
}

/// `ln` of [`spectral_tail_mass`], finite where the mass itself underflows.
pub fn ln_spectral_tail_mass(weyl_type: WeylType, k: usize, tau: f64, cutoff: f64) -> f64 {
    let kf = k as f64;
    let ln_mass = |s: f64| -> f64 {
        match weyl_type {
            WeylType::A => kf * theta_sum(s, 1, 1).ln(),
            WeylType::C => kf * theta_sum(s, 2, 2).ln(),
            WeylType::D => {
                let (a, b) = (kf * theta_sum(s, 1, 2).ln(), kf * theta_sum(s, 2, 2).ln());
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            }
        }
    };
    let mut best = f64::INFINITY;
    let steps = 256;
    for j in 0..steps {
        let theta = tau * j as f64 / steps as f64;
        let b = -theta * cutoff + ln_mass(tau - theta) - ln_factorial(k);
        if b < best {
            best = b;
        }
    }
    best
}

/// Hadamard bound on `sup |f_l^Z|` over the unit chamber: each row of the
/// matrix `(f_{l_i}(x_j))_j` has Euclidean norm at most `√(2k/π)`.
pub fn eigenfunction_sup_bound(weyl_type: WeylType, k: usize) -> f64 {
    prefactor(weyl_type, k) * (2.0 * k as f64 / PI).powf(k as f64 / 2.0)
}

fn check_series_inputs(spec: &ChamberSpec, t: f64, pts: &[&ChamberPoint], cutoff: f64) -> Result<()> {
    require_positive("t", t)?;
    for p in pts {
        if p.spec() != spec {
            return Err(WeylError::Config("point was validated against a different chamber".into()));
        }
    }
    let lam = principal_eigenvalue(spec.weyl_type, spec.k);
    if !(cutoff >= lam) {
        return Err(WeylError::Budget(format!("energy cutoff {cutoff} below the principal eigenvalue {lam}")));
    }
    Ok(())
}

/// Precomputed `f_l^I(z_j)` for all `l ≤ lmax` at the points `z`.
struct EigenTable {
    k: usize,
    vals: Vec<f64>,
}

impl EigenTable {
    fn new(lmax: u32, z: &[f64]) -> Self {
        let k = z.len();
        let mut vals = vec![0.0; (lmax as usize + 1) * k];
        for l in 1..=lmax {
            for (j, &zj) in z.iter().enumerate() {
                vals[l as usize * k + j] = eigen1d_raw(l, zj);
            }
        }
        Self { k, vals }
    }

    fn eigenfunction(&self, index: &MultiIndex, buf: &mut [f64]) -> f64 {
        let k = self.k;
        for (i, &l) in index.l.iter().enumerate() {
            buf[i * k..(i + 1) * k].copy_from_slice(&self.vals[l as usize * k..(l as usize + 1) * k]);
        }
        prefactor(index.weyl_type, k) * linalg::det_in_place(buf, k)
    }
}

fn max_l(indices: &[MultiIndex]) -> u32 {
    indices.iter().flat_map(|m| m.l.iter().copied()).max().unwrap_or(1)
}

/// Sums the terms in fixed order and attaches the error budget: the tail
/// bound, the uniform large-time bound when `τ > 14`, and a roundoff allowance.
fn finish_series(terms: &[f64], spec: &ChamberSpec, tau: f64, cutoff: f64, tail_scale: f64) -> SeriesValue {
    let value = exec::pairwise_sum(terms);
    let sum_abs: f64 = terms.iter().map(|t| t.abs()).sum();
    let mut tail = tail_scale * spectral_tail_mass(spec.weyl_type, spec.k, tau, cutoff);
    if let (Ok(g), Some(lead)) = (gamma_bound(tau), terms.first()) {
        // all non-principal terms together are at most e^{kγ}·(leading term)
        tail = tail.min((spec.k as f64 * g).exp() * lead.abs());
    }
    let roundoff = 64.0 * f64::EPSILON * (spec.k as f64 + 1.0) * sum_abs;
    SeriesValue {
        value,
        error_bound: tail + roundoff,
        budget: SeriesBudget {
            energy_cutoff: cutoff,
            tail_bound: tail,
            terms_used: terms.len(),
        },
    }
}

/// Truncated expansion of the transition density of Brownian motion killed
/// on leaving `W_Z ∩ rI^k`:
/// `Σ e^{-t λ_l / r²} r^{-k} f_l(x/r) f_l(y/r)` over `λ_l ≤ energy_cutoff`.
pub fn transition_density_spectral(spec: &ChamberSpec, t: f64, x: &ChamberPoint, y: &ChamberPoint, energy_cutoff: f64) -> Result<SeriesValue> {
    check_series_inputs(spec, t, &[x, y], energy_cutoff)?;
    let indices = enumerate_indices(spec.weyl_type, spec.k, energy_cutoff);
    let tau = t / (spec.r * spec.r);
    let k = spec.k;
    let lmax = max_l(&indices);
    let tx = EigenTable::new(lmax, &x.unit_scaled());
    let ty = EigenTable::new(lmax, &y.unit_scaled());
    let scale = spec.r.powi(-(k as i32));
    let mut buf = vec![0.0; k * k];
    let terms: Vec<f64> = indices
        .iter()
        .map(|idx| {
            let fx = tx.eigenfunction(idx, &mut buf);
            let fy = ty.eigenfunction(idx, &mut buf);
            (-tau * idx.lambda()).exp() * scale * fx * fy
        })
        .collect();
    let b = eigenfunction_sup_bound(spec.weyl_type, k);
    Ok(finish_series(&terms, spec, tau, energy_cutoff, scale * b * b))
}

/// Truncated expansion of `P_x(τ_{W_Z ∩ rI^k} > t)`:
/// `Σ e^{-t λ_l / r²} f_l(x/r) ∫ f_l`.
///
/// The tail uses `|∫ f_l| ≤ √vol` (Cauchy–Schwarz with `‖f_l‖₂ = 1`).
pub fn survival_spectral(spec: &ChamberSpec, t: f64, x: &ChamberPoint, energy_cutoff: f64) -> Result<SurvivalResult> {
    Ok(survival_spectral_series(spec, t, x, energy_cutoff)?.into_result())
}

impl SeriesValue {
    pub fn into_result(self) -> SurvivalResult {
        SurvivalResult {
            value: self.value,
            error_bound: self.error_bound,
            method: Method::Spectral,
        }
    }
}

/// As [`survival_spectral`], also returning the budget.
pub fn survival_spectral_series(spec: &ChamberSpec, t: f64, x: &ChamberPoint, energy_cutoff: f64) -> Result<SeriesValue> {
    check_series_inputs(spec, t, &[x], energy_cutoff)?;
    let indices = enumerate_indices(spec.weyl_type, spec.k, energy_cutoff);
    let tau = t / (spec.r * spec.r);
    let k = spec.k;
    let tx = EigenTable::new(max_l(&indices), &x.unit_scaled());
    let integrals = exec::map_indexed(indices.len(), |i| integrate_eigenfunction(&indices[i]));
    let mut buf = vec![0.0; k * k];
    let terms: Vec<f64> = indices
        .iter()
        .zip(&integrals)
        .map(|(idx, int)| (-tau * idx.lambda()).exp() * tx.eigenfunction(idx, &mut buf) * int)
        .collect();
    let b = eigenfunction_sup_bound(spec.weyl_type, k);
    Ok(finish_series(&terms, spec, tau, energy_cutoff, b * spec.unit().volume().sqrt()))
}

/// Leading term `e^{-tλ^Z/r²} f^Z(x/r) ∫ f^Z` of the survival expansion.
pub fn survival_leading_term(spec: &ChamberSpec, t: f64, x: &ChamberPoint) -> f64 {
    let tau = t / (spec.r * spec.r);
    let z = x.unit_scaled();
    (-tau * principal_eigenvalue(spec.weyl_type, spec.k)).exp()
        * principal_eigenfunction_raw(spec.weyl_type, &z)
        * ln_integral_principal(spec.weyl_type, spec.k).exp()
}

/// `P_x(τ > t)` divided by its leading term, with the principal exponent
/// factored out so that the ratio stays finite when both underflow. The
/// error bound is relative to the leading term.
pub fn survival_ratio_to_leading(spec: &ChamberSpec, t: f64, x: &ChamberPoint, energy_cutoff: f64) -> Result<SeriesValue> {
    check_series_inputs(spec, t, &[x], energy_cutoff)?;
    let indices = enumerate_indices(spec.weyl_type, spec.k, energy_cutoff);
    let tau = t / (spec.r * spec.r);
    let z = x.unit_scaled();
    let lam = indices[0].lambda();
    let integrals = exec::map_indexed(indices.len(), |i| integrate_eigenfunction(&indices[i]));
    let raw: Vec<f64> = indices
        .iter()
        .zip(&integrals)
        .map(|(idx, int)| (-tau * (idx.lambda() - lam)).exp() * eigenfunction_raw(idx, &z) * int)
        .collect();
    let lead = raw[0];
    if lead == 0.0 || !lead.is_finite() {
        return Err(WeylError::Numerical("leading term vanishes at x".into()));
    }
    let terms: Vec<f64> = raw.iter().map(|v| v / lead).collect();
    let value = exec::pairwise_sum(&terms);
    let sum_abs: f64 = terms.iter().map(|v| v.abs()).sum();
    let b = eigenfunction_sup_bound(spec.weyl_type, spec.k);
    let ln_scale = (b * spec.unit().volume().sqrt()).ln() - lead.abs().ln() + tau * lam;
    let mut tail = (ln_scale + ln_spectral_tail_mass(spec.weyl_type, spec.k, tau, energy_cutoff)).exp();
    if let Ok(g) = gamma_bound(tau) {
        tail = tail.min((spec.k as f64 * g).exp());
    }
    let roundoff = 64.0 * f64::EPSILON * (spec.k as f64 + 1.0) * sum_abs;
    Ok(SeriesValue {
        value,
        error_bound: tail + roundoff,
        budget: SeriesBudget {
            energy_cutoff,
            tail_bound: tail,
            terms_used: terms.len(),
        },
    })
}
