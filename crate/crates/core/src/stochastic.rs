//! Monte Carlo for killed Brownian motion in `W_Z ∩ rI^k`.
//!
//! Paths take exact Gaussian increments on a time grid; a path dies at the
//! first grid point outside the domain. With bridge correction on, every
//! active wall also contributes the exact one-wall Brownian-bridge crossing
//! probability between consecutive grid points. Work is split into
//! fixed-size batches, each with its own counter-based RNG stream, and
//! batch results are combined in index order, so output does not depend on
//! the number of threads.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chamber::{ChamberPoint, ChamberSpec, WeylType};
use crate::error::{require_positive, Result, WeylError};
use crate::exec;
use crate::rng::{self, StreamRng};

/// Paths per RNG stream.
pub const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    pub antithetic: bool,
}

impl McConfig {
    /// `10⁵` paths, `dt = min(10⁻³, t/10³)`, bridge correction on.
    pub fn for_horizon(t: f64, seed: u64) -> Self {
        Self {
            paths: 100_000,
            dt: (1e-3f64).min(t / 1e3),
            seed,
            bridge_correction: true,
            antithetic: false,
        }
    }

    pub fn validate(&self, t: f64) -> Result<()> {
        require_positive("t", t)?;
        require_positive("dt", self.dt)?;
        if self.paths == 0 {
            return Err(WeylError::Config("paths must be >= 1".into()));
        }
        if self.dt > t / 10.0 * (1.0 + 1e-12) {
            return Err(WeylError::Config(format!("dt = {} exceeds t/10 = {}", self.dt, t / 10.0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub paths: u64,
    pub survivors: u64,
}

/// Allowance for the time-discretisation bias of a bridge-corrected
/// survival estimate, `0.1·√(dt)/r`. The one-wall bridge correction is
/// exact for a single flat wall; what remains comes from corners where two
/// walls meet within one step. Measured deviations from the exact routes
/// stay below `0.04·√(dt)/r` at `dt = 10⁻³`.
pub fn discretisation_allowance(dt: f64, r: f64) -> f64 {
    0.1 * dt.sqrt() / r
}

/// Linear constraint `c_i x_i + c_j x_j + offset > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Wall {
    i: usize,
    ci: f64,
    j: usize,
    cj: f64,
    offset: f64,
    /// `c_i² + c_j²`: the variance rate of the constraint value
    var: f64,
}

impl Wall {
    fn single(i: usize, c: f64, offset: f64) -> Self {
        Self {
            i,
            ci: c,
            j: i,
            cj: 0.0,
            offset,
            var: c * c,
        }
    }

    fn pair(i: usize, ci: f64, j: usize, cj: f64) -> Self {
        Self {
            i,
            ci,
            j,
            cj,
            offset: 0.0,
            var: ci * ci + cj * cj,
        }
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        self.ci * x[self.i] + self.cj * x[self.j] + self.offset
    }
}

/// The non-redundant walls of `W_Z ∩ rI^k`: faces implied by the others
/// are left out so that bridge corrections are not double counted.
pub(crate) fn walls(spec: &ChamberSpec) -> Vec<Wall> {
    let k = spec.k;
    let w = spec.half_width();
    let mut out = Vec::new();
    for i in 0..k.saturating_sub(1) {
        out.push(Wall::pair(i, -1.0, i + 1, 1.0));
    }
    match spec.weyl_type {
        WeylType::A => out.push(Wall::single(0, 1.0, w)),
        WeylType::C => out.push(Wall::single(0, 1.0, 0.0)),
        WeylType::D => out.push(Wall::pair(0, 1.0, 1, 1.0)),
    }
    out.push(Wall::single(k - 1, -1.0, w));
    out
}

/// Walls of the untruncated chamber `W_Z`.
pub(crate) fn chamber_walls(weyl_type: WeylType, k: usize) -> Vec<Wall> {
    let mut out: Vec<Wall> = (0..k.saturating_sub(1)).map(|i| Wall::pair(i, -1.0, i + 1, 1.0)).collect();
    match weyl_type {
        WeylType::A => {}
        WeylType::C => out.push(Wall::single(0, 1.0, 0.0)),
        WeylType::D => out.push(Wall::pair(0, 1.0, 1, 1.0)),
    }
    out
}

/// Importance-sampling target: the sampler follows the Doob transform of
/// Brownian motion by a positive function `φ`, whose `∇ log φ` and
/// `∇² log φ` shape each Gaussian step.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Drift {
    None,
    /// `φ = h_Z`
    Reduite(WeylType),
    /// `φ = f^Z(·/r)`, the ground state of `W_Z ∩ rI^k`
    Ground(WeylType, f64),
}

/// `∂_j log h_Z(x)` for all `j`.
pub(crate) fn grad_log_reduite(weyl_type: WeylType, x: &[f64], out: &mut [f64]) {
    let k = x.len();
    for j in 0..k {
        let mut g = 0.0;
        match weyl_type {
            WeylType::A => {
                for i in 0..k {
                    if i != j {
                        g += 1.0 / (x[j] - x[i]);
                    }
                }
            }
            WeylType::C | WeylType::D => {
                for i in 0..k {
                    if i != j {
                        g += 2.0 * x[j] / (x[j] * x[j] - x[i] * x[i]);
                    }
                }
                if weyl_type == WeylType::C {
                    g += 1.0 / x[j];
                }
            }
        }
        out[j] = g;
    }
}

impl Drift {
    /// Gradient of `log φ` at `x`.
    fn eval(&self, x: &[f64], scratch: &mut [f64], grad: &mut [f64]) {
        match *self {
            Drift::None => grad.iter_mut().for_each(|v| *v = 0.0),
            Drift::Reduite(z) => grad_log_reduite(z, x, grad),
            Drift::Ground(z, r) => {
                // log φ = log h(sin u) + Σ log cos u_j with u = x/r
                for (s, &xi) in scratch.iter_mut().zip(x) {
                    *s = (xi / r).sin();
                }
                grad_log_reduite(z, scratch, grad);
                for j in 0..x.len() {
                    let (sj, cj) = (x[j] / r).sin_cos();
                    grad[j] = (cj * grad[j] - sj / cj) / r;
                }
            }
        }
    }
}

/// Result of one simulated path.
pub(crate) struct PathOutcome {
    pub alive: bool,
    /// product of one-wall bridge survival probabilities
    pub bridge_factor: f64,
    /// log of the likelihood ratio of Brownian motion against the sampler
    pub log_weight: f64,
}

/// Work buffers for one path.
pub(crate) struct PathBuffers {
    pub x: Vec<f64>,
    grad: Vec<f64>,
    scratch: Vec<f64>,
    z: Vec<f64>,
    prev_wall: Vec<f64>,
}

impl PathBuffers {
    pub fn new(k: usize, n_walls: usize) -> Self {
        Self {
            x: vec![0.0; k],
            grad: vec![0.0; k],
            scratch: vec![0.0; k],
            z: vec![0.0; k],
            prev_wall: vec![0.0; n_walls],
        }
    }
}

/// Advances one path by a step of size `h`. Returns `None` if the new
/// point is outside the domain, else `(log likelihood ratio, bridge
/// survival probability)` of the step.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    x: &mut [f64],
    prev_wall: &mut [f64],
    h: f64,
    walls: &[Wall],
    bridge: bool,
    drift: Drift,
    rng: &mut StreamRng,
    sign: f64,
    buf: &mut PathBuffers,
) -> Option<(f64, f64)> {
    for z in buf.z.iter_mut() {
        *z = sign * rng.sample::<f64, _>(StandardNormal);
    }
    let sh = h.sqrt();
    let mut log_w = 0.0;
    if matches!(drift, Drift::None) {
        for (xj, zj) in x.iter_mut().zip(&buf.z) {
            *xj += sh * zj;
        }
    } else {
        // explicit drift step; log of the Girsanov ratio of Brownian motion
        // against the drifted step
        drift.eval(x, &mut buf.scratch, &mut buf.grad);
        for ((xj, &b), zj) in x.iter_mut().zip(&buf.grad).zip(&buf.z) {
            log_w += -0.5 * b * b * h - sh * b * zj;
            *xj += b * h + sh * zj;
        }
    }
    let mut factor = 1.0;
    for (pw, wall) in prev_wall.iter_mut().zip(walls) {
        let g = wall.value(x);
        if !(g > 0.0) {
            return None;
        }
        if bridge {
            factor *= -(-(2.0 * *pw * g) / (wall.var * h)).exp_m1();
        }
        *pw = g;
    }
    Some((log_w, factor))
}

/// Simulates one path from `x0` over the step sizes `steps`. `sign = -1`
/// replays the antithetic partner of a cloned RNG. The end point is left
/// in `buf.x`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_path(
    x0: &[f64],
    steps: &[f64],
    walls: &[Wall],
    bridge: bool,
    drift: Drift,
    rng: &mut StreamRng,
    sign: f64,
    buf: &mut PathBuffers,
) -> PathOutcome {
    let mut x = std::mem::take(&mut buf.x);
    let mut prev_wall = std::mem::take(&mut buf.prev_wall);
    x.copy_from_slice(x0);
    for (pw, wall) in prev_wall.iter_mut().zip(walls) {
        *pw = wall.value(x0);
    }
    let mut out = PathOutcome {
        alive: true,
        bridge_factor: 1.0,
        log_weight: 0.0,
    };
    for &h in steps {
        match advance(&mut x, &mut prev_wall, h, walls, bridge, drift, rng, sign, buf) {
            Some((lw, f)) => {
                out.log_weight += lw;
                out.bridge_factor *= f;
            }
            None => {
                out.alive = false;
                out.bridge_factor = 0.0;
                break;
            }
        }
    }
    buf.x = x;
    buf.prev_wall = prev_wall;
    out
}

/// Sequential Monte Carlo estimate of `E[L · bridge · 1{alive}]` with
/// `n` particles from `x0`: particles carry incremental weights and are
/// resampled (systematic) whenever the effective sample size drops below
/// `n/2`. The product of the mean weights at resampling times is an
/// unbiased estimate, and resampling stops the weight degeneracy that
/// plain importance sampling suffers over many steps.
pub(crate) fn smc_survival(x0: &[f64], steps: &[f64], walls: &[Wall], drift: Drift, n: usize, rng: &mut StreamRng) -> f64 {
    let k = x0.len();
    let nw = walls.len();
    let mut xs: Vec<f64> = x0.iter().copied().cycle().take(n * k).collect();
    let start_wall: Vec<f64> = walls.iter().map(|w| w.value(x0)).collect();
    let mut ws: Vec<f64> = start_wall.iter().copied().cycle().take(n * nw).collect();
    let mut weight = vec![1.0f64; n];
    let mut buf = PathBuffers::new(k, nw);
    let mut log_z = 0.0;
    let mut next_x = vec![0.0; n * k];
    let mut next_w = vec![0.0; n * nw];
    for &h in steps {
        for p in 0..n {
            if weight[p] == 0.0 {
                continue;
            }
            let x = &mut xs[p * k..(p + 1) * k];
            let pw = &mut ws[p * nw..(p + 1) * nw];
            weight[p] = match advance(x, pw, h, walls, true, drift, rng, 1.0, &mut buf) {
                Some((lw, f)) => weight[p] * lw.exp() * f,
                None => 0.0,
            };
        }
        let s1: f64 = weight.iter().sum();
        if !(s1 > 0.0) {
            return 0.0;
        }
        let s2: f64 = weight.iter().map(|w| w * w).sum();
        if s1 * s1 < 0.5 * n as f64 * s2 {
            log_z += (s1 / n as f64).ln();
            let u: f64 = rng.random();
            let step = s1 / n as f64;
            let mut target = u * step;
            let mut acc = 0.0;
            let mut src = 0;
            for dst in 0..n {
                while acc + weight[src] <= target && src + 1 < n {
                    acc += weight[src];
                    src += 1;
                }
                next_x[dst * k..(dst + 1) * k].copy_from_slice(&xs[src * k..(src + 1) * k]);
                next_w[dst * nw..(dst + 1) * nw].copy_from_slice(&ws[src * nw..(src + 1) * nw]);
                target += step;
            }
            std::mem::swap(&mut xs, &mut next_x);
            std::mem::swap(&mut ws, &mut next_w);
            weight.iter_mut().for_each(|w| *w = 1.0);
        }
    }
    let mean = weight.iter().sum::<f64>() / n as f64;
    if mean > 0.0 {
        (log_z + mean.ln()).exp()
    } else {
        0.0
    }
}

/// `⌈t/dt⌉` equal steps summing to `t`.
pub(crate) fn uniform_steps(t: f64, dt: f64) -> Vec<f64> {
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    vec![t / n as f64; n]
}

fn batch_sizes(paths: u64) -> Vec<u64> {
    let full = paths / BATCH;
    let mut v = vec![BATCH; full as usize];
    if !paths.is_multiple_of(BATCH) {
        v.push(paths % BATCH);
    }
    v
}

/// Indicator outcome of one path: dies on a grid violation, otherwise
/// survives the bridge factor by comparison with a uniform.
fn indicator(out: &PathOutcome, u: f64) -> bool {
    out.alive && u < out.bridge_factor
}

struct BatchCounts {
    survivors: u64,
    /// pairs with 0, 1, 2 survivors (antithetic only)
    pair_hist: [u64; 3],
}

/// `P_x(τ_{W_Z ∩ rI^k} > t)` by Monte Carlo.
///
/// The standard error is binomial, or from the pair means when antithetic
/// pairs are used (paths are then rounded up to an even count).
pub fn simulate_survival(spec: &ChamberSpec, t: f64, x: &ChamberPoint, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate(t)?;
    check_point(spec, x)?;
    let steps = uniform_steps(t, cfg.dt);
    let walls = walls(spec);
    let paths = if cfg.antithetic { cfg.paths + cfg.paths % 2 } else { cfg.paths };
    let sizes = batch_sizes(paths);
    let x0 = x.coords();
    let counts = exec::map_indexed(sizes.len(), |b| {
        let mut rng = rng::stream(cfg.seed, rng::domain::SURVIVAL, b as u64);
        let mut buf = PathBuffers::new(spec.k, walls.len());
        let mut c = BatchCounts {
            survivors: 0,
            pair_hist: [0; 3],
        };
        if cfg.antithetic {
            for _ in 0..sizes[b] / 2 {
                let mut twin = rng.clone();
                let a = run_path(x0, &steps, &walls, cfg.bridge_correction, Drift::None, &mut rng, 1.0, &mut buf);
                let ua: f64 = rng.random();
                let bo = run_path(x0, &steps, &walls, cfg.bridge_correction, Drift::None, &mut twin, -1.0, &mut buf);
                let n = indicator(&a, ua) as usize + indicator(&bo, 1.0 - ua) as usize;
                c.pair_hist[n] += 1;
                c.survivors += n as u64;
                // continue past whichever twin consumed more of the stream
                if twin.get_word_pos() > rng.get_word_pos() {
                    rng = twin;
                }
            }
        } else {
            for _ in 0..sizes[b] {
                let o = run_path(x0, &steps, &walls, cfg.bridge_correction, Drift::None, &mut rng, 1.0, &mut buf);
                let u: f64 = rng.random();
                c.survivors += indicator(&o, u) as u64;
            }
        }
        c
    });
    let survivors: u64 = counts.iter().map(|c| c.survivors).sum();
    let n = paths as f64;
    let value = survivors as f64 / n;
    let std_error = if cfg.antithetic {
        let mut hist = [0u64; 3];
        for c in &counts {
            for (h, v) in hist.iter_mut().zip(c.pair_hist) {
                *h += v;
            }
        }
        let pairs = (paths / 2) as f64;
        let m2 = (hist[1] as f64 * 0.25 + hist[2] as f64) / pairs;
        let var = (m2 - value * value).max(0.0);
        (var / pairs).sqrt()
    } else {
        (value * (1.0 - value) / n).sqrt()
    };
    Ok(McEstimate {
        value,
        std_error,
        paths,
        survivors,
    })
}

fn check_point(spec: &ChamberSpec, x: &ChamberPoint) -> Result<()> {
    if x.spec() != spec {
        return Err(WeylError::Config("point was validated against a different chamber".into()));
    }
    Ok(())
}

/// Endpoints of surviving paths, in batch order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSample {
    pub points: Vec<Vec<f64>>,
    pub attempted: u64,
    pub survivors: u64,
    /// set when fewer than the requested endpoints were found
    pub warning: Option<String>,
}

/// Rejection sampling from `P_x(B(t) ∈ · | τ_{W_Z ∩ rI^k} > t)`.
///
/// Runs batches of `cfg.paths`' budget until `want` survivors are found or
/// the budget is spent; a shortfall is reported, not padded.
pub fn sample_conditioned_endpoints(spec: &ChamberSpec, t: f64, x: &ChamberPoint, cfg: &McConfig, want: usize) -> Result<EndpointSample> {
    cfg.validate(t)?;
    check_point(spec, x)?;
    let steps = uniform_steps(t, cfg.dt);
    let walls = walls(spec);
    let sizes = batch_sizes(cfg.paths);
    let x0 = x.coords();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(want);
    let mut attempted = 0u64;
    let mut survivors = 0u64;
    // enough batches per round to keep every worker busy
    let round = 8 * rayon_width();
    let mut next = 0usize;
    'outer: while next < sizes.len() && points.len() < want {
        let hi = (next + round).min(sizes.len());
        let found = exec::map_indexed(hi - next, |off| {
            let b = next + off;
            let mut rng = rng::stream(cfg.seed, rng::domain::ENDPOINTS, b as u64);
            let mut buf = PathBuffers::new(spec.k, walls.len());
            let mut pts = Vec::new();
            for _ in 0..sizes[b] {
                let o = run_path(x0, &steps, &walls, cfg.bridge_correction, Drift::None, &mut rng, 1.0, &mut buf);
                let u: f64 = rng.random();
                if indicator(&o, u) {
                    pts.push(buf.x.clone());
                }
            }
            pts
        });
        for (off, pts) in found.into_iter().enumerate() {
            attempted += sizes[next + off];
            survivors += pts.len() as u64;
            for p in pts {
                points.push(p);
                if points.len() == want {
                    break 'outer;
                }
            }
        }
        next = hi;
    }
    let warning = if points.is_empty() {
        Some(format!("no surviving paths among {attempted}"))
    } else if points.len() < want {
        Some(format!("only {} of {want} requested endpoints after {attempted} paths", points.len()))
    } else {
        None
    };
    Ok(EndpointSample {
        points,
        attempted,
        survivors,
        warning,
    })
}

fn rayon_width() -> usize {
    #[cfg(feature = "parallel")]
    {
        // the batch partition, not the thread count, fixes the output
        if exec::policy() == exec::ExecPolicy::Parallel {
            return rayon::current_num_threads();
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(z: WeylType, k: usize, r: f64) -> ChamberSpec {
        ChamberSpec::new(z, k, r).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = McConfig::for_horizon(1.0, 1);
        assert_eq!(c.dt, 1e-3);
        assert!(c.validate(1.0).is_ok());
        c.dt = 0.2;
        assert!(c.validate(1.0).is_err());
        c.dt = 0.0;
        assert!(c.validate(1.0).is_err());
        assert_eq!(McConfig::for_horizon(0.5, 1).dt, 5e-4);
    }

    #[test]
    fn walls_cover_the_chamber() {
        for z in WeylType::ALL {
            let s = spec(z, 3, 1.0);
            let ws = walls(&s);
            for x in [[0.1, 0.5, 1.2], [-0.3, 0.5, 1.2], [0.2, 0.1, 1.0], [0.1, 0.5, 1.6], [-1.6, 0.0, 0.3]] {
                let inside = ws.iter().all(|w| w.value(&x) > 0.0);
                assert_eq!(inside, s.contains(&x).unwrap(), "{z} {x:?}");
            }
        }
    }

    #[test]
    fn reduite_gradient_matches_finite_differences() {
        let x = [0.2, 0.5, 0.9];
        for z in WeylType::ALL {
            let mut g = [0.0; 3];
            grad_log_reduite(z, &x, &mut g);
            for j in 0..3 {
                let h = 1e-6;
                let mut a = x;
                let mut b = x;
                a[j] += h;
                b[j] -= h;
                let fd = (crate::chamber::reduite(z, &a).ln() - crate::chamber::reduite(z, &b).ln()) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-6, "{z} {j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn ground_gradient_matches_log_eigenfunction() {
        let x = [0.1, 0.3, 0.6];
        let r = 0.8;
        for z in WeylType::ALL {
            let d = Drift::Ground(z, r);
            let (mut s, mut g) = ([0.0; 3], [0.0; 3]);
            d.eval(&x, &mut s, &mut g);
            let lf = |y: &[f64]| {
                let u: Vec<f64> = y.iter().map(|v| v / r).collect();
                crate::spectral::principal_eigenfunction(z, &u).unwrap().ln()
            };
            for j in 0..3 {
                let (mut a, mut b) = (x, x);
                a[j] += 1e-6;
                b[j] -= 1e-6;
                let fd = (lf(&a) - lf(&b)) / 2e-6;
                assert!((fd - g[j]).abs() < 1e-5 * (1.0 + fd.abs()), "{z} {j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn short_horizon_survives() {
        let s = spec(WeylType::A, 2, 1.0);
        let x = ChamberPoint::new(s, vec![-0.5, 0.5]).unwrap();
        let mut c = McConfig::for_horizon(1e-3, 3);
        c.paths = 2000;
        c.dt = 1e-4;
        let e = simulate_survival(&s, 1e-3, &x, &c).unwrap();
        assert_eq!(e.survivors, 2000);
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let s = spec(WeylType::C, 2, 1.0);
        let x = ChamberPoint::new(s, vec![0.3, 0.8]).unwrap();
        let mut c = McConfig::for_horizon(0.5, 11);
        c.paths = 9000;
        c.dt = 5e-3;
        let a = simulate_survival(&s, 0.5, &x, &c).unwrap();
        let b = simulate_survival(&s, 0.5, &x, &c).unwrap();
        assert_eq!(a, b);
        c.seed = 12;
        assert_ne!(simulate_survival(&s, 0.5, &x, &c).unwrap(), a);
    }

    #[test]
    fn antithetic_pairs_are_counted() {
        let s = spec(WeylType::A, 1, 1.0);
        let x = ChamberPoint::new(s, vec![0.0]).unwrap();
        let mut c = McConfig::for_horizon(1.0, 5);
        c.paths = 5001;
        c.dt = 1e-2;
        c.antithetic = true;
        let e = simulate_survival(&s, 1.0, &x, &c).unwrap();
        assert_eq!(e.paths, 5002);
        assert!(e.std_error > 0.0 && e.std_error < 0.01);
    }

    #[test]
    fn endpoints_stay_inside_and_respect_want() {
        let s = spec(WeylType::A, 2, 1.0);
        let x = ChamberPoint::new(s, vec![-0.5, 0.5]).unwrap();
        let mut c = McConfig::for_horizon(0.5, 9);
        c.paths = 20_000;
        c.dt = 5e-3;
        let e = sample_conditioned_endpoints(&s, 0.5, &x, &c, 300).unwrap();
        assert_eq!(e.points.len(), 300);
        assert!(e.warning.is_none());
        assert!(e.points.iter().all(|p| s.contains(p).unwrap()));
        let again = sample_conditioned_endpoints(&s, 0.5, &x, &c, 300).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn shortfall_is_reported() {
        let s = spec(WeylType::C, 3, 0.3);
        let x = ChamberPoint::new(s, vec![0.05, 0.1, 0.2]).unwrap();
        let mut c = McConfig::for_horizon(2.0, 9);
        c.paths = 500;
        c.dt = 1e-2;
        let e = sample_conditioned_endpoints(&s, 2.0, &x, &c, 10).unwrap();
        assert!(e.points.is_empty());
        assert!(e.warning.is_some());
    }
}
