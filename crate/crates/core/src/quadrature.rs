//! Gauss–Legendre rules, iterated integration over ordered regions, and an
//! adaptive Gauss–Kronrod integrator for one-dimensional integrals.

use crate::exec;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule on [-1, 1], nodes by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pnm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

/// Iterated tensor-product integration over a region described by nested
/// limits: variable `i` ranges over `limits(i, &vars[..i])`.
///
/// The outermost loop runs through [`exec::map_indexed`]; partial sums are
/// combined in node order so the result is independent of scheduling.
pub fn integrate_nested<L, F>(rule: &GaussLegendre, dims: usize, limits: &L, f: &F) -> f64
where
    L: Fn(usize, &[f64]) -> (f64, f64) + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dims == 0 {
        return f(&[]);
    }
    let (a, b) = limits(0, &[]);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    if h <= 0.0 {
        return 0.0;
    }
    let parts = exec::map_indexed(rule.len(), |q| {
        let mut vars = vec![0.0; dims];
        vars[0] = c + h * rule.nodes[q];
        rule.weights[q] * h * inner(rule, dims, 1, &mut vars, limits, f)
    });
    parts.iter().sum()
}

fn inner<L, F>(rule: &GaussLegendre, dims: usize, level: usize, vars: &mut [f64], limits: &L, f: &F) -> f64
where
    L: Fn(usize, &[f64]) -> (f64, f64),
    F: Fn(&[f64]) -> f64,
{
    if level == dims {
        return f(vars);
    }
    let (a, b) = limits(level, &vars[..level]);
    if b <= a {
        return 0.0;
    }
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        vars[level] = c + h * x;
        acc += w * inner(rule, dims, level + 1, vars, limits, f);
    }
    acc * h
}

/// Iterated integral over the ordered simplex `lo < y_1 < ... < y_k < hi`.
pub fn integrate_ordered<F>(rule: &GaussLegendre, k: usize, lo: f64, hi: f64, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let limits = move |i: usize, prev: &[f64]| if i == 0 { (lo, hi) } else { (prev[i - 1], hi) };
    integrate_nested(rule, k, &limits, f)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature. Returns the estimate
/// and the summed Kronrod–Gauss error estimate.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let mut pieces = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= abs_tol || pieces.len() >= max_intervals {
            break;
        }
        let (idx, _) = pieces.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = pieces.iter().map(|p| p.2).sum();
    let err = pieces.iter().map(|p| p.3).sum();
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the limit for 5 points
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(8) + x.powi(9));
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ordered_simplex_volume() {
        let rule = GaussLegendre::new(4);
        // vol{0<y1<y2<y3<1} = 1/6
        let v = integrate_ordered(&rule, 3, 0.0, 1.0, &|_| 1.0);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn ordered_vandermonde_integral() {
        // ∫_{-1<y1<y2<1} (y2 - y1) dy = 4/3
        let rule = GaussLegendre::new(4);
        let v = integrate_ordered(&rule, 2, -1.0, 1.0, &|y| y[1] - y[0]);
        assert!((v - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 1/sqrt(x) dx = 2
        let (v, _) = adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 2000);
        assert!((v - 2.0).abs() < 1e-7);
        let (s, e) = adaptive(f64::sin, 0.0, std::f64::consts::PI, 1e-13, 100);
        assert!((s - 2.0).abs() < 1e-12 && e < 1e-12);
    }
}
