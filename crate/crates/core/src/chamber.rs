//! Chamber geometry: the Weyl chambers of types A, C, D intersected with the
//! box `rI^k`, `I = (-π/2, π/2)`, together with their réduites.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result, WeylError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeylType {
    A,
    C,
    D,
}

impl WeylType {
    pub const ALL: [WeylType; 3] = [WeylType::A, WeylType::C, WeylType::D];
}

impl fmt::Display for WeylType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeylType::A => "A",
            WeylType::C => "C",
            WeylType::D => "D",
        })
    }
}

impl FromStr for WeylType {
    type Err = WeylError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(WeylType::A),
            "C" | "c" => Ok(WeylType::C),
            "D" | "d" => Ok(WeylType::D),
            other => Err(WeylError::Config(format!("unknown Weyl type `{other}` (expected A, C or D)"))),
        }
    }
}

/// The domain `W_Z ∩ rI^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberSpec {
    pub weyl_type: WeylType,
    pub k: usize,
    pub r: f64,
}

impl ChamberSpec {
    /// Type D is only defined here for `k >= 2`; at `k = 1` the ordering
    /// constraint `|x_1| < x_2` has nothing to compare against.
    pub fn new(weyl_type: WeylType, k: usize, r: f64) -> Result<Self> {
        if k == 0 {
            return Err(WeylError::Config("dimension k must be at least 1".into()));
        }
        require_positive("r", r)?;
        if weyl_type == WeylType::D && k == 1 {
            return Err(WeylError::Unsupported("type D requires k >= 2".into()));
        }
        Ok(Self { weyl_type, k, r })
    }

    pub fn half_width(&self) -> f64 {
        self.r * FRAC_PI_2
    }

    /// The same chamber with `r = 1`.
    pub fn unit(&self) -> Self {
        Self { r: 1.0, ..*self }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_len(x)?;
        Ok(self.violation(x).is_none())
    }

    pub(crate) fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.k {
            return Err(WeylError::Dimension {
                expected: self.k,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// First violated constraint, described for error messages. Boundary
    /// points count as violations since the chambers are open.
    pub fn violation(&self, x: &[f64]) -> Option<String> {
        let w = self.half_width();
        for (i, &xi) in x.iter().enumerate() {
            if !xi.is_finite() {
                return Some(format!("x_{} is not finite", i + 1));
            }
            if xi.abs() >= w {
                return Some(format!("|x_{}| = {} must be < r·π/2 = {}", i + 1, xi.abs(), w));
            }
        }
        match self.weyl_type {
            WeylType::C if x[0] <= 0.0 => return Some(format!("0 < x_1 violated (x_1 = {})", x[0])),
            WeylType::D if x.len() >= 2 && x[0].abs() >= x[1] => return Some(format!("|x_1| < x_2 violated (x_1 = {}, x_2 = {})", x[0], x[1])),
            _ => {}
        }
        let start = if self.weyl_type == WeylType::D { 1 } else { 0 };
        for i in start..x.len().saturating_sub(1) {
            if x[i] >= x[i + 1] {
                return Some(format!("x_{} < x_{} violated ({} >= {})", i + 1, i + 2, x[i], x[i + 1]));
            }
        }
        None
    }

    /// Volume of `W_Z ∩ rI^k`.
    pub fn volume(&self) -> f64 {
        let k = self.k as i32;
        let kf = crate::special::factorial(self.k);
        let side = self.r * std::f64::consts::PI;
        match self.weyl_type {
            WeylType::A => side.powi(k) / kf,
            WeylType::C => (0.5 * side).powi(k) / kf,
            WeylType::D => 2.0 * (0.5 * side).powi(k) / kf,
        }
    }
}

/// A validated point of `W_Z ∩ rI^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberPoint {
    coords: Vec<f64>,
    spec: ChamberSpec,
}

impl ChamberPoint {
    pub fn new(spec: ChamberSpec, coords: Vec<f64>) -> Result<Self> {
        spec.check_len(&coords)?;
        if let Some(msg) = spec.violation(&coords) {
            return Err(WeylError::Domain(msg));
        }
        Ok(Self { coords, spec })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spec(&self) -> &ChamberSpec {
        &self.spec
    }

    /// The point `x/r` in the unit chamber.
    pub fn unit_scaled(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x / self.spec.r).collect()
    }
}

/// Iterated Gauss–Legendre integral of `f` over `W_Z ∩ rI^k`.
///
/// Types A and C integrate the ordered simplex directly. For type D the
/// outer variable is `y_2 ∈ (0, w)`, then `y_1 ∈ (-y_2, y_2)`, then
/// `y_3 < ... < y_k` above `y_2`; `f` always receives coordinates in
/// their natural order.
pub fn integrate_over_chamber<F>(spec: &ChamberSpec, rule: &crate::quadrature::GaussLegendre, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let w = spec.half_width();
    let k = spec.k;
    match spec.weyl_type {
        WeylType::A => crate::quadrature::integrate_ordered(rule, k, -w, w, f),
        WeylType::C => crate::quadrature::integrate_ordered(rule, k, 0.0, w, f),
        WeylType::D => {
            let limits = |i: usize, prev: &[f64]| match i {
                0 => (0.0, w),
                1 => (-prev[0], prev[0]),
                2 => (prev[0], w),
                _ => (prev[i - 1], w),
            };
            let g = |vars: &[f64]| {
                let mut y = vars.to_vec();
                y.swap(0, 1);
                f(&y)
            };
            crate::quadrature::integrate_nested(rule, k, &limits, &g)
        }
    }
}

/// `∏_{i<j} (x_j - x_i)`.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for j in 1..x.len() {
        for i in 0..j {
            p *= x[j] - x[i];
        }
    }
    p
}

/// `Σ_{i<j} log|x_j - x_i|`; `-inf` on coincident coordinates.
pub fn log_abs_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 1..x.len() {
        for i in 0..j {
            s += (x[j] - x[i]).abs().ln();
        }
    }
    s
}

/// The réduite `h_Z`.
pub fn reduite(weyl_type: WeylType, x: &[f64]) -> f64 {
    match weyl_type {
        WeylType::A => vandermonde(x),
        WeylType::D => h_d(x),
        WeylType::C => h_d(x) * x.iter().product::<f64>(),
    }
}

fn h_d(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for j in 1..x.len() {
        for i in 0..j {
            p *= x[j] * x[j] - x[i] * x[i];
        }
    }
    p
}

/// Polynomial degree of `h_Z`.
pub fn reduite_degree(weyl_type: WeylType, k: usize) -> usize {
    match weyl_type {
        WeylType::A => k * (k - 1) / 2,
        WeylType::C => k * k,
        WeylType::D => k * (k - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(z: WeylType, k: usize, r: f64) -> ChamberSpec {
        ChamberSpec::new(z, k, r).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(spec(WeylType::A, 2, 1.0).contains(&[0.1, 0.5]).unwrap());
        assert!(!spec(WeylType::C, 2, 1.0).contains(&[-0.1, 0.5]).unwrap());
        assert!(spec(WeylType::D, 2, 1.0).contains(&[-0.1, 0.5]).unwrap());
    }

    #[test]
    fn membership_errors_and_boundaries() {
        let s = spec(WeylType::A, 2, 1.0);
        assert!(matches!(s.contains(&[0.1]), Err(WeylError::Dimension { expected: 2, actual: 1 })));
        assert!(!s.contains(&[0.2, 0.2]).unwrap());
        assert!(!s.contains(&[0.0, FRAC_PI_2]).unwrap());
        assert!(!spec(WeylType::C, 1, 1.0).contains(&[0.0]).unwrap());
        assert!(!spec(WeylType::D, 2, 1.0).contains(&[-0.5, 0.5]).unwrap());
        assert!(ChamberSpec::new(WeylType::D, 1, 1.0).is_err());
        assert!(ChamberSpec::new(WeylType::A, 0, 1.0).is_err());
        assert!(ChamberSpec::new(WeylType::A, 2, 0.0).is_err());
    }

    #[test]
    fn reduite_examples() {
        assert_eq!(reduite(WeylType::A, &[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(reduite(WeylType::C, &[1.0, 2.0]), 6.0);
        assert_eq!(reduite(WeylType::D, &[1.0, 2.0]), 3.0);
        assert_eq!(vandermonde(&[0.0]), 1.0);
        assert_eq!(vandermonde(&[3.0, 2.0, 1.0]), -2.0);
    }

    #[test]
    fn reduite_matches_determinant_form() {
        // h_A(x) = det[x_i^{j-1}]
        let x: [f64; 4] = [-0.7, 0.1, 0.4, 1.3];
        let n = x.len();
        let m: Vec<f64> = (0..n * n).map(|idx| x[idx / n].powi((idx % n) as i32)).collect();
        let d = crate::linalg::det(&m, n);
        assert!((d - reduite(WeylType::A, &x)).abs() < 1e-12);
    }

    #[test]
    fn reduite_vanishes_on_boundary_and_is_positive_inside() {
        let pts = [
            (WeylType::A, vec![0.3, 0.3, 0.9]),
            (WeylType::C, vec![0.0, 0.4, 0.9]),
            (WeylType::D, vec![-0.4, 0.4, 0.9]),
        ];
        for (z, x) in pts {
            assert_eq!(reduite(z, &x), 0.0);
            let mut y = x.clone();
            // nudge the coordinate sitting on the wall into the interior
            let at = if z == WeylType::C { 0 } else { 1 };
            y[at] += 1e-3;
            assert!(spec(z, 3, 1.0).contains(&y).unwrap());
            assert!(reduite(z, &y) > 0.0, "{z} {y:?}");
        }
    }

    #[test]
    fn chamber_volumes_by_quadrature() {
        let rule = crate::quadrature::GaussLegendre::new(6);
        for z in WeylType::ALL {
            let s = spec(z, 3, 0.7);
            let v = integrate_over_chamber(&s, &rule, &|_| 1.0);
            assert!((v - s.volume()).abs() < 1e-12, "{z}: {v} vs {}", s.volume());
            // a non-symmetric integrand checks the coordinate order for D
            let m = integrate_over_chamber(&s, &rule, &|y| y[0] + 2.0 * y[1]);
            let brute = brute_moment(&s);
            // the grid rule has O(h) boundary bias, the D swap error is O(1)
            assert!((m - brute).abs() < 3e-2, "{z}: {m} vs {brute}");
        }
    }

    fn brute_moment(s: &ChamberSpec) -> f64 {
        // midpoint rule on a fine grid of the bounding box
        let n = 120;
        let w = s.half_width();
        let h = 2.0 * w / n as f64;
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let y = [-w + (a as f64 + 0.5) * h, -w + (b as f64 + 0.5) * h, -w + (c as f64 + 0.5) * h];
                    if s.contains(&y).unwrap() {
                        acc += y[0] + 2.0 * y[1];
                    }
                }
            }
        }
        acc * h * h * h
    }

    proptest! {
        #[test]
        fn vandermonde_is_antisymmetric(xs in prop::collection::vec(-2.0f64..2.0, 2..6), i in 0usize..6, j in 0usize..6) {
            let n = xs.len();
            let (i, j) = (i % n, j % n);
            prop_assume!(i != j);
            let mut ys = xs.clone();
            ys.swap(i, j);
            let a = vandermonde(&xs);
            let b = vandermonde(&ys);
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn reduite_identities(xs in prop::collection::vec(-1.5f64..1.5, 1..6)) {
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let hd = reduite(WeylType::D, &xs);
            let ha_sq = reduite(WeylType::A, &sq);
            prop_assert!((hd - ha_sq).abs() <= 1e-12 * hd.abs().max(1.0));
            let hc = reduite(WeylType::C, &xs);
            let prod: f64 = xs.iter().product();
            prop_assert!((hc - hd * prod).abs() <= 1e-12 * hc.abs().max(1.0));
        }

        #[test]
        fn membership_is_scale_invariant(xs in prop::collection::vec(-2.0f64..2.0, 3), r in 0.2f64..3.0, z in 0usize..3) {
            let z = WeylType::ALL[z];
            let scaled: Vec<f64> = xs.iter().map(|x| x / r).collect();
            prop_assert_eq!(spec(z, 3, r).contains(&xs).unwrap(), spec(z, 3, 1.0).contains(&scaled).unwrap());
        }
    }
}
