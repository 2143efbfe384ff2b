//! Small dense kernels: determinants and Pfaffians of k×k matrices stored
//! row-major in a flat slice.

/// Determinant by Gaussian elimination with partial pivoting.
/// The input buffer is overwritten.
pub fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor != 0.0 {
                for j in col + 1..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
            }
        }
    }
    det
}

pub fn det(a: &[f64], n: usize) -> f64 {
    let mut buf = a.to_vec();
    det_in_place(&mut buf, n)
}

/// Pfaffian of a skew-symmetric matrix (n even) by the pivoted
/// Parlett–Reid reduction. The input buffer is overwritten.
pub fn pfaffian_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    if n % 2 == 1 {
        return 0.0;
    }
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot on the largest entry of column k below the diagonal
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].abs();
        for i in k + 2..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        let piv = a[k * n + k + 1];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[k * n + j] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[i * n + k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[i * n + j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

pub fn pfaffian(a: &[f64], n: usize) -> f64 {
    let mut buf = a.to_vec();
    pfaffian_in_place(&mut buf, n)
}

/// Least-squares solution of `A c ≈ b` for a row-major `m × n` matrix
/// (`m ≥ n`) by Householder QR. Returns `None` if `A` is rank deficient.
pub fn least_squares(a: &[f64], m: usize, n: usize, b: &[f64]) -> Option<Vec<f64>> {
    assert!(m >= n && a.len() == m * n && b.len() == m);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for j in 0..n {
        let norm = (j..m).map(|i| a[i * n + j].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[j * n + j] > 0.0 { -norm } else { norm };
        // v = x - alpha e_1, stored in place of column j
        a[j * n + j] -= alpha;
        let vv: f64 = (j..m).map(|i| a[i * n + j].powi(2)).sum();
        for c in j + 1..n {
            let dot: f64 = (j..m).map(|i| a[i * n + j] * a[i * n + c]).sum();
            let f = 2.0 * dot / vv;
            for i in j..m {
                a[i * n + c] -= f * a[i * n + j];
            }
        }
        let dot: f64 = (j..m).map(|i| a[i * n + j] * b[i]).sum();
        let f = 2.0 * dot / vv;
        for i in j..m {
            b[i] -= f * a[i * n + j];
        }
        a[j * n + j] = alpha;
    }
    let scale = (0..n).map(|j| a[j * n + j].abs()).fold(0.0, f64::max);
    let mut c = vec![0.0; n];
    for j in (0..n).rev() {
        let d = a[j * n + j];
        if d.abs() <= 1e-14 * scale {
            return None;
        }
        let s: f64 = (j + 1..n).map(|l| a[j * n + l] * c[l]).sum();
        c[j] = (b[j] - s) / d;
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leibniz_det(a: &[f64], n: usize) -> f64 {
        fn perms(n: usize) -> Vec<(Vec<usize>, f64)> {
            if n == 0 {
                return vec![(vec![], 1.0)];
            }
            let mut out = Vec::new();
            for (p, s) in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    // inserting at pos from the end moves past (len - pos) elements
                    let sign = if (p.len() - pos) % 2 == 0 { s } else { -s };
                    out.push((q, sign));
                }
            }
            out
        }
        perms(n).into_iter().map(|(p, s)| s * (0..n).map(|i| a[i * n + p[i]]).product::<f64>()).sum()
    }

    #[test]
    fn det_matches_leibniz_expansion() {
        let n = 4;
        let a: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        assert!((det(&a, n) - leibniz_det(&a, n)).abs() < 1e-9);
    }

    #[test]
    fn singular_matrix_has_zero_det() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(det(&a, 2), 0.0);
    }

    #[test]
    fn pfaffian_squared_is_det() {
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = ((i * 5 + j * 3) % 7) as f64 - 2.5;
                a[i * n + j] = v;
                a[j * n + i] = -v;
            }
        }
        let pf = pfaffian(&a, n);
        assert!((pf * pf - det(&a, n)).abs() < 1e-8 * det(&a, n).abs().max(1.0));
    }

    #[test]
    fn pfaffian_4x4_closed_form() {
        // pf = a01 a23 - a02 a13 + a03 a12
        let (a01, a02, a03, a12, a13, a23) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let a = [0.0, a01, a02, a03, -a01, 0.0, a12, a13, -a02, -a12, 0.0, a23, -a03, -a13, -a23, 0.0];
        let expect = a01 * a23 - a02 * a13 + a03 * a12;
        assert!((pfaffian(&a, 4) - expect).abs() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 7.0).collect();
        let a: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x, x * x]).collect();
        let b: Vec<f64> = xs.iter().map(|&x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let c = least_squares(&a, 20, 3, &b).unwrap();
        for (got, want) in c.iter().zip([2.0, -3.0, 0.5]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(least_squares(&[1.0, 2.0, 2.0, 4.0], 2, 2, &[1.0, 1.0]).is_none());
    }
}
