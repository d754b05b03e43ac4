//! Dense symmetric eigendecomposition: Householder tridiagonalization followed by the
//! implicit QL algorithm (the EISPACK `tred2`/`tql2` pair).
//!
//! Matrices are stored column-major so that every inner loop walks contiguous memory.

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, hypot, sqrt};

/// Eigenpairs of a symmetric matrix, sorted by eigenvalue descending.
pub(crate) struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column-major `n x n`; column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

/// Decomposes the symmetric `n x n` matrix given column-major (equivalently row-major).
///
/// Ties keep the order QL produced them in after a stable descending sort.
pub(crate) fn symmetric_eigen(matrix: Vec<f64>, n: usize) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return SymmetricEigen { values: Vec::new(), vectors: Vec::new(), n };
    }
    let mut v = matrix;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let mut vectors = vec![0.0; n * n];
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(d[src]);
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&v[src * n..(src + 1) * n]);
    }
    SymmetricEigen { values, vectors, n }
}

#[inline]
fn at(n: usize, row: usize, col: usize) -> usize {
    col * n + row
}

fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += fabs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = 0.0;
                v[at(n, j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                g = e[j] + v[at(n, j, j)] * f;
                let col = &v[j * n..(j + 1) * n];
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v[j * n..(j + 1) * n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate the transformations
    for i in 0..n - 1 {
        v[at(n, n - 1, i)] = v[at(n, i, i)];
        v[at(n, i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(n, k, i + 1)] * v[at(n, k, j)];
                }
                let col = &mut v[j * n..(j + 1) * n];
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(n, k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
        v[at(n, n - 1, j)] = 0.0;
    }
    v[at(n, n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n {
            if fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_next = &mut hi[..n];
                    for k in 0..n {
                        let h = col_next[k];
                        col_next[k] = s * col_i[k] + c * h;
                        col_i[k] = c * col_i[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], eig: &SymmetricEigen) -> f64 {
        let n = eig.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let x = eig.vector(j);
            for r in 0..n {
                let ax: f64 = (0..n).map(|c| a[r * n + c] * x[c]).sum();
                worst = worst.max((ax - eig.values[j] * x[r]).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0];
        let eig = symmetric_eigen(a.clone(), 3);
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert!(residual(&a, &eig) < 1e-14);
    }

    #[test]
    fn dense_symmetric_residual_and_orthogonality() {
        let n = 9;
        let mut a = vec![0.0; n * n];
        let mut state = 12345u64;
        for r in 0..n {
            for c in 0..=r {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                a[r * n + c] = x;
                a[c * n + r] = x;
            }
        }
        let eig = symmetric_eigen(a.clone(), n);
        assert!(residual(&a, &eig) < 1e-12);
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = eig.vector(i).iter().zip(eig.vector(j)).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn one_by_one() {
        let eig = symmetric_eigen(vec![4.0], 1);
        assert_eq!(eig.values, vec![4.0]);
        assert_eq!(eig.vector(0), &[1.0]);
    }
}
