//! Dense Hermitian eigenvalues.
//!
//! Householder reduction to Hermitian tridiagonal form, a diagonal phase
//! change to a real symmetric tridiagonal, then implicit-shift QL. The
//! matrix is first split into the connected components of its nonzero
//! pattern; marginals of constant-weight states are block diagonal by kept
//! weight, so this keeps the cubic cost on small blocks.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Eigenvalues of the `n x n` Hermitian matrix `a` (row-major), ascending.
/// Only the lower triangle is read.
pub fn hermitian_eigenvalues(n: usize, a: &[Complex64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix is not {n} x {n}");
    let mut out = Vec::with_capacity(n);
    for block in components(n, a) {
        let m = block.len();
        let mut sub = vec![Complex64::new(0.0, 0.0); m * m];
        for (i, &bi) in block.iter().enumerate() {
            for (j, &bj) in block.iter().enumerate() {
                sub[i * m + j] = if i >= j {
                    a[bi * n + bj]
                } else {
                    a[bj * n + bi].conj()
                };
            }
        }
        out.extend(dense_eigenvalues(m, sub));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Connected components of the graph with an edge wherever `a[i][j] != 0`.
fn components(n: usize, a: &[Complex64]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if a[i * n + j] != Complex64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

fn dense_eigenvalues(n: usize, mut a: Vec<Complex64>) -> Vec<f64> {
    if n == 1 {
        return vec![a[0].re];
    }
    // symmetrize from the lower triangle
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in 0..i {
            a[j * n + i] = a[i * n + j].conj();
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let norm_x = libm::sqrt((k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>());
        if norm_x == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        // v = x - alpha e_1, normalized
        v.iter_mut().for_each(|x| *x = zero);
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let nv = libm::sqrt(v[k + 1..].iter().map(|x| x.norm_sqr()).sum::<f64>());
        if nv == 0.0 {
            continue;
        }
        for x in &mut v[k + 1..] {
            *x /= nv;
        }
        // A <- A - 2 v w^H - 2 w v^H with p = A v, K = v^H p, w = p - K v
        for i in 0..n {
            p[i] = (k + 1..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let kk: Complex64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        let w: Vec<Complex64> = (0..n).map(|i| p[i] - kk * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                if delta != zero {
                    a[i * n + j] -= 2.0 * delta;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 < n {
                a[(i + 1) * n + i].norm()
            } else {
                0.0
            }
        })
        .collect();
    tridiagonal_ql(&mut d, &mut e);
    d
}

/// Implicit QL on a real symmetric tridiagonal matrix: `d` diagonal,
/// `e[i]` couples `i` and `i + 1`. Eigenvalues are left in `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 200, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
