//! Eigendecomposition of small dense Hermitian matrices.
//!
//! The matrix is first split into the connected components of its nonzero
//! pattern (exactly block-diagonal inputs are common here: measured registers,
//! GHZ-type mixtures). Each block is reduced to a real symmetric tridiagonal
//! matrix by complex Householder reflections followed by a diagonal phase
//! change, and the tridiagonal problem is solved by implicit QL iteration.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::VALIDITY_TOL;
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// All eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let mut values = Vec::with_capacity(h.rows());
    for block in connected_blocks(h) {
        if block.len() == 1 {
            values.push(h[(block[0], block[0])].re);
            continue;
        }
        let sub = extract_block(h, &block);
        let (vals, _) = tridiagonal_eigen(sub, block.len(), false)?;
        values.extend(vals);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.rows();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
    for block in connected_blocks(h) {
        let m = block.len();
        let sub = extract_block(h, &block);
        let (vals, vecs) = tridiagonal_eigen(sub, m, true)?;
        let vecs = vecs.expect("vectors requested");
        for (c, &val) in vals.iter().enumerate() {
            let mut full = vec![Complex64::new(0.0, 0.0); n];
            for (r, &idx) in block.iter().enumerate() {
                full[idx] = vecs[r * m + c];
            }
            pairs.push((val, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (c, (_, v)) in pairs.iter().enumerate() {
        for (r, &z) in v.iter().enumerate() {
            vectors[(r, c)] = z;
        }
    }
    Ok(HermitianEigen {
        values: pairs.into_iter().map(|p| p.0).collect(),
        vectors,
    })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.iter().map(|x| x.abs()).sum())
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare(h.rows(), h.cols()));
    }
    let err = h.hermiticity_error();
    if err > VALIDITY_TOL {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Index sets of the connected components of the nonzero pattern.
fn connected_blocks(h: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = h.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if h[(i, j)].norm_sqr() > 0.0 || h[(j, i)].norm_sqr() > 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots[r] {
            Some(b) => blocks[b].push(i),
            None => {
                roots[r] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

/// Row-major copy of the Hermitian part of `h` restricted to `idx`.
fn extract_block(h: &ComplexMatrix, idx: &[usize]) -> Vec<Complex64> {
    let m = idx.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[r * m + c] = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        }
    }
    out
}

/// Householder tridiagonalization + implicit QL. Returns ascending-unsorted
/// eigenvalues and optionally the row-major eigenvector matrix (columns).
fn tridiagonal_eigen(
    mut a: Vec<Complex64>,
    n: usize,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<Complex64>>)> {
    let zero = Complex64::new(0.0, 0.0);
    let mut q: Vec<Complex64> = if want_vectors {
        let mut q = vec![zero; n * n];
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
        q
    } else {
        Vec::new()
    };

    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let m = n - lo;
        let tail: f64 = ((lo + 1)..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[lo * n + k];
        let norm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;

        for (j, vj) in v[..m].iter_mut().enumerate() {
            *vj = a[(lo + j) * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * B v, B the trailing block
        for r in 0..m {
            let row = &a[(lo + r) * n + lo..(lo + r) * n + n];
            let s: Complex64 = row.iter().zip(&v[..m]).map(|(b, x)| b * x).sum();
            p[r] = s * tau;
        }
        let vp: Complex64 = v[..m].iter().zip(&p[..m]).map(|(x, y)| x.conj() * y).sum();
        let kk = vp.re * tau * 0.5;
        for r in 0..m {
            p[r] -= v[r] * kk;
        }
        // B <- B - v w† - w v†
        for r in 0..m {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut a[(lo + r) * n + lo..(lo + r) * n + n];
            for (c, b) in row.iter_mut().enumerate() {
                *b -= vr * p[c].conj() + wr * v[c].conj();
            }
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha.conj();
        for i in (lo + 1)..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }

        if want_vectors {
            for r in 0..n {
                let row = &mut q[r * n + lo..r * n + n];
                let s: Complex64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
                let s = s * tau;
                for (x, y) in row.iter_mut().zip(&v[..m]) {
                    *x -= s * y.conj();
                }
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let off = a[(i + 1) * n + i];
        let mag = off.norm();
        e[i] = mag;
        phases[i + 1] = if mag > 0.0 {
            phases[i] * off / mag
        } else {
            phases[i]
        };
    }

    let mut z: Vec<f64> = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    } else {
        Vec::new()
    };
    tql_implicit(&mut d, &mut e, if want_vectors { Some(&mut z) } else { None }, n)?;

    let vectors = if want_vectors {
        // V = Q · diag(phases) · Z
        let mut out = vec![zero; n * n];
        for r in 0..n {
            for i in 0..n {
                let qi = q[r * n + i] * phases[i];
                if qi == zero {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += qi * z[i * n + c];
                }
            }
        }
        Some(out)
    } else {
        None
    };
    Ok((d, vectors))
}

/// Implicit QL with Wilkinson-style shifts on a real symmetric tridiagonal
/// matrix (`d` diagonal, `e[i]` couples `i` and `i + 1`).
fn tql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<f64>>, n: usize) -> Result<()> {
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
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
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence(MAX_QL_ITERATIONS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
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
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
