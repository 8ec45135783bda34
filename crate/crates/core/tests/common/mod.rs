//! Independent reference implementation used as a test oracle: explicit
//! index loops, a real-symmetric Jacobi eigensolver, and direct channel
//! formulas. Shares no code with the library beyond `Complex64`.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct M {
    pub n: usize,
    pub a: Vec<C>,
}

impl M {
    pub fn zeros(n: usize) -> M {
        M { n, a: vec![c(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> M {
        let mut m = M::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        self.a[i * self.n + j]
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: C) {
        self.a[i * self.n + j] += v;
    }

    pub fn mul(&self, o: &M) -> M {
        let n = self.n;
        let mut r = M::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.get(i, k);
                if x == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    r.a[i * n + j] += x * o.get(k, j);
                }
            }
        }
        r
    }

    pub fn adjoint(&self) -> M {
        let n = self.n;
        let mut r = M::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.a[j * n + i] = self.get(i, j).conj();
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> M {
        M { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn plus(&self, o: &M) -> M {
        M { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }

    pub fn trace(&self) -> C {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_diff(&self, o: &M) -> f64 {
        assert_eq!(self.n, o.n);
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn from_rows(rows: &[&[C]]) -> M {
        let n = rows.len();
        M { n, a: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }
}

pub fn kron(x: &M, y: &M) -> M {
    let n = x.n * y.n;
    let mut r = M::zeros(n);
    for i in 0..x.n {
        for j in 0..x.n {
            for k in 0..y.n {
                for l in 0..y.n {
                    r.a[(i * y.n + k) * n + j * y.n + l] = x.get(i, j) * y.get(k, l);
                }
            }
        }
    }
    r
}

/// Digits of `idx` with subsystem 0 most significant.
pub fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut d = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        d[k] = idx % dims[k];
        idx /= dims[k];
    }
    d
}

pub fn index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (x, d)| acc * d + x)
}

pub fn projector(dims: &[usize], ds: &[usize]) -> M {
    let n: usize = dims.iter().product();
    let mut m = M::zeros(n);
    let i = index(ds, dims);
    m.a[i * n + i] = c(1.0, 0.0);
    m
}

pub fn pure(v: &[C]) -> M {
    let n = v.len();
    let mut m = M::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.a[i * n + j] = v[i] * v[j].conj();
        }
    }
    m
}

pub fn ghz(parties: usize, d: usize) -> M {
    let dims = vec![d; parties];
    let n = d.pow(parties as u32);
    let mut v = vec![c(0.0, 0.0); n];
    for j in 0..d {
        v[index(&vec![j; parties], &dims)] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    pure(&v)
}

/// Conjugation by the basis permutation `|x> -> |f(x)>`.
pub fn permute(rho: &M, dims: &[usize], f: impl Fn(&[usize]) -> Vec<usize>) -> M {
    let n = rho.n;
    let mut u = M::zeros(n);
    for i in 0..n {
        let j = index(&f(&digits(i, dims)), dims);
        u.a[j * n + i] = c(1.0, 0.0);
    }
    u.mul(rho).mul(&u.adjoint())
}

/// `|.., x_c, .., x_t, ..> -> |.., x_c, .., x_t ± x_c mod d, ..>`.
pub fn cnot(rho: &M, dims: &[usize], control: usize, target: usize, inverse: bool) -> M {
    let d = dims[target];
    permute(rho, dims, |x| {
        let mut y = x.to_vec();
        y[target] = if inverse { (x[target] + d - x[control]) % d } else { (x[target] + x[control]) % d };
        y
    })
}

/// Applies a single-system linear map to subsystem `target` block by block.
pub fn local_map(rho: &M, dims: &[usize], target: usize, f: &dyn Fn(&M) -> M) -> M {
    let d = dims[target];
    let rest: Vec<usize> = (0..dims.len()).filter(|&k| k != target).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let nr: usize = rest_dims.iter().product();
    let full = |r: usize, t: usize| {
        let rd = digits(r, &rest_dims);
        let mut ds = vec![0; dims.len()];
        for (k, &s) in rest.iter().enumerate() {
            ds[s] = rd[k];
        }
        ds[target] = t;
        index(&ds, dims)
    };
    let mut out = M::zeros(rho.n);
    for r in 0..nr {
        for s in 0..nr {
            let mut block = M::zeros(d);
            for t in 0..d {
                for u in 0..d {
                    block.a[t * d + u] = rho.get(full(r, t), full(s, u));
                }
            }
            let img = f(&block);
            for t in 0..d {
                for u in 0..d {
                    out.add_at(full(r, t), full(s, u), img.get(t, u));
                }
            }
        }
    }
    out
}

pub fn partial_trace(rho: &M, dims: &[usize], keep: &[usize]) -> M {
    let kd: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let nk: usize = kd.iter().product();
    let mut out = M::zeros(nk);
    for i in 0..rho.n {
        for j in 0..rho.n {
            let di = digits(i, dims);
            let dj = digits(j, dims);
            let traced_equal = (0..dims.len()).all(|k| keep.contains(&k) || di[k] == dj[k]);
            if traced_equal {
                let ki: Vec<usize> = keep.iter().map(|&k| di[k]).collect();
                let kj: Vec<usize> = keep.iter().map(|&k| dj[k]).collect();
                out.add_at(index(&ki, &kd), index(&kj, &kd), rho.get(i, j));
            }
        }
    }
    out
}

pub fn partial_transpose(rho: &M, dims: &[usize], side: &[usize]) -> M {
    let mut out = M::zeros(rho.n);
    for i in 0..rho.n {
        for j in 0..rho.n {
            let mut di = digits(i, dims);
            let mut dj = digits(j, dims);
            for &k in side {
                std::mem::swap(&mut di[k], &mut dj[k]);
            }
            out.a[index(&di, dims) * rho.n + index(&dj, dims)] = rho.get(i, j);
        }
    }
    out
}

/// Eigenvalues (ascending) of a Hermitian matrix via cyclic Jacobi on the
/// real symmetric embedding `[[A, −B], [B, A]]`, which doubles each one.
pub fn eigenvalues(h: &M) -> Vec<f64> {
    let n = h.n;
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev.into_iter().step_by(2).collect()
}

pub fn negativity(rho: &M, dims: &[usize], side: &[usize]) -> f64 {
    let da: usize = side.iter().map(|&k| dims[k]).product();
    let db: usize = (0..dims.len()).filter(|k| !side.contains(k)).map(|k| dims[k]).product();
    let neg: f64 = eigenvalues(&partial_transpose(rho, dims, side))
        .into_iter()
        .filter(|&x| x < -1e-10)
        .map(f64::abs)
        .sum();
    2.0 * neg / (da.min(db) - 1) as f64
}

/// Outcome probability and normalized post-state (measured systems removed)
/// for a computational-basis outcome of `targets`.
pub fn project(rho: &M, dims: &[usize], targets: &[usize], outcome: &[usize]) -> (f64, Option<M>) {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let nr: usize = rest_dims.iter().product();
    let full = |r: usize| {
        let rd = digits(r, &rest_dims);
        let mut ds = vec![0; dims.len()];
        for (k, &s) in rest.iter().enumerate() {
            ds[s] = rd[k];
        }
        for (k, &t) in targets.iter().enumerate() {
            ds[t] = outcome[k];
        }
        index(&ds, dims)
    };
    let mut block = M::zeros(nr);
    for r in 0..nr {
        for s in 0..nr {
            block.a[r * nr + s] = rho.get(full(r), full(s));
        }
    }
    let p = block.trace().re;
    if p <= 1e-14 {
        (0.0, None)
    } else {
        (p, Some(block.scale(1.0 / p)))
    }
}

pub fn pauli() -> [M; 4] {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        M::identity(2),
        M::from_rows(&[&[o, l], &[l, o]]),
        M::from_rows(&[&[o, -i], &[i, o]]),
        M::from_rows(&[&[l, o], &[o, -l]]),
    ]
}

/// Canonical qubit map through its Pauli transfer action:
/// `E(X) = ½[tr X (I + t3 σz) + Σ_k λ_k tr(σ_k X) σ_k]`.
pub fn canonical(l1: f64, l2: f64, l3: f64, t3: f64) -> impl Fn(&M) -> M {
    move |x: &M| {
        let [id, sx, sy, sz] = pauli();
        let tr = x.trace();
        let mut out = M::zeros(2);
        for (k, coeff) in [(0usize, tr), (3, tr * t3)] {
            let s = [&id, &sx, &sy, &sz][k];
            out = out.plus(&M { n: 2, a: s.a.iter().map(|v| v * coeff * 0.5).collect() });
        }
        for (s, l) in [(&sx, l1), (&sy, l2), (&sz, l3)] {
            let coeff = s.mul(x).trace() * l * 0.5;
            out = out.plus(&M { n: 2, a: s.a.iter().map(|v| v * coeff).collect() });
        }
        out
    }
}

/// `(1 − p) X + p tr(X) I/d`.
pub fn depolarizing(d: usize, p: f64) -> impl Fn(&M) -> M {
    move |x: &M| x.scale(1.0 - p).plus(&M::identity(d).scale(p / d as f64).scale_c(x.trace()))
}

/// `Σ_k E_k X E_k†` with `E_0 = |0><0| + √(1−γ) Σ_{i≥1} |i><i|`,
/// `E_m = √γ |0><m|`.
pub fn amplitude_damping(d: usize, g: f64) -> impl Fn(&M) -> M {
    let mut kraus = Vec::new();
    let mut e0 = M::identity(d).scale((1.0 - g).sqrt());
    e0.a[0] = c(1.0, 0.0);
    kraus.push(e0);
    for m in 1..d {
        let mut e = M::zeros(d);
        e.a[m] = c(g.sqrt(), 0.0);
        kraus.push(e);
    }
    move |x: &M| {
        kraus
            .iter()
            .map(|k| k.mul(x).mul(&k.adjoint()))
            .fold(M::zeros(d), |acc, y| acc.plus(&y))
    }
}

impl M {
    pub fn scale_c(&self, s: C) -> M {
        M { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }
}

/// Post-CNOT two-qubit state: `1/3 |GHZ3><GHZ3| + 1/6 Σ_{i, j≠k} Π_ijk`.
pub fn two_qubit_rho1() -> M {
    let dims = [2, 2, 2];
    let mut m = ghz(3, 2).scale(1.0 / 3.0);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                if j != k {
                    m = m.plus(&projector(&dims, &[i, j, k]).scale(1.0 / 6.0));
                }
            }
        }
    }
    m
}

/// Post-CNOT GHZ register `(a, b, c, d1, d2)`: `1/7 |GHZ5><GHZ5|` plus
/// `1/14` on `a=0, bc=00, D≠00`; `a=0, bc≠00, D=00`; `a=1, bc=11, D≠11`;
/// `a=1, bc≠11, D=11`.
pub fn ghz_sigma1() -> M {
    let dims = [2; 5];
    let mut m = ghz(5, 2).scale(1.0 / 7.0);
    let pairs = [[0, 0], [0, 1], [1, 0], [1, 1]];
    for (a, fixed) in [(0usize, [0usize, 0usize]), (1, [1, 1])] {
        for other in pairs.iter().filter(|p| **p != fixed) {
            for (bc, dd) in [(fixed, *other), (*other, fixed)] {
                m = m.plus(&projector(&dims, &[a, bc[0], bc[1], dd[0], dd[1]]).scale(1.0 / 14.0));
            }
        }
    }
    m
}

/// Post-CNOT qudit state: `1/(2d−1) |GHZ3><GHZ3| + 1/(d(2d−1)) Σ_{j≠l}(Π_jjl + Π_jlj)`.
pub fn qudit_omega1(d: usize) -> M {
    let dims = [d; 3];
    let df = d as f64;
    let mut m = ghz(3, d).scale(1.0 / (2.0 * df - 1.0));
    for j in 0..d {
        for l in 0..d {
            if j != l {
                let w = 1.0 / (df * (2.0 * df - 1.0));
                m = m.plus(&projector(&dims, &[j, j, l]).scale(w));
                m = m.plus(&projector(&dims, &[j, l, j]).scale(w));
            }
        }
    }
    m
}

/// Reference run of the two-party protocols from the post-CNOT state.
pub struct OracleRun {
    pub after_channel: M,
    pub after_second_cnot: M,
    pub success_probability: f64,
    pub average_negativity: f64,
    pub success_negativity: f64,
}

pub fn two_party_run(rho1: &M, d: usize, ch: &dyn Fn(&M) -> M) -> OracleRun {
    let dims = [d; 3];
    let after_channel = local_map(rho1, &dims, 2, ch);
    let after_second_cnot = cnot(&after_channel, &dims, 1, 2, d > 2);
    let mut avg = 0.0;
    let (p0, s0) = project(&after_second_cnot, &dims, &[2], &[0]);
    for m in 0..d {
        let (p, s) = project(&after_second_cnot, &dims, &[2], &[m]);
        if let Some(s) = s {
            avg += p * negativity(&s, &[d, d], &[0]);
        }
    }
    OracleRun {
        success_negativity: s0.map(|s| negativity(&s, &[d, d], &[0])).unwrap_or(0.0),
        after_channel,
        after_second_cnot,
        success_probability: p0,
        average_negativity: avg,
    }
}

pub struct GhzOracle {
    pub success_probability: f64,
    /// Branch averages across a|bc, b|ac, c|ab.
    pub averages: [f64; 3],
    pub success: M,
}

pub fn ghz_run(ch: &dyn Fn(&M) -> M) -> GhzOracle {
    let dims = [2; 5];
    let s1p = local_map(&local_map(&ghz_sigma1(), &dims, 3, ch), &dims, 4, ch);
    let s2p = cnot(&cnot(&s1p, &dims, 1, 3, false), &dims, 2, 4, false);
    let mut averages = [0.0; 3];
    for o in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let (p, s) = project(&s2p, &dims, &[3, 4], &o);
        if let Some(s) = s {
            for (k, avg) in averages.iter_mut().enumerate() {
                *avg += p * negativity(&s, &[2, 2, 2], &[k]);
            }
        }
    }
    let (p0, s0) = project(&s2p, &dims, &[3, 4], &[0, 0]);
    GhzOracle { success_probability: p0, averages, success: s0.expect("success branch occurs") }
}

/// Library matrix entries copied into the oracle type.
pub fn from_library(m: &edss::tensor::ComplexMatrix) -> M {
    let n = m.rows();
    M { n, a: (0..n * n).map(|k| m[(k / n, k % n)]).collect() }
}
