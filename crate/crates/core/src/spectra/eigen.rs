//! Symmetric eigensolvers: dense Householder + implicit QL, and a
//! thick-restart Lanczos iteration for the large sparse case.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HdxError, Result};
use crate::rng::derive_stream;
use crate::scalar::Scalar;

use super::graph::WeightedGraph;

/// Tridiagonalization switches to parallel row updates above this size.
const PAR_DENSE: usize = 384;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralOptions<T> {
    /// Accuracy target for both eigenvalues.
    pub tol: T,
    /// Largest vertex count handled by the dense path.
    pub dense_cap: usize,
    /// Largest vertex count accepted at all.
    pub max_vertices: usize,
    /// Seed for the Lanczos start vector.
    pub seed: u64,
    /// Krylov basis size before a restart.
    pub basis: usize,
    /// Ritz vectors kept per end across a restart.
    pub keep: usize,
    pub max_restarts: usize,
}

impl<T: Scalar> Default for SpectralOptions<T> {
    fn default() -> Self {
        SpectralOptions {
            tol: T::lit(1e-9),
            dense_cap: 4000,
            max_vertices: 250_000,
            seed: 0x5eed,
            basis: 64,
            keep: 12,
            max_restarts: 4000,
        }
    }
}

impl<T: Scalar> SpectralOptions<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_vertices(mut self, cap: usize) -> Self {
        self.max_vertices = cap;
        self
    }

    /// Tolerance actually reachable in this precision.
    fn effective_tol(&self) -> T {
        self.tol.max(T::epsilon() * T::lit(64.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

/// Nontrivial spectrum summary of a normalized adjacency matrix.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport<T> {
    pub vertices: usize,
    /// Common degree for regular graphs.
    pub degree: Option<u64>,
    /// Second largest eigenvalue.
    pub lambda_signed: T,
    /// Smallest eigenvalue.
    pub lambda_min: T,
    /// Largest absolute value on the complement of the stationary vector.
    pub lambda_abs: T,
    /// `d (1 - lambda_signed)` for regular graphs.
    pub spectral_gap: Option<T>,
    pub tolerance: T,
    pub method: Method,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail += *x * *y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn par_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    if a.len() < 1 << 15 {
        return dot(a, b);
    }
    a.par_chunks(1 << 13)
        .zip(b.par_chunks(1 << 13))
        .map(|(x, y)| dot(x, y))
        .sum()
}

fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

fn norm<T: Scalar>(x: &[T]) -> T {
    par_dot(x, x).sqrt()
}

/// Householder reduction of a dense symmetric matrix (row-major, full
/// storage, overwritten) to tridiagonal form. Returns the diagonal, the
/// subdiagonal (`e[i]` couples `i` and `i+1`, last entry zero) and, if
/// requested, the orthogonal `Q` with `A = Q T Q^T`.
fn tridiagonalize<T: Scalar>(a: &mut [T], n: usize, want_q: bool) -> (Vec<T>, Vec<T>, Option<Vec<T>>) {
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut q = want_q.then(|| {
        let mut q = vec![T::zero(); n * n];
        for i in 0..n {
            q[i * n + i] = T::one();
        }
        q
    });
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let mut v: Vec<T> = a[k * n + lo..k * n + n].to_vec();
        let xnorm = dot(&v, &v).sqrt();
        d[k] = a[k * n + k];
        if xnorm == T::zero() {
            e[k] = T::zero();
            continue;
        }
        let alpha = if v[0] > T::zero() { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        e[k] = alpha;
        if vnorm == T::zero() {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        let rows = &mut a[lo * n..];
        let p: Vec<T> = if n - lo >= PAR_DENSE {
            rows.par_chunks(n).map(|row| dot(&row[lo..], &v)).collect()
        } else {
            rows.chunks(n).map(|row| dot(&row[lo..], &v)).collect()
        };
        let kappa = dot(&v, &p);
        let w: Vec<T> = p
            .iter()
            .zip(&v)
            .map(|(&pi, &vi)| two * pi - two * kappa * vi)
            .collect();
        let update = |(i, row): (usize, &mut [T])| {
            let (vi, wi) = (v[i], w[i]);
            for ((x, &vj), &wj) in row[lo..].iter_mut().zip(&v).zip(&w) {
                *x -= vi * wj + wi * vj;
            }
        };
        if n - lo >= PAR_DENSE {
            rows.par_chunks_mut(n).enumerate().for_each(update);
        } else {
            rows.chunks_mut(n).enumerate().for_each(update);
        }
        if let Some(q) = q.as_mut() {
            for row in q.chunks_mut(n) {
                let s = two * dot(&row[lo..], &v);
                axpy(-s, &v, &mut row[lo..]);
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 2) * n + n - 1];
    }
    if n >= 1 {
        d[n - 1] = a[n * n - 1];
    }
    (d, e, q)
}

/// Implicit QL on a symmetric tridiagonal matrix. Rotations are
/// accumulated into the columns of `z` (row-major `n x n`) when given.
fn tridiagonal_ql<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 100 {
                    return Err(HdxError::State("tridiagonal QL did not converge".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for row in z.chunks_mut(n) {
                            let h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Eigenvalues (ascending) of a dense symmetric matrix given row-major.
pub fn symmetric_eigenvalues<T: Scalar>(mut a: Vec<T>, n: usize) -> Result<Vec<T>> {
    if a.len() != n * n {
        return Err(HdxError::param("matrix is not n x n"));
    }
    let (mut d, mut e, _) = tridiagonalize(&mut a, n, false);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Eigenvalues (ascending) and eigenvectors; column `j` of the returned
/// row-major matrix belongs to eigenvalue `j`.
pub fn symmetric_eigen<T: Scalar>(mut a: Vec<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if a.len() != n * n {
        return Err(HdxError::param("matrix is not n x n"));
    }
    let (mut d, mut e, q) = tridiagonalize(&mut a, n, true);
    let mut z = q.expect("requested Q");
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new] = z[r * n + old];
        }
    }
    Ok((values, vectors))
}

/// Extreme eigenvalues of a symmetric operator restricted to the orthogonal
/// complement of `deflate` (a unit vector), as `(smallest, largest)`.
pub fn lanczos_extremes<T, F>(
    dim: usize,
    apply: F,
    deflate: &[T],
    opts: &SpectralOptions<T>,
) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    if dim < 3 {
        return Err(HdxError::param("Lanczos needs at least 3 dimensions"));
    }
    let tol = opts.effective_tol();
    let m = opts.basis.clamp(8, dim - 1);
    let keep = opts.keep.clamp(1, (m - 2) / 2);
    let mut rng = derive_stream(opts.seed, "lanczos-start");

    let orthogonalize = |w: &mut Vec<T>, basis: &[Vec<T>], coef: &mut [T]| {
        coef.iter_mut().for_each(|c| *c = T::zero());
        for _ in 0..2 {
            let c = par_dot(deflate, w);
            axpy(-c, deflate, w);
            for (i, v) in basis.iter().enumerate() {
                let c = par_dot(v, w);
                axpy(-c, v, w);
                coef[i] += c;
            }
        }
    };

    let random_unit = |rng: &mut crate::rng::StreamRng, basis: &[Vec<T>]| -> Vec<T> {
        loop {
            let mut w: Vec<T> = (0..dim)
                .map(|_| T::lit(rng.random_range(-1.0..1.0)))
                .collect();
            let mut scratch = vec![T::zero(); basis.len()];
            orthogonalize(&mut w, basis, &mut scratch);
            let nw = norm(&w);
            if nw > T::lit(1e-3) {
                w.iter_mut().for_each(|x| *x /= nw);
                return w;
            }
        }
    };

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    basis.push(random_unit(&mut rng, &[]));
    let mut h = vec![T::zero(); m * m];
    let mut coef = vec![T::zero(); m];
    let mut w = vec![T::zero(); dim];
    let mut start = 0;

    for _ in 0..opts.max_restarts {
        let mut beta = T::zero();
        for j in start..m {
            apply(&basis[j], &mut w);
            let (done, rest) = basis.split_at(j + 1);
            let _ = rest;
            orthogonalize(&mut w, done, &mut coef[..=j]);
            for i in 0..=j {
                h[i * m + j] = coef[i];
                h[j * m + i] = coef[i];
            }
            beta = norm(&w);
            if j + 1 < m {
                let next = if beta > tol * T::lit(1e-3) {
                    let inv = T::one() / beta;
                    let v: Vec<T> = w.iter().map(|&x| x * inv).collect();
                    h[(j + 1) * m + j] = beta;
                    h[j * m + j + 1] = beta;
                    v
                } else {
                    // Invariant subspace found: continue with a fresh direction.
                    h[(j + 1) * m + j] = T::zero();
                    h[j * m + j + 1] = T::zero();
                    random_unit(&mut rng, &basis)
                };
                basis.truncate(j + 1);
                basis.push(next);
            }
        }

        let (theta, y) = symmetric_eigen(h.clone(), m)?;
        let residual = |col: usize| (beta * y[(m - 1) * m + col]).abs();
        let lo_ok = residual(0) <= tol;
        let hi_ok = residual(m - 1) <= tol;
        if lo_ok && hi_ok {
            return Ok((theta[0], theta[m - 1]));
        }

        // Thick restart: keep the extreme Ritz vectors at both ends.
        let cols: Vec<usize> = (0..keep).chain(m - keep..m).collect();
        let mut fresh: Vec<Vec<T>> = cols
            .iter()
            .map(|&c| {
                let mut x = vec![T::zero(); dim];
                for (l, v) in basis.iter().enumerate().take(m) {
                    axpy(y[l * m + c], v, &mut x);
                }
                x
            })
            .collect();
        let k = fresh.len();
        h.iter_mut().for_each(|x| *x = T::zero());
        for (i, &c) in cols.iter().enumerate() {
            h[i * m + i] = theta[c];
        }
        let next = if beta > tol * T::lit(1e-3) {
            let inv = T::one() / beta;
            w.iter().map(|&x| x * inv).collect()
        } else {
            random_unit(&mut rng, &fresh)
        };
        fresh.push(next);
        basis = fresh;
        start = k;
    }
    Err(HdxError::State(format!(
        "Lanczos did not reach tolerance {tol} in {} restarts",
        opts.max_restarts
    )))
}

fn check_graph(graph: &WeightedGraph) -> Result<()> {
    let n = graph.num_vertices();
    if n < 2 {
        return Err(HdxError::param(format!("spectrum needs n >= 2, got {n}")));
    }
    if let Some(v) = graph.degrees().iter().position(|&d| d == 0) {
        return Err(HdxError::param(format!("vertex {v} has degree zero")));
    }
    let (count, comp) = graph.components();
    if count > 1 {
        let b = comp.iter().position(|&c| c != comp[0]).expect("second component");
        return Err(HdxError::Disconnected { a: 0, b });
    }
    Ok(())
}

/// Full normalized spectrum (ascending) by the dense path.
pub fn normalized_spectrum<T: Scalar>(graph: &WeightedGraph) -> Result<Vec<T>> {
    let n = graph.num_vertices();
    symmetric_eigenvalues(graph.dense_normalized::<T>(), n)
}

/// `lambda_signed`, `lambda_min` and `lambda_abs` of the normalized adjacency.
pub fn lambda<T: Scalar>(graph: &WeightedGraph, opts: &SpectralOptions<T>) -> Result<SpectralReport<T>> {
    check_graph(graph)?;
    let n = graph.num_vertices();
    if n > opts.max_vertices {
        return Err(HdxError::Size {
            what: "graph for spectral analysis".into(),
            actual: n,
            cap: opts.max_vertices,
        });
    }
    let (lambda_min, lambda_signed, method) = if n <= opts.dense_cap || n < 16 {
        let ev = normalized_spectrum::<T>(graph)?;
        (ev[0], ev[n - 2], Method::Dense)
    } else {
        let op = graph.normalized::<T>();
        let u = op.stationary();
        let (lo, hi) = lanczos_extremes(n, |x, y| op.apply(x, y), &u, opts)?;
        (lo, hi, Method::Lanczos)
    };
    Ok(make_report(
        n,
        graph.regular_degree(),
        lambda_signed,
        lambda_min,
        opts.tol,
        method,
    ))
}

pub(crate) fn make_report<T: Scalar>(
    vertices: usize,
    degree: Option<u64>,
    lambda_signed: T,
    lambda_min: T,
    tolerance: T,
    method: Method,
) -> SpectralReport<T> {
    let lambda_abs = lambda_signed.abs().max(-lambda_min);
    SpectralReport {
        vertices,
        degree,
        lambda_signed,
        lambda_min,
        lambda_abs,
        spectral_gap: degree.map(|d| T::from_count(d as usize) * (T::one() - lambda_signed)),
        tolerance,
        method,
    }
}
