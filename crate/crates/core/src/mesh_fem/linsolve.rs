use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Band storage above which the iterative solver is used instead of Cholesky.
pub const MAX_BAND_ENTRIES: usize = 8_000_000;

/// Relative residual target of the conjugate-gradient fallback.
pub const CG_REL_TOL: f64 = 1e-12;

/// Cholesky factor `L` of a symmetric positive definite banded matrix, stored
/// row-wise: row `i` holds columns `i − bw ..= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    data[r * w + c + bw - r] = v;
                }
            }
        }
        for i in 0..n {
            let si = i.saturating_sub(bw);
            for j in si..=i {
                let sj = j.saturating_sub(bw);
                let k0 = si.max(sj);
                let row_i = &data[i * w + k0 + bw - i..i * w + j + bw - i];
                let row_j = &data[j * w + k0 + bw - j..j * w + bw];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let idx = i * w + j + bw - i;
                let v = data[idx] - dot;
                if i == j {
                    if !(v > 0.0) {
                        return Err(Error::Solver(format!(
                            "matrix not positive definite: pivot {v:e} at row {i}"
                        )));
                    }
                    data[idx] = v.sqrt();
                } else {
                    data[idx] = v / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let si = i.saturating_sub(bw);
            let row = &self.data[i * w + si + bw - i..i * w + bw];
            let dot: f64 = row.iter().zip(&x[si..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= self.data[i * w + bw];
            let xi = x[i];
            let si = i.saturating_sub(bw);
            let row = &self.data[i * w + si + bw - i..i * w + bw];
            for (xk, l) in x[si..i].iter_mut().zip(row) {
                *xk -= l * xi;
            }
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { f64::NAN })
        .collect();
    if inv_diag.iter().any(|d| d.is_nan()) {
        return Err(Error::Solver("non-positive diagonal entry in CG operator".into()));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("CG breakdown at iteration {it}: pAp = {pap:e}")));
        }
        let step = rz / pap;
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        if norm(&r) <= tol * bnorm {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::Solver(format!(
        "CG did not reach relative residual {tol:e} in {max_iter} iterations"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solver for a fixed SPD operator: a reusable banded Cholesky factor, or
/// preconditioned CG when the band would be too large to store.
#[derive(Debug, Clone)]
pub enum LinearSolver {
    Empty,
    Cholesky(BandedCholesky),
    ConjugateGradient(CsrMatrix),
}

impl LinearSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Ok(Self::Empty);
        }
        if n * (a.half_bandwidth() + 1) <= MAX_BAND_ENTRIES {
            Ok(Self::Cholesky(BandedCholesky::factor(a)?))
        } else {
            Ok(Self::ConjugateGradient(a.clone()))
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Empty => Ok(Vec::new()),
            Self::Cholesky(f) => Ok(f.solve(b)),
            Self::ConjugateGradient(a) => pcg(a, b, CG_REL_TOL, 20 * a.dim() + 100),
        }
    }

    pub fn is_direct(&self) -> bool {
        !matches!(self, Self::ConjugateGradient(_))
    }
}
