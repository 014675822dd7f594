use crate::error::{invalid, Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const PIVOT_TOL: f64 = 1e-14;

/// Dense real symmetric matrix storing only the lower triangle, so
/// `get(i, j) == get(j, i)` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            lower: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle `j <= i`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Self { dim, lower }
    }

    /// Takes ownership of a packed lower triangle (row `i` holds columns `0..=i`).
    pub fn from_packed_lower(dim: usize, lower: Vec<f64>) -> Result<Self> {
        if lower.len() != dim * (dim + 1) / 2 {
            return Err(invalid(format!(
                "packed triangle of length {} does not fit dimension {dim}",
                lower.len()
            )));
        }
        Ok(Self { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.lower[packed(i, j)] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(invalid("dimension mismatch"));
        }
        Ok(SymMatrix {
            dim: self.dim,
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Option<Vec<Vec<f64>>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over the strict upper triangle annihilating each entry with a plane
/// rotation until the largest off-diagonal magnitude is at most `1e-12` times
/// the Frobenius norm. Cost is `O(d^3)` per sweep.
pub fn symmetric_eigen(m: &SymMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = m.dim();
    if n == 0 {
        return Err(invalid("eigenproblem of dimension 0"));
    }
    let mut a = m.to_dense();
    // Rows of `vt` are the eigenvectors, kept contiguous for the rotation updates.
    let mut vt = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let fro = m.frobenius_norm();
    let threshold = JACOBI_TOL * fro;
    let mut sweeps = 0;
    loop {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                max_off = max_off.max(a[p * n + q].abs());
            }
        }
        if max_off <= threshold || fro == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence(format!(
                "Jacobi after {MAX_SWEEPS} sweeps (off-diagonal {max_off:.3e}, Frobenius {fro:.3e})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= threshold {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[r * n + p] = np;
                    a[p * n + r] = np;
                    a[r * n + q] = nq;
                    a[q * n + r] = nq;
                }
                if let Some(v) = vt.as_mut() {
                    let (head, tail) = v.split_at_mut(q * n);
                    let vp = &mut head[p * n..p * n + n];
                    let vq = &mut tail[..n];
                    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                        let (xp, xq) = (*x, *y);
                        *x = c * xp - s * xq;
                        *y = s * xp + c * xq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = vt.map(|v| order.iter().map(|&i| v[i * n..i * n + n].to_vec()).collect());
    Ok(SymEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Lower Cholesky factor, row-major dense.
fn cholesky(b: &SymMatrix) -> Result<Vec<f64>> {
    let n = b.dim();
    let max_diag = (0..n).map(|i| b.get(i, i)).fold(0.0f64, f64::max);
    let threshold = PIVOT_TOL * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = b.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > threshold) {
            return Err(Error::GramSingular {
                pivot: d,
                index: j,
                threshold,
            });
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = b.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L X = R` in place for every column of the row-major `n x n` matrix `r`.
fn forward_substitute(l: &[f64], r: &mut [f64], n: usize) {
    for col in 0..n {
        for i in 0..n {
            let mut s = r[i * n + col];
            for k in 0..i {
                s -= l[i * n + k] * r[k * n + col];
            }
            r[i * n + col] = s / l[i * n + i];
        }
    }
}

/// Smallest eigenvalue of the symmetric-definite pencil `(A, B)`.
///
/// Reduces to the standard problem `L⁻¹ A L⁻ᵀ` with `B = L Lᵀ`. The result is
/// the minimum of the Rayleigh quotient `aᵀAa / aᵀBa`.
pub fn pencil_eigen_min(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let n = a.dim();
    if n == 0 || b.dim() != n {
        return Err(invalid(format!(
            "pencil dimensions {} and {} must agree and be positive",
            a.dim(),
            b.dim()
        )));
    }
    let l = cholesky(b)?;
    // X = L⁻¹ A, then C = L⁻¹ Xᵀ = L⁻¹ A L⁻ᵀ.
    let mut x = a.to_dense();
    forward_substitute(&l, &mut x, n);
    let mut xt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            xt[j * n + i] = x[i * n + j];
        }
    }
    forward_substitute(&l, &mut xt, n);
    let c = SymMatrix::from_fn(n, |i, j| 0.5 * (xt[i * n + j] + xt[j * n + i]));
    let eig = symmetric_eigen(&c, false)?;
    Ok(*eig.values.last().expect("dimension checked"))
}
