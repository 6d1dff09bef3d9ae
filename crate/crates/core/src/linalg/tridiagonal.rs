//! Symmetric tridiagonal eigenpairs below a cutoff: Sturm bisection for the
//! eigenvalues and inverse iteration with cluster reorthogonalisation for the
//! eigenvectors.

use nalgebra::DMatrix;

use crate::error::{numerical, Result};

/// Gaps below this fraction of `‖T‖₁` put two eigenvalues into one
/// reorthogonalisation cluster.
const CLUSTER_TOL: f64 = 1e-3;
const MAX_INVERSE_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn from_dense(a: &DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        for j in 0..n {
            for i in 0..n {
                if i.abs_diff(j) > 1 && a[(i, j)] != 0.0 {
                    return None;
                }
            }
        }
        Some(Self {
            diag: (0..n).map(|i| a[(i, i)]).collect(),
            off: (1..n).map(|i| a[(i, i - 1)]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn norm1(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * self.norm1() * 1e-3);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenpairs with eigenvalue `<= cutoff`, ascending.
    pub fn eigenpairs_below(&self, cutoff: f64, seed: u64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.len();
        let (glo, ghi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm1().max(1.0) * 4.0;
        let glo = glo - pad;
        let ghi = ghi + pad;
        let m = if cutoff >= ghi {
            n
        } else {
            self.count_below(next_up(cutoff))
        };
        let values: Vec<f64> = (0..m).map(|k| self.eigenvalue(k, glo, ghi)).collect();
        let vectors = self.inverse_iteration(&values, seed)?;
        Ok((values, vectors))
    }

    fn inverse_iteration(&self, values: &[f64], seed: u64) -> Result<DMatrix<f64>> {
        let n = self.len();
        let m = values.len();
        let mut out = DMatrix::<f64>::zeros(n, m);
        if n == 1 {
            if m == 1 {
                out[(0, 0)] = 1.0;
            }
            return Ok(out);
        }
        let norm = self.norm1().max(f64::MIN_POSITIVE);
        let ortol = CLUSTER_TOL * norm;
        let tiny = f64::EPSILON * norm;
        let mut rng = SplitMix(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut cluster_start = 0;
        let mut x = vec![0.0; n];
        for k in 0..m {
            if k > 0 && values[k] - values[k - 1] > ortol {
                cluster_start = k;
            }
            // Separate exactly coincident shifts so each solve sees a distinct matrix.
            let mut shift = values[k];
            if k > cluster_start {
                let prev = values[k - 1];
                if shift - prev < 10.0 * tiny {
                    shift = prev + 10.0 * tiny;
                }
            }
            let lu = TridiagonalLu::factor(self, shift, tiny);
            for v in x.iter_mut() {
                *v = rng.next_unit() - 0.5;
            }
            let mut converged = false;
            for step in 0..MAX_INVERSE_STEPS {
                scale_to_unit(&mut x);
                lu.solve(&mut x);
                for j in cluster_start..k {
                    let col = out.column(j);
                    let dot: f64 = col.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, ci) in x.iter_mut().zip(col.iter()) {
                        *xi -= dot * ci;
                    }
                }
                scale_to_unit(&mut x);
                let resid = self.residual(&x, values[k]);
                if step >= 1 && resid <= 64.0 * f64::EPSILON * norm * (n as f64).sqrt() {
                    converged = true;
                    break;
                }
            }
            if !converged {
                let resid = self.residual(&x, values[k]);
                if resid > 1e-9 * norm {
                    return Err(numerical(
                        "tridiagonal inverse iteration",
                        format!(
                            "eigenvector {k} (eigenvalue {}) residual {resid:e} after {MAX_INVERSE_STEPS} steps",
                            values[k]
                        ),
                    ));
                }
            }
            out.column_mut(k).copy_from_slice(&x);
        }
        Ok(out)
    }

    fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        let mut acc: f64 = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * x[i];
            if i > 0 {
                r += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * x[i + 1];
            }
            acc += r * r;
        }
        acc.sqrt()
    }
}

fn next_up(x: f64) -> f64 {
    x + f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
}

fn scale_to_unit(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        for v in x.iter_mut() {
            *v /= norm;
        }
    } else {
        let max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if max > 0.0 && max.is_finite() {
            for v in x.iter_mut() {
                *v /= max;
            }
            scale_to_unit(x);
        }
    }
}

/// LU factorisation of `T - shift·I` with partial pivoting.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &Tridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // Guard against overflow for nearly exact shifts.
        if b.iter().any(|v| !v.is_finite()) {
            for v in b.iter_mut() {
                if !v.is_finite() {
                    *v = 1.0;
                }
            }
        }
    }
}

/// Deterministic start vectors for inverse iteration.
struct SplitMix(u64);

impl SplitMix {
    fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}
