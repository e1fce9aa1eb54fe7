//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for selected
//! eigenvalues, inverse iteration for the matching eigenvectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// Sub/super-diagonal, length `n - 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Eigensolver(format!(
                "inconsistent tridiagonal sizes: diag {}, off {}",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver("matrix has non-finite entries".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            if q == 0.0 {
                q = tiny;
            }
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::Eigensolver(format!(
                "requested eigenvalue {index} of a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let span = hi - lo;
        lo -= 1e-12 * span.max(1.0);
        hi += 1e-12 * span.max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|i| self.eigenvalue(i)).collect()
    }

    /// Unit eigenvector for eigenvalue `lambda` by inverse iteration.
    /// Components along `previous` (unit vectors) are projected out so that
    /// nearby eigenvalues still yield an orthonormal set.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let lu = TridiagLu::factor(self, lambda);
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract())
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            lu.solve(&mut v);
            for p in previous {
                let d = dot(&v, p);
                v.iter_mut().zip(p).for_each(|(a, b)| *a -= d * b);
            }
            if !normalize(&mut v) {
                return Err(Error::Eigensolver(format!(
                    "inverse iteration collapsed at lambda = {lambda} (n = {n})"
                )));
            }
        }
        Ok(v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = dot(v, v).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// LU factorisation of `T - shift I` with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let scale = t.gershgorin().1.abs().max(t.gershgorin().0.abs()).max(1.0);
        let eps = f64::EPSILON * scale;
        for p in d.iter_mut() {
            if p.abs() < eps {
                *p = if *p < 0.0 { -eps } else { eps };
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
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
        let n = t.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.off[i];
                m[(i + 1, i)] = t.off[i];
            }
        }
        m
    }

    fn sample(n: usize) -> SymTridiagonal {
        let diag = (0..n)
            .map(|i| ((i * 7919 % 101) as f64 / 50.0 - 1.0) + 0.001 * i as f64)
            .collect();
        let off = (0..n - 1)
            .map(|i| ((i * 104_729 % 97) as f64 / 97.0) - 0.3)
            .collect();
        SymTridiagonal::new(diag, off).unwrap()
    }

    #[test]
    fn bisection_matches_dense_oracle() {
        for &n in &[1usize, 2, 3, 17, 120] {
            let t = sample(n.max(1));
            let mut oracle: Vec<f64> = SymmetricEigen::new(dense(&t))
                .eigenvalues
                .iter()
                .copied()
                .collect();
            oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let got = t.lowest_eigenvalues(n).unwrap();
            for (g, o) in got.iter().zip(&oracle) {
                assert!((g - o).abs() < 1e-12, "n = {n}: {g} vs {o}");
            }
        }
    }

    #[test]
    fn known_spectrum_of_discrete_laplacian() {
        // tridiag(-1, 2, -1): 2 - 2 cos(j pi / (n + 1))
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        for j in 0..5 {
            let exact = 2.0 - 2.0 * (((j + 1) as f64) * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(j).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_equation() {
        let t = sample(80);
        let mut vecs: Vec<Vec<f64>> = Vec::new();
        for j in 0..6 {
            let lam = t.eigenvalue(j).unwrap();
            let v = t.eigenvector(lam, &vecs).unwrap();
            let n = t.len();
            for i in 0..n {
                let mut r = t.diag[i] * v[i] - lam * v[i];
                if i > 0 {
                    r += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += t.off[i] * v[i + 1];
                }
                assert!(r.abs() < 1e-10, "residual {r}");
            }
            vecs.push(v);
        }
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let d = dot(&vecs[i], &vecs[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, f64::NAN], vec![0.0]).is_err());
        let t = sample(4);
        assert!(t.eigenvalue(4).is_err());
    }
}
