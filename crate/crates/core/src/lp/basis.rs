use super::LpError;

/// Dense explicit inverse of an `m x m` basis matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisInverse {
    m: usize,
    data: Vec<f64>,
}

impl BasisInverse {
    pub fn identity(m: usize) -> Self {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        BasisInverse { m, data }
    }

    /// Inverts the matrix whose `j`-th column is `columns[j]`
    /// (Gauss-Jordan with partial pivoting).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, LpError> {
        let m = columns.len();
        let mut a = vec![0.0; m * m];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(LpError::NumericFailure(format!("column {j} has length {} != {m}", col.len())));
            }
            for (i, v) in col.iter().enumerate() {
                a[i * m + j] = *v;
            }
        }
        let mut inv = BasisInverse::identity(m);
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
        for c in 0..m {
            let (p, pv) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .fold((c, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= 1e-13 * scale {
                return Err(LpError::SingularBasis);
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.data.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv.data[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv.data[r * m + k] -= f * inv.data[c * m + k];
                }
            }
        }
        Ok(inv)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// `B^-1 a`.
    pub fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| self.data[i * m..(i + 1) * m].iter().zip(a).map(|(x, y)| x * y).sum())
            .collect()
    }

    /// `B^-1 a` for a sparse column given as `(row, value)` pairs.
    pub fn ftran_sparse(&self, a: &[(usize, f64)]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| a.iter().map(|&(r, v)| self.data[i * m + r] * v).sum())
            .collect()
    }

    /// `c^T B^-1`.
    pub fn btran(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (i, ci) in c.iter().enumerate() {
            if *ci == 0.0 {
                continue;
            }
            let row = &self.data[i * m..(i + 1) * m];
            for (o, r) in out.iter_mut().zip(row) {
                *o += ci * r;
            }
        }
        out
    }

    /// Product-form update after the basic column in position `r` is
    /// replaced by a column whose transformed values are `d = B^-1 a`.
    pub fn update(&mut self, r: usize, d: &[f64]) {
        let m = self.m;
        let piv = d[r];
        let pivot_row: Vec<f64> = self.data[r * m..(r + 1) * m].iter().map(|v| v / piv).collect();
        for i in 0..m {
            if i == r || d[i] == 0.0 {
                continue;
            }
            let f = d[i];
            for (x, p) in self.data[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        self.data[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
    }
}
