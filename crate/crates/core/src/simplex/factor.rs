//! Dense LU factorization of the basis with product-form updates.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    col: Vec<f64>,
}

/// `B = P⁻¹·L·U` with row permutation `perm`, followed by eta updates.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    m: usize,
    /// Row-major, `L` strictly below the diagonal (unit diagonal), `U` on and above.
    lu: Vec<f64>,
    perm: Vec<usize>,
    etas: Vec<Eta>,
}

/// Position (column of `B`) that could not be pivoted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular(pub usize);

impl Factor {
    /// Factorizes the `m × m` matrix given column by column (`cols[k]` is dense).
    pub(crate) fn new(m: usize, cols: &[Vec<f64>]) -> Result<Self, Singular> {
        let mut a = vec![0.0; m * m];
        for (k, col) in cols.iter().enumerate() {
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut best = k;
            let mut best_abs = a[k * m + k].abs();
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs < PIVOT_TOL {
                return Err(Singular(k));
            }
            if best != k {
                for c in 0..m {
                    a.swap(k * m + c, best * m + c);
                }
                perm.swap(k, best);
            }
            let piv = a[k * m + k];
            for i in k + 1..m {
                let f = a[i * m + k] / piv;
                if f != 0.0 {
                    a[i * m + k] = f;
                    for c in k + 1..m {
                        a[i * m + c] -= f * a[k * m + c];
                    }
                } else {
                    a[i * m + k] = 0.0;
                }
            }
        }
        Ok(Self {
            m,
            lu: a,
            perm,
            etas: Vec::new(),
        })
    }

    pub(crate) fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B·x = b` in place.
    pub(crate) fn ftran(&self, b: &mut [f64]) {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..m {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[i * m + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = x[i];
            for k in i + 1..m {
                s -= self.lu[i * m + k] * x[k];
            }
            x[i] = s / self.lu[i * m + i];
        }
        for eta in &self.etas {
            let r = eta.row;
            let xr = x[r] / eta.col[r];
            if xr != 0.0 {
                for (i, &a) in eta.col.iter().enumerate() {
                    if i != r {
                        x[i] -= a * xr;
                    }
                }
            }
            x[r] = xr;
        }
        b.copy_from_slice(&x);
    }

    /// Solves `Bᵀ·y = c` in place.
    pub(crate) fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let r = eta.row;
            let mut s = c[r];
            for (i, &a) in eta.col.iter().enumerate() {
                if i != r {
                    s -= a * c[i];
                }
            }
            c[r] = s / eta.col[r];
        }
        // Uᵀ·w = c
        let mut w = c.to_vec();
        for i in 0..m {
            let mut s = w[i];
            for k in 0..i {
                s -= self.lu[k * m + i] * w[k];
            }
            w[i] = s / self.lu[i * m + i];
        }
        // Lᵀ·v = w
        for i in (0..m).rev() {
            let mut s = w[i];
            for k in i + 1..m {
                s -= self.lu[k * m + i] * w[k];
            }
            w[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            c[p] = w[i];
        }
    }

    /// Records that basis position `row` is replaced by a column whose
    /// transformed form `B⁻¹·a` is `alpha`.
    pub(crate) fn update(&mut self, row: usize, alpha: Vec<f64>) {
        self.etas.push(Eta { row, col: alpha });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(cols: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        let m = cols.len();
        let mut out = vec![0.0; m];
        for (k, col) in cols.iter().enumerate() {
            for i in 0..m {
                out[i] += col[i] * x[k];
            }
        }
        out
    }

    #[test]
    fn solves_and_transposed_solves() {
        let cols = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 0.0, 3.0],
            vec![4.0, 1.0, 0.0],
        ];
        let f = Factor::new(3, &cols).unwrap();
        let b = [1.0, -2.0, 0.5];
        let mut x = b.to_vec();
        f.ftran(&mut x);
        let back = matvec(&cols, &x);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let mut y = b.to_vec();
        f.btran(&mut y);
        for (k, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((dot - b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_refactorization() {
        let mut cols = vec![
            vec![2.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 3.0],
        ];
        let mut f = Factor::new(3, &cols).unwrap();
        let incoming = vec![1.0, 2.0, -1.0];
        let mut alpha = incoming.clone();
        f.ftran(&mut alpha);
        f.update(1, alpha);
        cols[1] = incoming;
        let g = Factor::new(3, &cols).unwrap();
        let b = [0.3, -1.0, 2.0];
        let (mut x1, mut x2) = (b.to_vec(), b.to_vec());
        f.ftran(&mut x1);
        g.ftran(&mut x2);
        let (mut y1, mut y2) = (b.to_vec(), b.to_vec());
        f.btran(&mut y1);
        g.btran(&mut y2);
        for i in 0..3 {
            assert!((x1[i] - x2[i]).abs() < 1e-12);
            assert!((y1[i] - y2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let cols = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(Factor::new(2, &cols).is_err());
    }
}
