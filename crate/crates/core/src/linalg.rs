//! Dense linear algebra over a finite field: echelon forms, rank, kernels,
//! inverses and span comparisons.

use crate::ffield::{Field, FieldElem};

pub type Vector = Vec<FieldElem>;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![FieldElem::ZERO; rows * cols] }
    }

    pub fn identity(f: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = f.one();
        }
        m
    }

    pub fn from_rows(rows: &[Vector], cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vector], rows: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.data[i * cols.len() + j] = c[i];
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut r = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = r.get(i, j);
                    r.set(i, j, f.add(&cur, &f.mul(&a, &b)));
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, f: &Field, v: &[FieldElem]) -> Vector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = FieldElem::ZERO;
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s = f.add(&s, &f.mul(a, b));
                    }
                }
                s
            })
            .collect()
    }
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(f: &Field, m: &mut Matrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        if pr != r {
            for j in 0..m.cols {
                m.data.swap(pr * m.cols + j, r * m.cols + j);
            }
        }
        let inv = f.inv(&m.get(r, c));
        for j in c..m.cols {
            let x = m.get(r, j);
            m.set(r, j, f.mul(&x, &inv));
        }
        let pivot_row: Vector = m.row(r)[c..].to_vec();
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let factor = m.get(i, c);
            if factor.is_zero() {
                continue;
            }
            for (off, pv) in pivot_row.iter().enumerate() {
                if pv.is_zero() {
                    continue;
                }
                let j = c + off;
                let x = m.get(i, j);
                m.set(i, j, f.sub(&x, &f.mul(&factor, pv)));
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(f: &Field, m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(f, &mut a).len()
}

/// Rank of a family of vectors of common length `n`.
pub fn rank_of(f: &Field, vecs: &[Vector], n: usize) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    rank(f, &Matrix::from_rows(vecs, n))
}

/// Basis of the right kernel {x : m x = 0}.
pub fn kernel(f: &Field, m: &Matrix) -> Vec<Vector> {
    let mut a = m.clone();
    let pivots = rref(f, &mut a);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![FieldElem::ZERO; m.cols];
            v[fc] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(&a.get(r, fc));
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse(f: &Field, m: &Matrix) -> Option<Matrix> {
    let n = m.rows;
    assert_eq!(n, m.cols);
    let mut aug = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j));
        }
        aug.set(i, n + i, f.one());
    }
    let piv = rref(f, &mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    let mut inv = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv.set(i, j, aug.get(i, n + j));
        }
    }
    Some(inv)
}

/// Reduced echelon basis of the span of `vecs`.
pub fn span_basis(f: &Field, vecs: &[Vector], n: usize) -> Vec<Vector> {
    if vecs.is_empty() {
        return Vec::new();
    }
    let mut m = Matrix::from_rows(vecs, n);
    let k = rref(f, &mut m).len();
    (0..k).map(|i| m.row(i).to_vec()).collect()
}

/// Whether span(a) is contained in span(b).
pub fn span_contains(f: &Field, b: &[Vector], a: &[Vector], n: usize) -> bool {
    let rb = rank_of(f, b, n);
    let mut all = b.to_vec();
    all.extend_from_slice(a);
    rank_of(f, &all, n) == rb
}

pub fn span_equal(f: &Field, a: &[Vector], b: &[Vector], n: usize) -> bool {
    span_contains(f, a, b, n) && span_contains(f, b, a, n)
}

/// Intersection of the kernels of the linear functionals given as rows.
pub fn annihilator(f: &Field, functionals: &[Vector], n: usize) -> Vec<Vector> {
    if functionals.is_empty() {
        return (0..n)
            .map(|i| {
                let mut v = vec![FieldElem::ZERO; n];
                v[i] = f.one();
                v
            })
            .collect();
    }
    kernel(f, &Matrix::from_rows(functionals, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::build_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_round_trip() {
        let f = build_field(3, 4, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut found = 0;
        while found < 5 {
            let rows: Vec<Vector> = (0..6).map(|_| (0..6).map(|_| f.random(&mut rng)).collect()).collect();
            let m = Matrix::from_rows(&rows, 6);
            if let Some(inv) = inverse(&f, &m) {
                assert_eq!(m.mul(&f, &inv), Matrix::identity(&f, 6));
                found += 1;
            } else {
                assert!(rank(&f, &m) < 6);
            }
        }
    }

    #[test]
    fn kernel_and_rank_agree() {
        let f = build_field(5, 2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let base: Vec<Vector> = (0..3).map(|_| (0..7).map(|_| f.random(&mut rng)).collect()).collect();
            // Rows 3..5 are combinations of rows 0..2.
            let mut rows = base.clone();
            for _ in 0..2 {
                let c: Vec<FieldElem> = (0..3).map(|_| f.random(&mut rng)).collect();
                rows.push((0..7).map(|j| (0..3).fold(f.zero(), |s, i| f.add(&s, &f.mul(&c[i], &base[i][j])))).collect());
            }
            let m = Matrix::from_rows(&rows, 7);
            let r = rank(&f, &m);
            assert!(r <= 3);
            let ker = kernel(&f, &m);
            assert_eq!(ker.len(), 7 - r);
            for v in &ker {
                assert!(m.mul_vec(&f, v).iter().all(|x| x.is_zero()));
            }
            assert!(span_contains(&f, &base, &rows, 7));
        }
    }
}
