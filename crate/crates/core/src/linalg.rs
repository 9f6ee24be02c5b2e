//! Incremental row echelon form over the rationals.

use num_rational::BigRational;
use num_traits::Zero;

/// Rows kept fully reduced against each other's pivots.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Residue of `v` after elimination against the stored pivots.
    pub fn reduce(&self, v: &[BigRational]) -> Vec<BigRational> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if *p < v.len() && !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *x -= &f * r;
                    }
                }
            }
        }
        v
    }

    pub fn is_independent(&self, v: &[BigRational]) -> bool {
        self.reduce(v).iter().any(|x| !x.is_zero())
    }

    /// Adds `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &[BigRational]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = BigRational::from_integer(1.into()) / &r[p];
        for x in r.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if p < row.len() && !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&r) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Rank of a list of equal-length vectors.
pub fn rank(vectors: &[Vec<BigRational>]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Solves `A x = b` for the columns `a`, if solvable; free variables are zero.
pub fn solve(columns: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = columns.len();
    let m = b.len();
    // augmented rows
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut r: Vec<BigRational> = columns.iter().map(|c| c[i].clone()).collect();
            r.push(b[i].clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..m).find(|&k| !rows[k][c].is_zero()) else { continue };
        rows.swap(r, k);
        let inv = BigRational::from_integer(1.into()) / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for k in 0..m {
            if k != r && !rows[k][c].is_zero() {
                let f = rows[k][c].clone();
                let pr = rows[r].clone();
                for (x, y) in rows[k].iter_mut().zip(&pr) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][n].clone();
    }
    Some(x)
}
