//! Smith normal form over the integers, with transformation certificates.
//!
//! All arithmetic is exact and arbitrary precision. `U * A * V = D` with
//! `U`, `V` unimodular and `D` diagonal with each diagonal entry dividing
//! the next.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A dense integer matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = IntMat::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(*v);
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let (x, y) = (self[(a, j)].clone(), self[(b, j)].clone());
            self[(a, j)] = y;
            self[(b, j)] = x;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let (x, y) = (self[(i, a)].clone(), self[(i, b)].clone());
            self[(i, a)] = y;
            self[(i, b)] = x;
        }
    }

    /// row[a] += c * row[b]
    fn add_row(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.cols {
            let add = c * &self[(b, j)];
            self[(a, j)] += add;
        }
    }

    /// col[a] += c * col[b]
    fn add_col(&mut self, a: usize, b: usize, c: &BigInt) {
        for i in 0..self.rows {
            let add = c * &self[(i, b)];
            self[(i, a)] += add;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self[(a, j)].clone();
            self[(a, j)] = v;
        }
    }

    /// Determinant by fraction-free elimination (Bareiss). Square only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(k, k)] * &m[(i, j)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = num / &prev;
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// `u * a * v = d`, diagonal with divisibility d1 | d2 | ...
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMat,
    pub v: IntMat,
    pub d: IntMat,
}

impl Snf {
    /// Nonnegative diagonal entries, including trailing zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }
}

pub fn smith_normal_form(a: &IntMat) -> Snf {
    let mut d = a.clone();
    let mut u = IntMat::identity(a.rows);
    let mut v = IntMat::identity(a.cols);
    let n = a.rows.min(a.cols);

    for k in 0..n {
        loop {
            // Find the entry of least nonzero magnitude in the trailing block.
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..d.rows {
                for j in k..d.cols {
                    if !d[(i, j)].is_zero() {
                        let better = match pivot {
                            None => true,
                            Some((pi, pj)) => d[(i, j)].abs() < d[(pi, pj)].abs(),
                        };
                        if better {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Snf { u, v, d };
            };
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);
            if d[(k, k)].is_negative() {
                d.negate_row(k);
                u.negate_row(k);
            }

            // Reduce column k and row k by the pivot.
            let mut clean = true;
            for i in k + 1..d.rows {
                if !d[(i, k)].is_zero() {
                    let q = -(&d[(i, k)] / &d[(k, k)]);
                    d.add_row(i, k, &q);
                    u.add_row(i, k, &q);
                    if !d[(i, k)].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in k + 1..d.cols {
                if !d[(k, j)].is_zero() {
                    let q = -(&d[(k, j)] / &d[(k, k)]);
                    d.add_col(j, k, &q);
                    v.add_col(j, k, &q);
                    if !d[(k, j)].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }

            // Divisibility: the pivot must divide the whole trailing block.
            let mut bad: Option<usize> = None;
            'scan: for i in k + 1..d.rows {
                for j in k + 1..d.cols {
                    if !(&d[(i, j)] % &d[(k, k)]).is_zero() {
                        bad = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad {
                None => break,
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row(k, i, &one);
                    u.add_row(k, i, &one);
                }
            }
        }
    }
    Snf { u, v, d }
}

/// Invariant factors: positive diagonal entries, then a zero per free rank
/// when presenting Z^cols / rowspan. Unit factors are dropped.
pub fn invariant_factors_of_quotient(a: &IntMat) -> Vec<BigInt> {
    let snf = smith_normal_form(a);
    let diag = snf.diagonal();
    let nonzero = diag.iter().filter(|x| !x.is_zero()).count();
    let free_rank = a.cols - nonzero;
    let mut out: Vec<BigInt> = diag
        .into_iter()
        .filter(|x| !x.is_zero() && !x.is_one())
        .collect();
    out.extend(std::iter::repeat_n(BigInt::zero(), free_rank));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_certificates(a: &IntMat) -> Snf {
        let snf = smith_normal_form(a);
        assert_eq!(snf.u.mul(a).mul(&snf.v), snf.d, "U*A*V != D");
        assert_eq!(snf.u.det().abs(), BigInt::one(), "U not unimodular");
        assert_eq!(snf.v.det().abs(), BigInt::one(), "V not unimodular");
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            if !w[0].is_zero() {
                assert!((&w[1] % &w[0]).is_zero(), "divisibility broken: {diag:?}");
            } else {
                assert!(w[1].is_zero(), "zero before nonzero: {diag:?}");
            }
        }
        snf
    }

    #[test]
    fn zero_matrix() {
        let a = IntMat::zero(3, 2);
        let snf = check_certificates(&a);
        assert!(snf.diagonal().iter().all(|x| x.is_zero()));
        assert_eq!(
            invariant_factors_of_quotient(&a),
            vec![BigInt::zero(), BigInt::zero()]
        );
    }

    #[test]
    fn identity_two_by_two() {
        let a = IntMat::identity(2);
        let snf = check_certificates(&a);
        assert_eq!(snf.diagonal(), vec![BigInt::one(), BigInt::one()]);
        assert!(invariant_factors_of_quotient(&a).is_empty());
    }

    #[test]
    fn classic_two_four_six_eight() {
        // d1 = gcd of entries = 2; d1*d2 = |det| = |16 - 24| = 8 so d2 = 4.
        let a = IntMat::from_rows(vec![vec![2, 4], vec![6, 8]]);
        let snf = check_certificates(&a);
        assert_eq!(snf.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn needs_divisibility_fix() {
        let a = IntMat::from_rows(vec![vec![2, 0], vec![0, 3]]);
        let snf = check_certificates(&a);
        assert_eq!(snf.diagonal(), vec![BigInt::one(), BigInt::from(6)]);
    }

    #[test]
    fn rectangular_and_redundant() {
        let a = IntMat::from_rows(vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]);
        let snf = check_certificates(&a);
        let diag = snf.diagonal();
        assert_eq!(diag[0], BigInt::one());
        assert_eq!(diag[1], BigInt::one());
        assert!(diag[2].is_zero());
        // Z^3 / rowspan = Z
        assert_eq!(invariant_factors_of_quotient(&a), vec![BigInt::zero()]);
    }

    #[test]
    fn brute_force_small_matrices() {
        // Against the gcd/determinant identities: d1 = gcd of all entries,
        // d1*d2 = gcd of all 2x2 minors, for random-ish 2x3 matrices.
        let cases = [
            vec![vec![4, 6, 10], vec![2, 8, 14]],
            vec![vec![0, 0, 5], vec![3, 0, 0]],
            vec![vec![12, 8, 4], vec![6, 2, 10]],
            vec![vec![-3, 9, 6], vec![0, -12, 3]],
        ];
        for rows in cases {
            let a = IntMat::from_rows(rows.clone());
            let snf = check_certificates(&a);
            let diag = snf.diagonal();
            let gcd_all = rows
                .iter()
                .flatten()
                .fold(BigInt::zero(), |g, &x| num_integer_gcd(g, BigInt::from(x)));
            assert_eq!(diag[0], gcd_all);
            let mut minor_gcd = BigInt::zero();
            for c1 in 0..3 {
                for c2 in c1 + 1..3 {
                    let m = BigInt::from(rows[0][c1] * rows[1][c2] - rows[0][c2] * rows[1][c1]);
                    minor_gcd = num_integer_gcd(minor_gcd, m);
                }
            }
            assert_eq!(&diag[0] * &diag[1], minor_gcd);
        }
    }

    fn num_integer_gcd(a: BigInt, b: BigInt) -> BigInt {
        let (a, b) = (a.abs(), b.abs());
        if b.is_zero() {
            a
        } else {
            num_integer_gcd(b.clone(), a % b)
        }
    }
}
