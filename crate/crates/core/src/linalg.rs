//! Exact rational numbers, dense matrices and subspaces in canonical form.
//!
//! Every subspace is stored through its reduced row-echelon basis, so two
//! subspaces are equal exactly when their stored bases are equal.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"` (whitespace around the parts is ignored).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(n, d))
        }
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(fmt_q).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Rows of small integers; handy in tests.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    /// An empty matrix with a fixed number of columns, to push rows into.
    pub fn with_cols(cols: usize) -> Self {
        Matrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn from_columns(cols: &[Vec<Q>]) -> Self {
        let n = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "ragged columns");
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn push_row(&mut self, row: Vec<Q>) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }

    /// Row-major flattening, used to treat n×n matrices as vectors.
    pub fn to_vec(&self) -> Vec<Q> {
        self.data.clone()
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Q>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Q) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    pub fn determinant(&self) -> Q {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Q::zero();
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let piv = a[(c, c)].clone();
            det *= &piv;
            for r in c + 1..n {
                if a[(r, c)].is_zero() {
                    continue;
                }
                let f = &a[(r, c)] / &piv;
                for k in c..n {
                    let d = &f * &a[(c, k)];
                    a[(r, k)] -= d;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = Q::one();
        }
        let (red, piv) = rref(&aug);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv[(r, c)] = red[(r, n + c)].clone();
            }
        }
        Some(inv)
    }

    /// Rows `r0..r1` and columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let mut m = Matrix::zeros(r1 - r0, c1 - c0);
        for r in r0..r1 {
            for c in c0..c1 {
                m[(r - r0, c - c0)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m[(r, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|r| self.row(r).iter().map(fmt_q).collect()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Reduced row-echelon form with its pivot columns. Zero rows are kept at
/// the bottom so the shape is unchanged.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        a.swap_rows(p, row);
        let inv = a[(row, col)].recip();
        for c in col..a.cols {
            let v = &a[(row, c)] * &inv;
            a[(row, c)] = v;
        }
        for r in 0..a.rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for c in col..a.cols {
                if a[(row, c)].is_zero() {
                    continue;
                }
                let d = &f * &a[(row, c)];
                a[(r, c)] -= d;
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Null space `{x : m·x = 0}` in canonical form.
pub fn kernel(m: &Matrix) -> Subspace {
    let (red, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::with_cols(m.cols);
    for &f in &free {
        let mut v = vec![Q::zero(); m.cols];
        v[f] = Q::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -red[(r, f)].clone();
        }
        basis.push_row(v);
    }
    Subspace::from_rows(m.cols, basis)
}

/// One solution of `m·x = b` (free variables set to zero), or `None` when
/// the system is inconsistent.
pub fn solve(m: &Matrix, b: &[Q]) -> Result<Option<Vec<Q>>> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {} for a matrix with {} rows",
            b.len(),
            m.rows
        )));
    }
    let mut aug = Matrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in 0..m.cols {
            aug[(r, c)] = m[(r, c)].clone();
        }
        aug[(r, m.cols)] = b[r].clone();
    }
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = vec![Q::zero(); m.cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = red[(r, m.cols)].clone();
    }
    Ok(Some(x))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {}: {:?})", self.dim(), self.ambient, self.basis)
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::with_cols(ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::identity(ambient) }
    }

    /// Row space of `m`.
    pub fn from_rows(ambient: usize, m: Matrix) -> Self {
        assert_eq!(m.cols, ambient, "spanning vectors live in the wrong space");
        let (red, pivots) = rref(&m);
        let mut basis = Matrix::with_cols(ambient);
        for r in 0..pivots.len() {
            basis.push_row(red.row(r).to_vec());
        }
        Subspace { ambient, basis }
    }

    pub fn span(ambient: usize, vectors: &[Vec<Q>]) -> Self {
        let mut m = Matrix::with_cols(ambient);
        for v in vectors {
            m.push_row(v.clone());
        }
        Self::from_rows(ambient, m)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vecs(&self) -> Vec<Vec<Q>> {
        self.basis.row_vecs()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::Dimension(format!(
                "ambient dimensions {} and {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let mut m = self.basis.clone();
        for r in 0..other.basis.rows {
            m.push_row(other.basis.row(r).to_vec());
        }
        Ok(Self::from_rows(self.ambient, m))
    }

    /// Vectors orthogonal to the subspace for the standard dot product.
    pub fn annihilator(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        kernel(&self.basis)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let a = self.annihilator();
        let b = other.annihilator();
        let mut m = a.basis.clone();
        for r in 0..b.basis.rows {
            m.push_row(b.basis.row(r).to_vec());
        }
        if m.rows == 0 {
            return Ok(Subspace::full(self.ambient));
        }
        Ok(kernel(&m))
    }

    pub fn contains(&self, v: &[Q]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::Dimension(format!(
                "vector of length {} against ambient {}",
                v.len(),
                self.ambient
            )));
        }
        // Clear v against the pivots of the canonical basis.
        let mut w = v.to_vec();
        for r in 0..self.basis.rows {
            let row = self.basis.row(r);
            let p = row.iter().position(|x| !x.is_zero()).expect("basis rows are nonzero");
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (wc, x) in w.iter_mut().zip(row) {
                if !x.is_zero() {
                    *wc -= &f * x;
                }
            }
        }
        Ok(is_zero_vec(&w))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        for v in other.basis_vecs() {
            if !self.contains(&v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equal(&self, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        Ok(self == other)
    }

    /// Image of the subspace under `x ↦ m·x`.
    pub fn image(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols, self.ambient);
        let vs: Vec<Vec<Q>> = self.basis_vecs().iter().map(|v| m.mul_vec(v)).collect();
        Subspace::span(m.rows, &vs)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.basis.to_strings()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<Q> {
        let mut v = vec![q(0); n];
        v[i] = q(1);
        v
    }

    #[test]
    fn rref_identity() {
        let (r, p) = rref(&Matrix::identity(2));
        assert_eq!(r, Matrix::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_invertible() {
        let (r, p) = rref(&Matrix::from_i64(&[&[1, 1], &[1, 0]]));
        assert_eq!(r, Matrix::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_rank_one() {
        // second row is twice the first
        let (r, p) = rref(&Matrix::from_i64(&[&[1, 2], &[2, 4]]));
        assert_eq!(r, Matrix::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel(&Matrix::identity(2)).dim(), 0);
        assert_eq!(kernel(&Matrix::zeros(2, 2)), Subspace::full(2));
        let k = kernel(&Matrix::from_i64(&[&[1, 1]]));
        // x + y = 0, normalized so the pivot is 1
        assert_eq!(k.basis(), &Matrix::from_i64(&[&[1, -1]]));
    }

    #[test]
    fn solving() {
        let b = vec![q(3), qf(1, 2)];
        assert_eq!(solve(&Matrix::identity(2), &b).unwrap(), Some(b.clone()));
        assert_eq!(solve(&Matrix::from_i64(&[&[1, 1]]), &[q(0)]).unwrap(), Some(vec![q(0), q(0)]));
        assert_eq!(solve(&Matrix::from_i64(&[&[1], &[1]]), &[q(1), q(2)]).unwrap(), None);
        assert!(solve(&Matrix::identity(2), &[q(1)]).is_err());
    }

    #[test]
    fn subspace_examples() {
        let a = Subspace::span(2, &[e(2, 0)]);
        let b = Subspace::span(2, &[e(2, 1)]);
        assert_eq!(a.sum(&b).unwrap(), Subspace::full(2));
        assert_eq!(a.intersect(&b).unwrap(), Subspace::zero(2));
        let diag = Subspace::span(2, &[vec![q(1), q(1)]]);
        assert_eq!(diag.intersect(&Subspace::full(2)).unwrap(), diag);
        assert!(a.sum(&Subspace::zero(3)).is_err());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-6/4").unwrap(), qf(-3, 2));
        assert_eq!(fmt_q(&qf(-3, 2)), "-3/2");
        assert_eq!(fmt_q(&q(7)), "7");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(m.determinant(), q(1));
        assert_eq!(m.mul(&m.inverse().unwrap()), Matrix::identity(2));
        assert!(Matrix::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    fn small_matrix(max: usize) -> impl Strategy<Value = Matrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-2i64..=2, r * c)
                .prop_map(move |v| Matrix::from_vec(r, c, v.into_iter().map(q).collect()))
        })
    }

    /// Two matrices with the same number of columns.
    fn matrix_pair(max: usize) -> impl Strategy<Value = (Matrix, Matrix)> {
        (1..=max, 1..=max, 1..=max).prop_flat_map(|(r1, r2, c)| {
            (
                proptest::collection::vec(-2i64..=2, r1 * c),
                proptest::collection::vec(-2i64..=2, r2 * c),
            )
                .prop_map(move |(a, b)| {
                    (
                        Matrix::from_vec(r1, c, a.into_iter().map(q).collect()),
                        Matrix::from_vec(r2, c, b.into_iter().map(q).collect()),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix(8)) {
            let k = kernel(&m);
            prop_assert_eq!(m.rank() + k.dim(), m.cols);
            for v in k.basis_vecs() {
                prop_assert!(is_zero_vec(&m.mul_vec(&v)));
            }
        }

        #[test]
        fn grassmann_identity((a, b) in matrix_pair(6)) {
            let n = a.cols;
            let sa = Subspace::from_rows(n, a);
            let sb = Subspace::from_rows(n, b);
            let s = sa.sum(&sb).unwrap();
            let i = sa.intersect(&sb).unwrap();
            prop_assert_eq!(s.dim() + i.dim(), sa.dim() + sb.dim());
            prop_assert!(sa.contains_subspace(&i).unwrap() && sb.contains_subspace(&i).unwrap());
        }

        #[test]
        fn equality_is_mutual_containment((a, b) in matrix_pair(4)) {
            let n = a.cols;
            let sa = Subspace::from_rows(n, a);
            let sb = Subspace::from_rows(n, b);
            let mutual = sa.contains_subspace(&sb).unwrap() && sb.contains_subspace(&sa).unwrap();
            prop_assert_eq!(sa.equal(&sb).unwrap(), mutual);
        }

        #[test]
        fn solve_returns_solutions(m in small_matrix(6), seed in proptest::collection::vec(-3i64..=3, 6)) {
            let x0: Vec<Q> = seed.iter().take(m.cols).cloned().map(q).chain(std::iter::repeat(q(0))).take(m.cols).collect();
            let b = m.mul_vec(&x0);
            let x = solve(&m, &b).unwrap().expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&x), b);
        }
    }
}
