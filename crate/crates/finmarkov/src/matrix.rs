//! Dense matrix kernel: Kronecker products, column-stacking `vec`, the
//! Δ-operator, and the stochastic newtypes the model layer builds on.
//!
//! Everything here is scalar-generic and pure. The stochastic convention is
//! COLUMN-stochastic throughout the crate: entry `(i, j)` of a kernel matrix
//! is the probability of moving TO `i` FROM `j`. This is transposed relative
//! to most HMM texts; see the crate-level docs.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar, FLOAT_STOCH_TOL};

/// Dense row-major matrix over a [`Scalar`] field.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    /// Matrix filled with zeros. Panics if either dimension is 0.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols >= 1, "matrix needs at least one column");
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged rows in matrix literal"
        );
        let nrows = rows.len();
        Matrix {
            rows: nrows,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Convenience for integer literals in tests and examples.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    /// 1 x k row of ones.
    pub fn ones_row(k: usize) -> Self {
        Matrix::from_fn(1, k, |_, _| S::one())
    }

    /// k x 1 column of ones.
    pub fn ones_col(k: usize) -> Self {
        Matrix::from_fn(k, 1, |_, _| S::one())
    }

    /// Square matrix with `v` on the diagonal.
    pub fn diag(v: &[S]) -> Self {
        Matrix::from_fn(v.len(), v.len(), |r, c| {
            if r == c {
                v[r].clone()
            } else {
                S::zero()
            }
        })
    }

    /// Column vector (k x 1) from a slice.
    pub fn col_vector(v: &[S]) -> Self {
        assert!(!v.is_empty());
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Standard basis column vector `e_i` of dimension `n` (0-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        assert!(i < n, "basis index out of range");
        Matrix::from_fn(n, 1, |r, _| if r == i { S::one() } else { S::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    /// Matrix product. Panics on incompatible dimensions.
    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(
            self.cols, other.rows,
            "incompatible dimensions {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out: Matrix<S> = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] = out[(r, c)].clone() + a.clone() * other[(k, c)].clone();
                }
            }
        }
        out
    }

    /// Matrix-vector product as a plain scalar vector.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| {
                sum((0..self.cols)
                    .filter(|&c| !self[(r, c)].is_zero())
                    .map(|c| self[(r, c)].clone() * v[c].clone()))
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() + other[(r, c)].clone()
        })
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self[(r, c)].clone() - other[(r, c)].clone()
        })
    }

    pub fn scale(&self, k: &S) -> Matrix<S> {
        Matrix::from_fn(self.rows, self.cols, |r, c| k.clone() * self[(r, c)].clone())
    }

    /// Kronecker product `self ⊗ other`: block `(i, j)` equals
    /// `self[i, j] * other`.
    pub fn kron(&self, other: &Matrix<S>) -> Matrix<S> {
        let mut out: Matrix<S> = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for ra in 0..self.rows {
            for ca in 0..self.cols {
                let a = &self[(ra, ca)];
                if a.is_zero() {
                    continue;
                }
                for rb in 0..other.rows {
                    for cb in 0..other.cols {
                        out[(ra * other.rows + rb, ca * other.cols + cb)] =
                            a.clone() * other[(rb, cb)].clone();
                    }
                }
            }
        }
        out
    }

    /// Column-stacking vectorization: stacks the columns one underneath the
    /// other into a `rows*cols x 1` vector. Satisfies
    /// `vec(x yᵀ) = y ⊗ x` for column vectors `x`, `y`.
    pub fn vectorize(&self) -> Matrix<S> {
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self[(r, c)].clone());
            }
        }
        Matrix {
            rows: self.rows * self.cols,
            cols: 1,
            data,
        }
    }

    /// The Δ-operator: for an `m x n` matrix `G`, returns the `nm x n`
    /// matrix whose i-th `n x n` block is `diag(G_{i·})` (diagonal of the
    /// i-th row).
    pub fn delta(&self) -> Matrix<S> {
        let (m, n) = (self.rows, self.cols);
        let mut out = Matrix::zeros(n * m, n);
        for i in 0..m {
            for k in 0..n {
                out[(i * n + k, k)] = self[(i, k)].clone();
            }
        }
        out
    }

    /// Sum of column `c`.
    pub fn col_sum(&self, c: usize) -> S {
        sum((0..self.rows).map(|r| self[(r, c)].clone()))
    }

    /// Entrywise comparison within `tol` (exact equality for exact scalars).
    pub fn approx_eq(&self, other: &Matrix<S>, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|s| s.to_f64())
    }

    /// Extract the column as a plain vector of scalars.
    pub fn col_as_vec(&self, c: usize) -> Vec<S> {
        self.col(c)
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.render()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `(1ᵀ_m ⊗ I_n)`: the `n x nm` selector that recovers the X component of
/// a joint vector `z = y ⊗ x`.
pub fn x_selector<S: Scalar>(n: usize, m: usize) -> Matrix<S> {
    assert!(n >= 1 && m >= 1);
    Matrix::ones_row(m).kron(&Matrix::identity(n))
}

/// `(I_m ⊗ 1ᵀ_n)`: the `m x nm` selector that recovers the Y component of
/// a joint vector `z = y ⊗ x`.
pub fn y_selector<S: Scalar>(n: usize, m: usize) -> Matrix<S> {
    assert!(n >= 1 && m >= 1);
    Matrix::identity(m).kron(&Matrix::ones_row(n))
}

/// Flat index of the joint state `(x, y)` with `n` states: `y * n + x`.
/// This is the ordering induced by `z = y ⊗ x` (0-based throughout).
pub fn joint_index(x: usize, y: usize, n: usize) -> usize {
    y * n + x
}

/// Inverse of [`joint_index`]: returns `(x, y)`.
pub fn joint_unpack(k: usize, n: usize) -> (usize, usize) {
    (k % n, k / n)
}

/// Column-stochastic matrix: entries nonnegative, every column sums to 1
/// (exactly for rationals, within `1e-12` for floats).
#[derive(Clone, PartialEq)]
pub struct StochMatrix<S> {
    inner: Matrix<S>,
}

impl<S: Scalar> StochMatrix<S> {
    pub fn new(inner: Matrix<S>) -> Result<Self> {
        Self::named(inner, "matrix")
    }

    /// Validate with `name` used in error messages, e.g. `"A"`.
    pub fn named(inner: Matrix<S>, name: &str) -> Result<Self> {
        for c in 0..inner.cols() {
            for r in 0..inner.rows() {
                if inner[(r, c)] < S::zero() {
                    return Err(Error::validation(
                        format!("{name}[{r}][{c}]"),
                        format!("negative entry {}", inner[(r, c)].render()),
                    ));
                }
            }
            let total = inner.col_sum(c);
            if !total.approx_eq(&S::one(), FLOAT_STOCH_TOL) {
                return Err(Error::validation(
                    format!("{name} column {c}"),
                    format!("sums to {}, expected 1", total.render()),
                ));
            }
        }
        Ok(StochMatrix { inner })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.inner
    }

    pub fn to_f64(&self) -> StochMatrix<f64> {
        StochMatrix {
            inner: self.inner.to_f64(),
        }
    }
}

impl<S> std::ops::Deref for StochMatrix<S> {
    type Target = Matrix<S>;
    fn deref(&self) -> &Matrix<S> {
        &self.inner
    }
}

impl<S: Scalar> fmt::Debug for StochMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stoch{:?}", self.inner)
    }
}

/// Probability vector: nonnegative entries summing to 1 (exact / 1e-12).
#[derive(Clone, PartialEq)]
pub struct ProbVector<S> {
    entries: Vec<S>,
}

impl<S: Scalar> ProbVector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        Self::named(entries, "vector")
    }

    pub fn named(entries: Vec<S>, name: &str) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation(name, "must have at least one entry"));
        }
        for (i, e) in entries.iter().enumerate() {
            if *e < S::zero() {
                return Err(Error::validation(
                    format!("{name}[{i}]"),
                    format!("negative entry {}", e.render()),
                ));
            }
        }
        let total = sum(entries.iter().cloned());
        if !total.approx_eq(&S::one(), FLOAT_STOCH_TOL) {
            return Err(Error::validation(
                name,
                format!("sums to {}, expected 1", total.render()),
            ));
        }
        Ok(ProbVector { entries })
    }

    /// Renormalize a nonnegative vector; `None` when the total mass is zero.
    pub fn normalize(raw: Vec<S>) -> Option<Self> {
        let total = sum(raw.iter().cloned());
        if total.is_zero() {
            return None;
        }
        Some(ProbVector {
            entries: raw.into_iter().map(|v| v / total.clone()).collect(),
        })
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k >= 1);
        ProbVector {
            entries: vec![S::from_ratio(1, k as i64); k],
        }
    }

    /// Point mass at index `i` (0-based).
    pub fn point(k: usize, i: usize) -> Self {
        assert!(i < k);
        let mut entries = vec![S::zero(); k];
        entries[i] = S::one();
        ProbVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &S {
        &self.entries[i]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.entries.iter()
    }

    /// As an `k x 1` column matrix.
    pub fn as_column(&self) -> Matrix<S> {
        Matrix::col_vector(&self.entries)
    }

    pub fn approx_eq(&self, other: &ProbVector<S>, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .entries
                .iter()
                .zip(other.entries.iter())
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn to_f64(&self) -> ProbVector<f64> {
        ProbVector {
            entries: self.entries.iter().map(|s| s.to_f64()).collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for ProbVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row: Vec<String> = self.entries.iter().map(|v| v.render()).collect();
        write!(f, "p[{}]", row.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type RMat = Matrix<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn kron_scalar_case() {
        let a = RMat::from_int_rows(&[&[1]]);
        let b = RMat::from_int_rows(&[&[5]]);
        assert_eq!(a.kron(&b), RMat::from_int_rows(&[&[5]]));
    }

    #[test]
    fn kron_of_basis_vectors_matches_joint_ordering() {
        // e_2 in R^2 paired with f_2 in R^2 must land at flat index
        // (j-1)*n + i = 1*2 + 2 in 1-based terms, i.e. z_4.
        let n = 2;
        let e2 = RMat::basis(n, 1); // e_2, 0-based index 1
        let f2 = RMat::basis(2, 1);
        let z = f2.kron(&e2); // z = y ⊗ x
        assert_eq!(z.rows(), 4);
        for k in 0..4 {
            let expect = if k == joint_index(1, 1, n) {
                Rational::from_int(1)
            } else {
                Rational::from_int(0)
            };
            assert_eq!(z[(k, 0)], expect, "flat index {k}");
        }
    }

    #[test]
    fn vectorize_definition() {
        let m = RMat::from_int_rows(&[&[1, 2], &[3, 4]]);
        let v = m.vectorize();
        let expect: Vec<Rational> = [1, 3, 2, 4].iter().map(|&k| r(k, 1)).collect();
        assert_eq!(v, RMat::col_vector(&expect));
    }

    #[test]
    fn vectorize_outer_product_is_kron() {
        // vec(e_2 f_1ᵀ) = f_1 ⊗ e_2 = (0,1,0,0)ᵀ for n = m = 2
        let e2 = RMat::basis(2, 1);
        let f1 = RMat::basis(2, 0);
        let outer = e2.mul(&f1.transpose());
        assert_eq!(outer.vectorize(), f1.kron(&e2));
        let expect: Vec<Rational> = [0, 1, 0, 0].iter().map(|&k| r(k, 1)).collect();
        assert_eq!(outer.vectorize(), RMat::col_vector(&expect));
    }

    #[test]
    fn vectorize_outer_product_is_kron_exhaustive_small_dims() {
        for n in 1..=4 {
            for m in 1..=4 {
                for i in 0..n {
                    for j in 0..m {
                        let x = RMat::basis(n, i);
                        let y = RMat::basis(m, j);
                        assert_eq!(x.mul(&y.transpose()).vectorize(), y.kron(&x));
                    }
                }
            }
        }
    }

    #[test]
    fn delta_trivial_and_identity() {
        let one = RMat::from_int_rows(&[&[1]]);
        assert_eq!(one.delta(), RMat::from_int_rows(&[&[1]]));

        let i2 = RMat::identity(2);
        let d = i2.delta();
        let expect = RMat::from_int_rows(&[&[1, 0], &[0, 0], &[0, 0], &[0, 1]]);
        assert_eq!(d, expect);
    }

    #[test]
    fn selectors_recover_components() {
        assert_eq!(x_selector::<Rational>(1, 1), RMat::from_int_rows(&[&[1]]));
        let e1 = RMat::basis(2, 0);
        let f2 = RMat::basis(2, 1);
        let z = f2.kron(&e1);
        assert_eq!(x_selector::<Rational>(2, 2).mul(&z), e1);
        assert_eq!(y_selector::<Rational>(2, 2).mul(&z), f2);
    }

    #[test]
    fn stoch_matrix_validation() {
        let good = RMat::from_rows(vec![
            vec![r(1, 3), r(1, 2)],
            vec![r(2, 3), r(1, 2)],
        ]);
        assert!(StochMatrix::new(good).is_ok());

        let bad_sum = RMat::from_rows(vec![vec![r(1, 3), r(1, 2)], vec![r(1, 3), r(1, 2)]]);
        let err = StochMatrix::named(bad_sum, "A").unwrap_err();
        assert!(format!("{err}").contains("A column 0"), "{err}");

        let negative = RMat::from_rows(vec![vec![r(3, 2), r(1, 2)], vec![r(-1, 2), r(1, 2)]]);
        let err = StochMatrix::named(negative, "G").unwrap_err();
        assert!(format!("{err}").contains("G[1][0]"), "{err}");
    }

    #[test]
    fn prob_vector_validation_and_normalize() {
        assert!(ProbVector::new(vec![r(1, 4), r(3, 4)]).is_ok());
        assert!(ProbVector::new(vec![r(1, 4), r(1, 4)]).is_err());
        assert!(ProbVector::<Rational>::normalize(vec![r(0, 1), r(0, 1)]).is_none());
        let p = ProbVector::normalize(vec![r(1, 1), r(3, 1)]).unwrap();
        assert_eq!(p.as_slice(), &[r(1, 4), r(3, 4)]);
    }

    #[test]
    fn float_validation_uses_tolerance() {
        let m = Matrix::<f64>::from_rows(vec![vec![0.3, 0.5], vec![0.7, 0.5 + 1e-13]]);
        assert!(StochMatrix::new(m).is_ok());
        let m = Matrix::<f64>::from_rows(vec![vec![0.3, 0.5], vec![0.7, 0.51]]);
        assert!(StochMatrix::new(m).is_err());
    }

    #[test]
    fn joint_index_round_trip() {
        let n = 3;
        for y in 0..4 {
            for x in 0..n {
                assert_eq!(joint_unpack(joint_index(x, y, n), n), (x, y));
            }
        }
    }
}
