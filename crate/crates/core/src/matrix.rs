//! Row-major dense matrices and the factor pair `(W, H)`.
//!
//! Everything above this module expresses its math as whole-matrix
//! operations on [`DenseMatrix`]. Products go through `matrixmultiply`'s
//! pure-Rust gemm, which accepts arbitrary strides, so transposed products
//! never materialize a transpose.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(6) {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row = self.row(i);
            for (j, v) in row.iter().take(6).enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v:.6e}")?;
            }
            if self.cols > 6 {
                write!(f, ", ...")?;
            }
        }
        if self.rows > 6 {
            write!(f, "; ...")?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::new"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix shape");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input; intended for
    /// literals and tests.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data).expect("invalid literal matrix")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other, "zip_map")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in out.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        out
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.data.iter().all(|&v| v > 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dim(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// `A · B`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::dim(format!(
            "matmul: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c = DenseMatrix::zeros(m, n);
    // SAFETY: all three buffers are exactly sized for the given strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            k as isize,
            1,
            b.data.as_ptr(),
            n as isize,
            1,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(c)
}

/// `Aᵀ · B` without forming `Aᵀ`.
pub fn matmul_tn(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows != b.rows {
        return Err(Error::dim(format!(
            "matmul_tn: ({}x{})ᵀ times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, k, n) = (a.cols, a.rows, b.cols);
    let mut c = DenseMatrix::zeros(m, n);
    // SAFETY: A is read column-major (row stride 1, column stride a.cols).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            1,
            a.cols as isize,
            b.data.as_ptr(),
            n as isize,
            1,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(c)
}

/// `A · Bᵀ` without forming `Bᵀ`.
pub fn matmul_nt(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return Err(Error::dim(format!(
            "matmul_nt: {}x{} times ({}x{})ᵀ",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, k, n) = (a.rows, a.cols, b.rows);
    let mut c = DenseMatrix::zeros(m, n);
    // SAFETY: B is read column-major (row stride 1, column stride b.cols).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            k as isize,
            1,
            b.data.as_ptr(),
            1,
            b.cols as isize,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `max(a, b)`; with a zero scalar operand this is `[a]₊`.
    Max0,
}

/// Right-hand operand of [`elementwise`]: a matrix of the same shape or a
/// scalar broadcast to every entry.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Matrix(&'a DenseMatrix),
    Scalar(f64),
}

impl<'a> From<&'a DenseMatrix> for Operand<'a> {
    fn from(m: &'a DenseMatrix) -> Self {
        Operand::Matrix(m)
    }
}

impl From<f64> for Operand<'_> {
    fn from(v: f64) -> Self {
        Operand::Scalar(v)
    }
}

pub fn elementwise<'a>(
    op: ElementOp,
    a: &DenseMatrix,
    b: impl Into<Operand<'a>>,
) -> Result<DenseMatrix> {
    let b = b.into();
    if let Operand::Matrix(m) = b {
        a.check_same_shape(m, "elementwise")?;
    }
    let rhs = |idx: usize| match b {
        Operand::Matrix(m) => m.data[idx],
        Operand::Scalar(s) => s,
    };
    let mut data = Vec::with_capacity(a.len());
    for (idx, &x) in a.data.iter().enumerate() {
        let y = rhs(idx);
        let v = match op {
            ElementOp::Add => x + y,
            ElementOp::Sub => x - y,
            ElementOp::Mul => x * y,
            ElementOp::Div => {
                if y == 0.0 {
                    return Err(Error::DivisionByZero {
                        row: idx / a.cols,
                        col: idx % a.cols,
                    });
                }
                x / y
            }
            ElementOp::Max0 => x.max(y),
        };
        if !v.is_finite() {
            return Err(Error::NonFinite("elementwise"));
        }
        data.push(v);
    }
    Ok(DenseMatrix {
        rows: a.rows,
        cols: a.cols,
        data,
    })
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The optimization variable `Z = (W, H)` with `W: m×r`, `H: r×n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
}

impl FactorPair {
    pub fn new(w: DenseMatrix, h: DenseMatrix) -> Result<Self> {
        if w.cols != h.rows {
            return Err(Error::dim(format!(
                "factor pair: W is {}x{}, H is {}x{}",
                w.rows, w.cols, h.rows, h.cols
            )));
        }
        Ok(Self { w, h })
    }

    pub fn m(&self) -> usize {
        self.w.rows
    }

    pub fn n(&self) -> usize {
        self.h.cols
    }

    pub fn rank(&self) -> usize {
        self.w.cols
    }

    pub fn product(&self) -> DenseMatrix {
        matmul(&self.w, &self.h).expect("factor shapes checked at construction")
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.w.is_strictly_positive() && self.h.is_strictly_positive()
    }

    pub fn all_finite(&self) -> bool {
        self.w.all_finite() && self.h.all_finite()
    }

    /// Frobenius norm of the stacked variable `‖(W, H)‖_F`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        let sq = |m: &DenseMatrix| m.data.iter().map(|v| v * v).sum::<f64>();
        sq(&self.w) + sq(&self.h)
    }

    /// `‖self − other‖_F` over both blocks.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let sq = |a: &DenseMatrix, b: &DenseMatrix| {
            a.data
                .iter()
                .zip(&b.data)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        };
        Ok((sq(&self.w, &other.w) + sq(&self.h, &other.h)).sqrt())
    }

    /// `⟨self, other⟩` summed over both blocks.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(self.w.dot(&other.w)? + self.h.dot(&other.h)?)
    }

    /// Entrywise combination over both blocks.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Ok(Self {
            w: self.w.zip_map(&other.w, &f)?,
            h: self.h.zip_map(&other.h, &f)?,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            w: self.w.map(&f),
            h: self.h.map(&f),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        self.w.check_same_shape(&other.w, "factor W")?;
        self.h.check_same_shape(&other.h, "factor H")
    }

    pub(crate) fn require_positive(&self, what: &str) -> Result<()> {
        if !self.is_strictly_positive() {
            return Err(Error::domain(format!(
                "{what}: factors must be strictly positive"
            )));
        }
        Ok(())
    }
}
