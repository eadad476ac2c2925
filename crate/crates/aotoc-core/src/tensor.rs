//! Dense complex matrices and multi-qubit index plumbing.
//!
//! Everything downstream works on row-major [`CMatrix`] values. Qubit 0 is
//! the leftmost tensor factor, i.e. the most significant bit of a basis
//! index; subsystem A is the first L/2 qubits of a register.

use crate::error::{Error, Result};
use matrixmultiply::{zgemm, CGemmOption};
use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C_ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C_ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, data }
    }

    /// 2x2 matrix from row-major entries.
    pub fn two_by_two(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self::from_vec(2, 2, vec![a, b, c, d])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        if m == 0 || k == 0 || n == 0 {
            return out;
        }
        // Complex64 is repr(C) { re: f64, im: f64 }, layout-identical to [f64; 2].
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                rhs.data.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &CMatrix, s: Complex64) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Tr(self * rhs) without forming the product.
    pub fn trace_product(&self, rhs: &CMatrix) -> Complex64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = C_ZERO;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.data[i * self.cols + j] * rhs.data[j * rhs.cols + i];
            }
        }
        acc
    }

    /// Squared Frobenius norm Tr(M^dag M).
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_residual(&self) -> f64 {
        assert!(self.is_square());
        self.dagger().matmul(self).max_abs_diff(&CMatrix::identity(self.rows))
    }

    /// Left-multiply by a local operator acting on the given qubits of an
    /// L-qubit register: out = (op on qubits) * self. `op` is 2^q x 2^q with
    /// q = qubits.len(); qubit indices count from the left (MSB).
    pub fn apply_local_left(&self, op: &CMatrix, qubits: &[usize], l: usize) -> CMatrix {
        let d = 1usize << l;
        assert_eq!(self.rows, d);
        let q = qubits.len();
        let dq = 1usize << q;
        assert_eq!(op.rows, dq);
        let shifts: Vec<usize> = qubits.iter().map(|&qb| l - 1 - qb).collect();
        let mask: usize = shifts.iter().map(|&sh| 1usize << sh).sum();
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for r in 0..d {
            let mut sub = 0usize;
            for (i, &sh) in shifts.iter().enumerate() {
                sub |= ((r >> sh) & 1) << (q - 1 - i);
            }
            let base = r & !mask;
            for s in 0..dq {
                let coeff = op.get(sub, s);
                if coeff == C_ZERO {
                    continue;
                }
                let mut src = base;
                for (i, &sh) in shifts.iter().enumerate() {
                    src |= ((s >> (q - 1 - i)) & 1) << sh;
                }
                let or = r * self.cols;
                let sr = src * self.cols;
                for c in 0..self.cols {
                    out.data[or + c] += coeff * self.data[sr + c];
                }
            }
        }
        out
    }

    /// Right-multiply by a local operator: out = self * (op on qubits).
    pub fn apply_local_right(&self, op: &CMatrix, qubits: &[usize], l: usize) -> CMatrix {
        self.dagger().apply_local_left(&op.dagger(), qubits, l).dagger()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, C_ONE);
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, -C_ONE);
        out
    }
}

/// Bipartitioned register of L qubits: A = qubits 0..L/2, B = the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRegisterLayout {
    l: usize,
}

impl QubitRegisterLayout {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 || l % 2 != 0 {
            return Err(Error::InvalidParam(format!("L must be even and >= 2, got {l}")));
        }
        Ok(Self { l })
    }

    pub fn num_qubits(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        1 << self.l
    }

    pub fn dim_a(&self) -> usize {
        1 << (self.l / 2)
    }

    pub fn dim_b(&self) -> usize {
        1 << (self.l / 2)
    }

    pub fn half(&self) -> usize {
        self.l / 2
    }
}

/// Which qubits a partial trace removes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subsystem {
    /// Trace out the first L/2 qubits.
    A,
    /// Trace out the last L/2 qubits.
    B,
    /// Trace out an explicit qubit set.
    Qubits(Vec<usize>),
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ra in 0..a.rows() {
        for ca in 0..a.cols() {
            let va = a.get(ra, ca);
            if va == C_ZERO {
                continue;
            }
            for rb in 0..b.rows() {
                for cb in 0..b.cols() {
                    out.set(ra * b.rows() + rb, ca * b.cols() + cb, va * b.get(rb, cb));
                }
            }
        }
    }
    out
}

/// Trace out the designated qubits of a 2^L-dimensional square matrix.
pub fn partial_trace(m: &CMatrix, layout: &QubitRegisterLayout, sub: &Subsystem) -> Result<CMatrix> {
    let l = layout.num_qubits();
    let d = layout.dim();
    if !m.is_square() || m.rows() != d {
        return Err(Error::DimMismatch(format!(
            "expected {d}x{d} matrix for L={l}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let traced: Vec<usize> = match sub {
        Subsystem::A => (0..l / 2).collect(),
        Subsystem::B => (l / 2..l).collect(),
        Subsystem::Qubits(q) => {
            let mut q = q.clone();
            q.sort_unstable();
            q.dedup();
            if q.iter().any(|&x| x >= l) {
                return Err(Error::InvalidParam(format!("qubit index out of range for L={l}")));
            }
            q
        }
    };
    let kept: Vec<usize> = (0..l).filter(|q| !traced.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let kept_shift: Vec<usize> = kept.iter().map(|&q| l - 1 - q).collect();
    let traced_shift: Vec<usize> = traced.iter().map(|&q| l - 1 - q).collect();
    let expand = |bits: usize, shifts: &[usize]| -> usize {
        let n = shifts.len();
        let mut x = 0usize;
        for (i, &sh) in shifts.iter().enumerate() {
            x |= ((bits >> (n - 1 - i)) & 1) << sh;
        }
        x
    };
    let mut out = CMatrix::zeros(dk, dk);
    for rk in 0..dk {
        let rbase = expand(rk, &kept_shift);
        for ck in 0..dk {
            let cbase = expand(ck, &kept_shift);
            let mut acc = C_ZERO;
            for t in 0..dt {
                let toff = expand(t, &traced_shift);
                acc += m.get(rbase | toff, cbase | toff);
            }
            out.set(rk, ck, acc);
        }
    }
    Ok(out)
}

/// Swap operator S on C^d (x) C^d: S(x (x) y) = y (x) x.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s.set(j * d + i, i * d + j, C_ONE);
        }
    }
    s
}

/// Hilbert-Schmidt inner product <x, y> = Tr(x^dag y).
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<Complex64> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimMismatch(format!(
            "hs_inner: {}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(x.data().iter().zip(y.data()).map(|(a, b)| a.conj() * b).sum())
}
