//! Truncated bosonic modes, collective spin sectors, composite bases and the
//! sparse operator type every other module consumes.
//!
//! Composite bases are laid out row-major over their factor list, so the last
//! factor has unit stride. The simulator always orders factors as
//! (field, spin or atom boson, mirror).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dimension above which matrix-vector products are split across threads.
const PAR_MATVEC_MIN_DIM: usize = 4096;

/// Default row count below which an operator may be converted to a dense matrix.
pub const DEFAULT_DENSE_THRESHOLD: usize = 2048;

/// A truncated bosonic mode holding occupations `0..=cutoff`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockMode {
    cutoff: usize,
    label: String,
}

impl FockMode {
    pub fn new(label: impl Into<String>, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParameter(format!(
                "Fock cutoff must be at least 1, got {cutoff}"
            )));
        }
        Ok(FockMode {
            cutoff,
            label: label.into(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// The symmetric spin-J sector, basis |J,m> ordered m = -J..=+J.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinSector {
    two_j: u32,
}

impl SpinSector {
    pub fn new(two_j: u32) -> Result<Self> {
        if two_j < 1 {
            return Err(Error::InvalidParameter("2J must be at least 1".into()));
        }
        Ok(SpinSector { two_j })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

/// One tensor factor of a composite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Fock(FockMode),
    Spin(SpinSector),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Fock(m) => m.dim(),
            Space::Spin(s) => s.dim(),
        }
    }

    /// Spaces are interchangeable when kind and dimension agree; labels are cosmetic.
    fn same_shape(&self, other: &Space) -> bool {
        match (self, other) {
            (Space::Fock(a), Space::Fock(b)) => a.cutoff == b.cutoff,
            (Space::Spin(a), Space::Spin(b)) => a.two_j == b.two_j,
            _ => false,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Fock(m) => write!(f, "fock[{}; cutoff {}]", m.label, m.cutoff),
            Space::Spin(s) => write!(f, "spin[2J = {}]", s.two_j),
        }
    }
}

impl From<FockMode> for Space {
    fn from(m: FockMode) -> Self {
        Space::Fock(m)
    }
}

impl From<SpinSector> for Space {
    fn from(s: SpinSector) -> Self {
        Space::Spin(s)
    }
}

/// Ordered tensor product of spaces with a row-major index layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeBasis {
    factors: Vec<Space>,
    dims: Vec<usize>,
    total_dim: usize,
}

impl CompositeBasis {
    pub fn new(factors: Vec<Space>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("a basis needs at least one factor".into()));
        }
        let dims: Vec<usize> = factors.iter().map(Space::dim).collect();
        let total_dim = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidParameter("basis dimension overflows usize".into()))?;
        Ok(CompositeBasis {
            factors,
            dims,
            total_dim,
        })
    }

    pub fn single(space: impl Into<Space>) -> Arc<Self> {
        // a single valid factor cannot overflow
        Arc::new(Self::new(vec![space.into()]).expect("single-factor basis"))
    }

    pub fn factors(&self) -> &[Space] {
        &self.factors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Distance in the flat index between consecutive states of factor `slot`.
    pub fn stride(&self, slot: usize) -> usize {
        self.dims[slot + 1..].iter().product()
    }

    pub fn index(&self, local: &[usize]) -> usize {
        debug_assert_eq!(local.len(), self.arity());
        local
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| {
                debug_assert!(i < d);
                acc * d + i
            })
    }

    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let mut local = vec![0; self.arity()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            local[slot] = index % d;
            index /= d;
        }
        local
    }

    /// Diagonal of the parity operator (-1)^(sum of local indices over `slots`).
    ///
    /// For a spin factor the local index is m + J, so the field-plus-spin parity
    /// is exp(i pi (a^dagger a + J_z + J)).
    pub fn parity(&self, slots: &[usize]) -> Vec<f64> {
        (0..self.total_dim)
            .map(|i| {
                let local = self.unravel(i);
                let n: usize = slots.iter().map(|&s| local[s]).sum();
                if n % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }

    /// Concatenate factor lists, `self` first.
    pub fn tensor(&self, other: &CompositeBasis) -> Result<CompositeBasis> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        CompositeBasis::new(factors)
    }
}

impl fmt::Display for CompositeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Compressed sparse row storage.
#[derive(Clone, Debug)]
struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut csr = Csr {
            dim,
            row_ptr,
            cols,
            vals,
        };
        csr.prune();
        csr
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != C64::new(0.0, 0.0) {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    fn matvec(&self, x: &[C64], y: &mut [C64]) {
        if self.dim >= PAR_MATVEC_MIN_DIM {
            y.par_iter_mut()
                .with_min_len(512)
                .enumerate()
                .for_each(|(r, out)| *out = self.row_dot(r, x));
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out = self.row_dot(r, x);
            }
        }
    }

    fn matmul(&self, rhs: &Csr) -> Csr {
        // Gustavson row-by-row accumulation
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut live: Vec<usize> = Vec::new();
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        live.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            live.sort_unstable();
            for &c in &live {
                cols.push(c);
                vals.push(acc[c]);
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            live.clear();
            row_ptr[r + 1] = cols.len();
        }
        let mut out = Csr {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        };
        out.prune();
        out
    }
}

/// A square complex matrix acting on a composite basis.
#[derive(Clone, Debug)]
pub struct Operator {
    basis: Arc<CompositeBasis>,
    csr: Csr,
    hermitian_hint: bool,
}

impl Operator {
    pub fn from_triplets(
        basis: Arc<CompositeBasis>,
        triplets: Vec<(usize, usize, C64)>,
        hermitian_hint: bool,
    ) -> Self {
        let csr = Csr::from_triplets(basis.total_dim(), triplets);
        Operator {
            basis,
            csr,
            hermitian_hint,
        }
    }

    pub fn from_real_triplets(
        basis: Arc<CompositeBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        hermitian_hint: bool,
    ) -> Self {
        let triplets = triplets
            .into_iter()
            .map(|(r, c, v)| (r, c, C64::new(v, 0.0)))
            .collect();
        Self::from_triplets(basis, triplets, hermitian_hint)
    }

    pub fn zeros(basis: Arc<CompositeBasis>) -> Self {
        Self::from_triplets(basis, Vec::new(), true)
    }

    pub fn identity(basis: Arc<CompositeBasis>) -> Self {
        Self::diagonal(basis.clone(), &vec![1.0; basis.total_dim()])
    }

    pub fn diagonal(basis: Arc<CompositeBasis>, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), basis.total_dim(), "diagonal length mismatch");
        Self::from_real_triplets(
            basis,
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
            true,
        )
    }

    /// Build from a dense matrix, keeping entries with nonzero modulus.
    pub fn from_dense(basis: Arc<CompositeBasis>, m: &DMatrix<C64>, hermitian_hint: bool) -> Self {
        assert_eq!(m.nrows(), basis.total_dim());
        assert_eq!(m.ncols(), basis.total_dim());
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.norm() != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(basis, triplets, hermitian_hint)
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.csr.vals.len()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn with_hermitian_hint(mut self, hint: bool) -> Self {
        self.hermitian_hint = hint;
        self
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.csr.get(row, col)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.csr.triplets()
    }

    pub fn adjoint(&self) -> Operator {
        let triplets = self.csr.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Operator::from_triplets(self.basis.clone(), triplets, self.hermitian_hint)
    }

    /// Largest element-wise deviation |M - M^dagger|.
    pub fn hermiticity_error(&self) -> f64 {
        self.csr
            .triplets()
            .map(|(r, c, v)| (v - self.csr.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Hermiticity check against the hint's tolerance of 1e-12.
    pub fn check_hermitian(&self) -> Result<()> {
        let err = self.hermiticity_error();
        if err < 1e-12 {
            Ok(())
        } else {
            Err(Error::NotHermitian(err))
        }
    }

    /// True when every stored entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.csr.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.csr.get(i, i)).sum()
    }

    /// Largest absolute row sum; an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.csr.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        let diff = self - other;
        diff.csr.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// y = M x
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        self.csr.matvec(x, y);
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.matvec(x, &mut y);
        y
    }

    pub fn scale(&self, s: C64) -> Operator {
        let mut out = self.clone();
        out.csr.vals.iter_mut().for_each(|v| *v *= s);
        out.csr.prune();
        out.hermitian_hint = self.hermitian_hint && s.im == 0.0;
        out
    }

    pub fn to_dense(&self, threshold: usize) -> Result<DMatrix<C64>> {
        if self.dim() > threshold {
            return Err(Error::TooLargeForDense {
                dim: self.dim(),
                threshold,
            });
        }
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.csr.triplets() {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Kronecker product; the result acts on `self.basis x other.basis`.
    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        let basis = Arc::new(self.basis.tensor(&other.basis)?);
        let d = other.dim();
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                triplets.push((r1 * d + r2, c1 * d + c2, v1 * v2));
            }
        }
        Ok(Operator::from_triplets(
            basis,
            triplets,
            self.hermitian_hint && other.hermitian_hint,
        ))
    }

    fn assert_same_basis(&self, other: &Operator, what: &str) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis,
            "{what}: operators act on different bases ({} vs {})",
            self.basis,
            other.basis
        );
    }

    fn combine(&self, other: &Operator, sign: f64) -> Operator {
        let mut triplets: Vec<(usize, usize, C64)> = self.triplets().collect();
        triplets.extend(other.triplets().map(|(r, c, v)| (r, c, v * sign)));
        Operator::from_triplets(
            self.basis.clone(),
            triplets,
            self.hermitian_hint && other.hermitian_hint,
        )
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.assert_same_basis(rhs, "add");
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.assert_same_basis(rhs, "sub");
        self.combine(rhs, -1.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.assert_same_basis(rhs, "mul");
        Operator {
            basis: self.basis.clone(),
            csr: self.csr.matmul(&rhs.csr),
            // products of hermitian operators are hermitian only if they commute
            hermitian_hint: false,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self * -1.0
    }
}

/// Annihilation operator a with <n-1|a|n> = sqrt(n).
pub fn fock_annihilation(mode: &FockMode) -> Operator {
    let basis = CompositeBasis::single(mode.clone());
    Operator::from_real_triplets(
        basis,
        (1..mode.dim()).map(|n| (n - 1, n, (n as f64).sqrt())),
        false,
    )
}

pub fn fock_creation(mode: &FockMode) -> Operator {
    fock_annihilation(mode).adjoint()
}

pub fn fock_number(mode: &FockMode) -> Operator {
    let diag: Vec<f64> = (0..mode.dim()).map(|n| n as f64).collect();
    Operator::diagonal(CompositeBasis::single(mode.clone()), &diag)
}

/// Position-like quadrature a + a^dagger.
pub fn fock_quadrature(mode: &FockMode) -> Operator {
    let a = fock_annihilation(mode);
    (&a + &a.adjoint()).with_hermitian_hint(true)
}

/// Collective spin ladder and projection operators on one sector.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub plus: Operator,
    pub minus: Operator,
    pub z: Operator,
}

pub fn spin_operators(sector: &SpinSector) -> SpinOperators {
    let basis = CompositeBasis::single(*sector);
    let j = sector.j();
    let plus = Operator::from_real_triplets(
        basis.clone(),
        (0..sector.dim() - 1).map(|k| {
            let m = sector.m(k);
            (k + 1, k, (j * (j + 1.0) - m * (m + 1.0)).sqrt())
        }),
        false,
    );
    let minus = plus.adjoint();
    let diag: Vec<f64> = (0..sector.dim()).map(|k| sector.m(k)).collect();
    let z = Operator::diagonal(basis, &diag);
    SpinOperators { plus, minus, z }
}

/// Lift a single-factor operator into `basis` as identity x ... x op x ... x identity.
pub fn embed(op: &Operator, slot: usize, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    if slot >= basis.arity() {
        return Err(Error::SlotOutOfRange {
            slot,
            arity: basis.arity(),
        });
    }
    let own = op.basis();
    if own.arity() != 1 || !own.factors()[0].same_shape(&basis.factors()[slot]) {
        return Err(Error::DimensionMismatch(format!(
            "cannot embed an operator on {} into slot {slot} ({}) of {}",
            own,
            basis.factors()[slot],
            basis
        )));
    }
    let d = basis.dims()[slot];
    let right = basis.stride(slot);
    let left = basis.total_dim() / (d * right);
    let mut triplets = Vec::with_capacity(op.nnz() * left * right);
    for l in 0..left {
        for (r, c, v) in op.triplets() {
            for k in 0..right {
                triplets.push(((l * d + r) * right + k, (l * d + c) * right + k, v));
            }
        }
    }
    Ok(Operator::from_triplets(basis.clone(), triplets, op.hermitian_hint()))
}
