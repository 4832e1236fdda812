//! Dense 2×2 / 4×4 complex linear algebra for the two-spin problem.
//!
//! The global basis order is (↓↓, ↓↑, ↑↓, ↑↑); single-spin operators act on
//! (↓, ↑) with σ_z|↑⟩ = +|↑⟩ and σ_z|↓⟩ = −|↓⟩.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default hermiticity tolerance for [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default unitarity tolerance for [`UnitaryOperator::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// 2×2 complex matrix acting on a single spin, row-major, basis (↓, ↑).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zeros() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

/// Single-spin operators.
pub mod pauli {
    use super::{Mat2, I, ONE, ZERO};

    pub fn x() -> Mat2 {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> Mat2 {
        Mat2([[ZERO, -I], [I, ZERO]])
    }

    /// σ_z = diag(−1, +1) in the (↓, ↑) order.
    pub fn z() -> Mat2 {
        Mat2([[-ONE, ZERO], [ZERO, ONE]])
    }

    /// σ⁺ = |↑⟩⟨↓|.
    pub fn raise() -> Mat2 {
        Mat2([[ZERO, ZERO], [ONE, ZERO]])
    }

    /// σ⁻ = |↓⟩⟨↑|.
    pub fn lower() -> Mat2 {
        Mat2([[ZERO, ONE], [ZERO, ZERO]])
    }

    /// |↓⟩⟨↓|
    pub fn down_projector() -> Mat2 {
        Mat2([[ONE, ZERO], [ZERO, ZERO]])
    }
}

/// 4×4 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..4 {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn diag(d: [C64; 4]) -> Self {
        let mut m = Self::zeros();
        for k in 0..4 {
            m.0[k][k] = d[k];
        }
        m
    }

    pub fn from_columns(cols: &[StateVector; 4]) -> Self {
        let mut m = Self::zeros();
        for (c, v) in cols.iter().enumerate() {
            for r in 0..4 {
                m.0[r][c] = v.0[r];
            }
        }
        m
    }

    pub fn column(&self, c: usize) -> StateVector {
        StateVector([self.0[0][c], self.0[1][c], self.0[2][c], self.0[3][c]])
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x = x.conj());
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|k| self.0[k][k]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[r][c] * v.0[c]).sum();
        }
        StateVector(out)
    }

    /// Determinant by Laplace expansion over complementary 2×2 minors.
    pub fn det(&self) -> C64 {
        let m = &self.0;
        let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        // rows (0,1) against rows (2,3)
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut det = ZERO;
        for &(a, b) in &pairs {
            let (c, d) = complement(a, b);
            let sign = if (a + b) % 2 == 1 { 1.0 } else { -1.0 };
            det += minor(0, 1, a, b) * minor(2, 3, c, d) * sign;
        }
        det
    }

    /// ‖A − B‖ in the max-entry norm.
    pub fn max_diff(&self, other: &Mat4) -> f64 {
        (*self - *other).max_abs()
    }

    /// max_{r,c} |A[r,c] − conj(A[c,r])|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.0[r][c] - self.0[c][r].conj()).norm());
            }
        }
        worst
    }

    /// ‖A†A − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat4::identity()).max_abs()
    }
}

fn complement(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&k| k != a && k != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

impl Index<(usize, usize)> for Mat4 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for r in 0..4 {
            for k in 0..4 {
                let a = self.0[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..4 {
                    out.0[r][c] += a * rhs.0[k][c];
                }
            }
        }
        out
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        for r in 0..4 {
            for c in 0..4 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        self + (-rhs)
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale_re(-1.0)
    }
}

/// Kronecker product: `result[2i+k][2j+l] = a[i][j]·b[k][l]`.
///
/// The first factor acts on spin 1 (the slow index), consistent with the
/// (↓↓, ↓↑, ↑↓, ↑↑) ordering.
pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

/// Four complex amplitudes over (↓↓, ↓↑, ↑↓, ↑↑).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector(pub [C64; 4]);

impl StateVector {
    pub fn new(amps: [C64; 4]) -> Self {
        StateVector(amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize) -> Result<Self> {
        if index >= 4 {
            return Err(Error::IndexOutOfRange { index, len: 4 });
        }
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        Ok(StateVector(amps))
    }

    /// Product state |a⟩⊗|b⟩ of two single-spin states in (↓, ↑) order.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Self {
        StateVector([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn amps(&self) -> &[C64; 4] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter {
                name: "state".into(),
                reason: format!("cannot normalize a vector of norm {n}"),
            });
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// |⟨self|other⟩|²
    pub fn overlap_sqr(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add(&self, other: &StateVector) -> Self {
        let mut out = *self;
        for k in 0..4 {
            out.0[k] += other.0[k];
        }
        out
    }

    pub fn max_diff(&self, other: &StateVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Hermitian 4×4 operator in angular-frequency units (rad·ms⁻¹).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianOperator(Mat4);

impl HermitianOperator {
    /// Checks hermiticity to [`HERMITIAN_TOL`] (scaled by the entry size).
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: Mat4, tol: f64) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > tol * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self::symmetrized(m))
    }

    /// Projects onto the Hermitian part; for constructors that are Hermitian
    /// up to rounding.
    pub(crate) fn symmetrized(m: Mat4) -> Self {
        let mut h = m;
        for r in 0..4 {
            h.0[r][r] = C64::new(m.0[r][r].re, 0.0);
            for c in (r + 1)..4 {
                let avg = (m.0[r][c] + m.0[c][r].conj()) * 0.5;
                h.0[r][c] = avg;
                h.0[c][r] = avg.conj();
            }
        }
        HermitianOperator(h)
    }

    pub fn zero() -> Self {
        HermitianOperator(Mat4::zeros())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator(self.0.scale_re(s))
    }

    /// Expectation ⟨v|H|v⟩ (real for Hermitian H).
    pub fn expectation(&self, v: &StateVector) -> f64 {
        v.inner(&self.0.apply(v)).re
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: HermitianOperator) -> HermitianOperator {
        HermitianOperator(self.0 + rhs.0)
    }
}

/// 4×4 unitary, checked on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryOperator(Mat4);

impl UnitaryOperator {
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: Mat4, tol: f64) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= tol) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(UnitaryOperator(m))
    }

    pub(crate) fn unchecked(m: Mat4) -> Self {
        UnitaryOperator(m)
    }

    pub fn identity() -> Self {
        UnitaryOperator(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn defect(&self) -> f64 {
        self.0.unitarity_defect()
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        self.0.apply(v)
    }

    pub fn adjoint(&self) -> Self {
        UnitaryOperator(self.0.adjoint())
    }

    /// `self · rhs`
    pub fn compose(&self, rhs: &UnitaryOperator) -> Self {
        UnitaryOperator(self.0 * rhs.0)
    }
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: [f64; 4],
    /// `vectors[p]` belongs to `values[p]`.
    pub vectors: [StateVector; 4],
    /// Largest imaginary part left on the diagonal before truncation to real.
    pub max_imag: f64,
}

const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Cyclic complex Jacobi diagonalization with a fixed pair order.
///
/// Each eigenvector is returned with its largest-modulus component real and
/// positive (lowest index wins ties), so output is reproducible bit-for-bit.
pub fn eigh(h: &HermitianOperator) -> Result<Eigen> {
    let m = h.matrix();
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let mut a = *m;
    let mut v = Mat4::identity();
    let scale2 = a.frobenius().powi(2);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = JACOBI_PAIRS.iter().map(|&(p, q)| a.0[p][q].norm_sqr()).sum();
        if off <= 1e-34 * scale2 || off == 0.0 {
            break;
        }
        for &(p, q) in &JACOBI_PAIRS {
            rotate(&mut a, &mut v, p, q);
        }
    }

    let max_imag = (0..4).map(|k| a.0[k][k].im.abs()).fold(0.0, f64::max);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&x, &y| a.0[x][x].re.total_cmp(&a.0[y][y].re));

    let mut values = [0.0; 4];
    let mut vectors = [StateVector([ZERO; 4]); 4];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a.0[k][k].re;
        vectors[slot] = fix_gauge(v.column(k));
    }
    Ok(Eigen { values, vectors, max_imag })
}

fn rotate(a: &mut Mat4, v: &mut Mat4, p: usize, q: usize) {
    let b = a.0[p][q];
    let babs = b.norm();
    if babs == 0.0 {
        return;
    }
    let phase = b / babs;
    let tau = (a.0[q][q].re - a.0[p][p].re) / (2.0 * babs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // R = [[c, s·e^{iθ}], [−s·e^{−iθ}, c]] on the (p, q) plane
    let rpq = phase * s;
    let rqp = -phase.conj() * s;

    for r in 0..4 {
        let (ap, aq) = (a.0[r][p], a.0[r][q]);
        a.0[r][p] = ap * c + aq * rqp;
        a.0[r][q] = ap * rpq + aq * c;
        let (vp, vq) = (v.0[r][p], v.0[r][q]);
        v.0[r][p] = vp * c + vq * rqp;
        v.0[r][q] = vp * rpq + vq * c;
    }
    for col in 0..4 {
        let (ap, aq) = (a.0[p][col], a.0[q][col]);
        a.0[p][col] = ap * c + aq * rqp.conj();
        a.0[q][col] = ap * rpq.conj() + aq * c;
    }
    a.0[p][q] = ZERO;
    a.0[q][p] = ZERO;
}

fn fix_gauge(v: StateVector) -> StateVector {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (k, x) in v.0.iter().enumerate() {
        // tolerance keeps near-equal moduli from flipping on rounding noise
        if x.norm() > best_abs * (1.0 + 1e-9) {
            best = k;
            best_abs = x.norm();
        }
    }
    let phase = v.0[best] / v.0[best].norm();
    v.scale(phase.conj())
}

/// exp(−i·h·dt) by spectral decomposition.
pub fn expm_i(h: &HermitianOperator, dt: f64) -> Result<UnitaryOperator> {
    if dt == 0.0 {
        return Ok(UnitaryOperator::identity());
    }
    let eig = eigh(h)?;
    let vecs = Mat4::from_columns(&eig.vectors);
    let mut phases = [ZERO; 4];
    for k in 0..4 {
        phases[k] = C64::from_polar(1.0, -eig.values[k] * dt);
    }
    Ok(UnitaryOperator(vecs * Mat4::diag(phases) * vecs.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tensor_identity_and_sigma_z() {
        assert_eq!(tensor(&Mat2::identity(), &Mat2::identity()), Mat4::identity());
        let z1 = tensor(&pauli::z(), &Mat2::identity());
        assert_eq!(z1, Mat4::diag([-ONE, -ONE, ONE, ONE]));
    }

    #[test]
    fn tensor_xx_is_antidiagonal() {
        let xx = tensor(&pauli::x(), &pauli::x());
        for r in 0..4 {
            for col in 0..4 {
                let expect = if r + col == 3 { ONE } else { ZERO };
                assert_eq!(xx.0[r][col], expect);
            }
        }
    }

    #[test]
    fn tensor_is_bilinear_on_small_integers() {
        let a = Mat2([[c(1.0, 2.0), c(-3.0, 0.0)], [c(0.0, 1.0), c(4.0, -1.0)]]);
        let b = Mat2([[c(2.0, 0.0), c(1.0, 1.0)], [c(-1.0, 0.0), c(0.0, 3.0)]]);
        let alpha = c(3.0, -2.0);
        assert_eq!(tensor(&a.scale(alpha), &b), tensor(&a, &b).scale(alpha));
        assert_eq!(tensor(&a, &b.scale(alpha)), tensor(&a, &b).scale(alpha));
    }

    #[test]
    fn eigh_diagonal() {
        let h = HermitianOperator::new(Mat4::diag([c(3.0, 0.0), c(1.0, 0.0), c(4.0, 0.0), c(2.0, 0.0)]))
            .unwrap();
        let e = eigh(&h).unwrap();
        assert_eq!(e.values, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.vectors[0], StateVector::basis(1).unwrap());
        assert_eq!(e.vectors[3], StateVector::basis(2).unwrap());
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = Mat4::zeros();
        m.0[0][1] = ONE;
        assert!(matches!(
            eigh(&HermitianOperator(m)),
            Err(Error::NotHermitian { .. })
        ));
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn expm_zero_step_and_diagonal() {
        let h = HermitianOperator::new(Mat4::diag([c(2.5, 0.0), ZERO, ZERO, ZERO])).unwrap();
        assert_eq!(expm_i(&h, 0.0).unwrap(), UnitaryOperator::identity());
        let u = expm_i(&h, 0.7).unwrap();
        let expect = Mat4::diag([C64::from_polar(1.0, -2.5 * 0.7), ONE, ONE, ONE]);
        assert!(u.matrix().max_diff(&expect) < 1e-15);
    }

    #[test]
    fn det_of_permutation_and_diag() {
        let d = Mat4::diag([c(2.0, 0.0), c(0.0, 1.0), c(3.0, 0.0), c(1.0, 1.0)]);
        assert!((d.det() - c(2.0, 0.0) * I * 3.0 * c(1.0, 1.0)).norm() < 1e-15);
        let mut swap = Mat4::zeros();
        swap.0[0][1] = ONE;
        swap.0[1][0] = ONE;
        swap.0[2][2] = ONE;
        swap.0[3][3] = ONE;
        assert!((swap.det() + ONE).norm() < 1e-15);
    }

    #[test]
    fn basis_out_of_range() {
        assert!(matches!(StateVector::basis(4), Err(Error::IndexOutOfRange { .. })));
    }
}
