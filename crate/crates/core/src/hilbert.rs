//! Excitation-truncated Jaynes-Cummings space, operators on it, and the
//! superoperator algebra on column-stacked density matrices.
//!
//! Basis ordering: |−,0⟩ first, then for each excitation number m = 1..n_max
//! the pair |−,m⟩, |+,m−1⟩. Here − / + is the exciton ground / excited state
//! and the integer is the photon number.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// One basis state: exciton excited or not, photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub excited: bool,
    pub photons: usize,
}

impl BasisState {
    pub fn excitations(&self) -> usize {
        self.photons + usize::from(self.excited)
    }
}

/// States with photons + exciton occupancy ≤ n_max.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSpace {
    n_max: usize,
    basis: Vec<BasisState>,
}

impl TruncatedSpace {
    pub fn new(n_max: usize) -> Result<Arc<Self>> {
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                key: "n_max",
                reason: "must be >= 1".into(),
            });
        }
        let mut basis = vec![BasisState {
            excited: false,
            photons: 0,
        }];
        for m in 1..=n_max {
            basis.push(BasisState {
                excited: false,
                photons: m,
            });
            basis.push(BasisState {
                excited: true,
                photons: m - 1,
            });
        }
        Ok(Arc::new(Self { n_max, basis }))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        self.basis.iter().position(|&s| s == state)
    }
}

/// Dense complex operator tied to a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: Arc<TruncatedSpace>,
    mat: CMatrix,
}

impl OperatorMatrix {
    pub fn new(space: &Arc<TruncatedSpace>, mat: CMatrix) -> Result<Self> {
        let d = space.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if mat.nrows() != d { mat.nrows() } else { mat.ncols() },
            });
        }
        Ok(Self {
            space: space.clone(),
            mat,
        })
    }

    pub fn zeros(space: &Arc<TruncatedSpace>) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            mat: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: &Arc<TruncatedSpace>) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            mat: CMatrix::identity(d, d),
        }
    }

    /// |i⟩⟨i| for basis index `i`.
    pub fn projector(space: &Arc<TruncatedSpace>, i: usize) -> Self {
        let mut op = Self::zeros(space);
        op.mat[(i, i)] = ONE;
        op
    }

    pub fn space(&self) -> &Arc<TruncatedSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.space.n_max != other.space.n_max {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            mat: &self.mat * c,
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// max |A − A†|.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Bare ladder and two-level operators on a space.
#[derive(Debug, Clone)]
pub struct Operators {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub sig_minus: OperatorMatrix,
    pub sig_plus: OperatorMatrix,
    pub sig_11: OperatorMatrix,
    pub n_photon: OperatorMatrix,
}

/// Builds a, a†, σ⁻, σ⁺, σ₁₁ = σ⁺σ⁻ and the photon number a†a, dropping matrix elements that
/// would leave the truncated space.
pub fn build_operators(space: &Arc<TruncatedSpace>) -> Operators {
    let d = space.dim();
    let mut a = CMatrix::zeros(d, d);
    let mut sm = CMatrix::zeros(d, d);
    for (j, s) in space.basis().iter().enumerate() {
        if s.photons > 0 {
            let target = BasisState {
                excited: s.excited,
                photons: s.photons - 1,
            };
            if let Some(i) = space.index_of(target) {
                a[(i, j)] = Complex64::new((s.photons as f64).sqrt(), 0.0);
            }
        }
        if s.excited {
            let target = BasisState {
                excited: false,
                photons: s.photons,
            };
            if let Some(i) = space.index_of(target) {
                sm[(i, j)] = ONE;
            }
        }
    }
    let a_dag = a.adjoint();
    let sp = sm.adjoint();
    let sig_11 = &sp * &sm;
    let n_photon = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        space.basis().iter().map(|s| Complex64::new(s.photons as f64, 0.0)),
    ));
    let wrap = |m: CMatrix| OperatorMatrix {
        space: space.clone(),
        mat: m,
    };
    Operators {
        a: wrap(a),
        a_dag: wrap(a_dag),
        sig_minus: wrap(sm),
        sig_plus: wrap(sp),
        sig_11: wrap(sig_11),
        n_photon: wrap(n_photon),
    }
}

/// Column-stacked vec(ρ).
pub fn vectorize(rho: &OperatorMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(rho.mat.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(
    space: &Arc<TruncatedSpace>,
    v: &nalgebra::DVector<Complex64>,
) -> Result<OperatorMatrix> {
    let d = space.dim();
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.len(),
        });
    }
    Ok(OperatorMatrix {
        space: space.clone(),
        mat: CMatrix::from_column_slice(d, d, v.as_slice()),
    })
}

/// Linear map on column-stacked density matrices:
/// vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    space: Arc<TruncatedSpace>,
    mat: CMatrix,
}

impl Superoperator {
    pub fn zeros(space: &Arc<TruncatedSpace>) -> Self {
        let n = space.dim() * space.dim();
        Self {
            space: space.clone(),
            mat: CMatrix::zeros(n, n),
        }
    }

    pub fn from_matrix(space: &Arc<TruncatedSpace>, mat: CMatrix) -> Result<Self> {
        let n = space.dim() * space.dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mat.nrows(),
            });
        }
        Ok(Self {
            space: space.clone(),
            mat,
        })
    }

    pub fn space(&self) -> &Arc<TruncatedSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.space.n_max != other.space.n_max {
            return Err(Error::DimensionMismatch {
                expected: self.mat.nrows(),
                found: other.mat.nrows(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check(other)?;
        self.mat += &other.mat;
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            space: self.space.clone(),
            mat: &self.mat * Complex64::new(c, 0.0),
        }
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            space: self.space.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.space.n_max != self.space.n_max {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: rho.dim(),
            });
        }
        devectorize(&self.space, &(&self.mat * vectorize(rho)))
    }

    /// max over columns of |Σ_i L_(ii),col|, i.e. ‖vec(I)†·L‖_max.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        let mut worst: f64 = 0.0;
        for col in 0..self.mat.ncols() {
            let mut s = ZERO;
            for i in 0..d {
                s += self.mat[(i * d + i, col)];
            }
            worst = worst.max(s.norm());
        }
        worst
    }

    /// The map ρ ↦ (L(ρ†))†, which equals L when L preserves Hermiticity.
    pub fn hermitian_conjugate_map(&self) -> Self {
        let d = self.space.dim();
        let n = d * d;
        // Index of vec position (i, j) is j*d + i; ρ† swaps (i, j) and conjugates.
        let swap = |k: usize| (k % d) * d + k / d;
        let mut m = CMatrix::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                m[(swap(r), swap(c))] = self.mat[(r, c)].conj();
            }
        }
        Self {
            space: self.space.clone(),
            mat: m,
        }
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// ρ ↦ Aρ.
pub fn spre(a: &OperatorMatrix) -> Superoperator {
    let id = CMatrix::identity(a.dim(), a.dim());
    Superoperator {
        space: a.space.clone(),
        mat: kron(&id, &a.mat),
    }
}

/// ρ ↦ ρB.
pub fn spost(b: &OperatorMatrix) -> Superoperator {
    let id = CMatrix::identity(b.dim(), b.dim());
    Superoperator {
        space: b.space.clone(),
        mat: kron(&b.mat.transpose(), &id),
    }
}

/// ρ ↦ AρB.
pub fn sprepost(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Superoperator> {
    a.check(b)?;
    Ok(Superoperator {
        space: a.space.clone(),
        mat: kron(&b.mat.transpose(), &a.mat),
    })
}

/// ρ ↦ −i[H, ρ].
pub fn hamiltonian_generator(h: &OperatorMatrix) -> Superoperator {
    let mut m = spre(h).mat - spost(h).mat;
    m *= Complex64::new(0.0, -1.0);
    Superoperator {
        space: h.space.clone(),
        mat: m,
    }
}

/// D[C]ρ = 2CρC† − C†Cρ − ρC†C.
pub fn dissipator(c: &OperatorMatrix) -> Superoperator {
    let cd = c.adjoint();
    let cdc = OperatorMatrix {
        space: c.space.clone(),
        mat: &cd.mat * &c.mat,
    };
    let two = Complex64::new(2.0, 0.0);
    let mat = kron(&cd.mat.transpose(), &c.mat) * two - spre(&cdc).mat - spost(&cdc).mat;
    Superoperator {
        space: c.space.clone(),
        mat,
    }
}
