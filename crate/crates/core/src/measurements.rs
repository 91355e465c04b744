//! Projective measurements and the dephasing maps they induce.

use rand::Rng;

use crate::partitions::{permute_to_cut, restore_from_cut, Partition};
use crate::qstate::{
    complex_gaussian, eigh, seeded_rng, trace_leading, trace_trailing,
    DensityMatrix, ProbabilityVector,
};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Orthonormality tolerance for [`ProjectiveBasis`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Outcomes at or below this probability are dropped from ensembles.
pub const OUTCOME_FLOOR: f64 = 1e-14;

/// A complete set of rank-1 orthogonal projectors `|b_k><b_k|`, stored as
/// the unitary whose columns are the `b_k`.
///
/// Each vector is phase-fixed so that its first nonzero component is real
/// and positive; the projectors do not depend on that choice.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    frame: CMatrix,
}

/// Which block of a cut is acted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Gamma,
    GammaPrime,
}

/// `Π_j = Π_γ^k ⊗ Π_γ′^k′` for a cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMeasurement {
    cut: Partition,
    basis_gamma: ProjectiveBasis,
    basis_gamma_prime: ProjectiveBasis,
}

/// Outcome probabilities and normalized post-measurement states of the
/// unmeasured block.
#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    pub probabilities: ProbabilityVector,
    pub states: Vec<DensityMatrix>,
    /// Basis index of each retained outcome.
    pub outcomes: Vec<usize>,
}

fn gauge_fix(mut frame: CMatrix) -> CMatrix {
    for mut col in frame.column_iter_mut() {
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
    }
    frame
}

fn orthonormality_defect(frame: &CMatrix) -> f64 {
    let gram = frame.adjoint() * frame;
    let mut defect: f64 = 0.0;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            defect = defect.max((gram[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    defect
}

/// Modified Gram-Schmidt (two passes) on the columns.
fn orthonormalize(mut m: CMatrix) -> CMatrix {
    let n = m.ncols();
    for _pass in 0..2 {
        for j in 0..n {
            for i in 0..j {
                let qi = m.column(i).into_owned();
                let proj = qi.dotc(&m.column(j));
                let mut cj = m.column_mut(j);
                cj -= qi * proj;
            }
            let norm = m.column(j).norm();
            m.column_mut(j).unscale_mut(norm);
        }
    }
    m
}

impl ProjectiveBasis {
    /// Columns of `frame` are the basis vectors.
    pub fn new(frame: CMatrix) -> Result<Self> {
        if !frame.is_square() || frame.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: frame.nrows(),
                found: frame.ncols(),
            });
        }
        let defect = orthonormality_defect(&frame);
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self {
            frame: gauge_fix(frame),
        })
    }

    pub fn from_vectors(vectors: &[CVector]) -> Result<Self> {
        let d = vectors.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        Self::new(CMatrix::from_fn(d, d, |r, c| vectors[c][r]))
    }

    pub(crate) fn from_unitary_unchecked(frame: CMatrix) -> Self {
        Self {
            frame: gauge_fix(frame),
        }
    }

    pub fn computational(d: usize) -> Self {
        Self {
            frame: CMatrix::identity(d, d),
        }
    }

    /// `b_k = d^{-1/2} sum_j exp(2 pi i jk/d) |j>`.
    pub fn fourier(d: usize) -> Self {
        let norm = 1.0 / (d as f64).sqrt();
        let frame = CMatrix::from_fn(d, d, |j, k| {
            let angle = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
            C64::from_polar(norm, angle)
        });
        Self::from_unitary_unchecked(frame)
    }

    /// `Φ+, Φ-, Ψ+, Ψ-` on two qubits.
    pub fn bell() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rows = [[s, s, 0.0, 0.0], [0.0, 0.0, s, s], [0.0, 0.0, s, -s], [s, -s, 0.0, 0.0]];
        Self::from_unitary_unchecked(CMatrix::from_fn(4, 4, |r, c| C64::new(rows[r][c], 0.0)))
    }

    /// Eigenbasis of a Hermitian operator (ascending eigenvalues).
    pub fn eigenbasis(m: &CMatrix) -> Self {
        Self::from_unitary_unchecked(eigh(m).1)
    }

    /// Orthonormalized complex Gaussian matrix from a seeded generator.
    pub fn random(d: usize, seed: u64) -> Self {
        Self::random_with(d, &mut seeded_rng(seed, 0))
    }

    pub fn random_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
        Self::from_unitary_unchecked(orthonormalize(g))
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.frame.column(k).into_owned()
    }

    pub fn projector(&self, k: usize) -> CMatrix {
        let v = self.frame.column(k);
        v * v.adjoint()
    }

    /// Product basis `b_k ⊗ c_l`, ordered with `k` major.
    pub fn kron(&self, other: &ProjectiveBasis) -> ProjectiveBasis {
        Self {
            frame: self.frame.kronecker(&other.frame),
        }
    }

    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.frame)
    }
}

/// Computational and Fourier bases, plus the Bell basis when `d == 4`.
pub fn canonical_bases(d: usize) -> Vec<ProjectiveBasis> {
    let mut out = vec![ProjectiveBasis::computational(d), ProjectiveBasis::fourier(d)];
    if d == 4 {
        out.push(ProjectiveBasis::bell());
    }
    out
}

pub fn random_basis(d: usize, seed: u64) -> ProjectiveBasis {
    ProjectiveBasis::random(d, seed)
}

impl CutMeasurement {
    pub fn new(
        cut: Partition,
        basis_gamma: ProjectiveBasis,
        basis_gamma_prime: ProjectiveBasis,
    ) -> Result<Self> {
        if basis_gamma.dim() != cut.d_gamma() {
            return Err(Error::DimensionMismatch {
                expected: cut.d_gamma(),
                found: basis_gamma.dim(),
            });
        }
        if basis_gamma_prime.dim() != cut.d_gamma_prime() {
            return Err(Error::DimensionMismatch {
                expected: cut.d_gamma_prime(),
                found: basis_gamma_prime.dim(),
            });
        }
        Ok(Self {
            cut,
            basis_gamma,
            basis_gamma_prime,
        })
    }

    /// Computational basis on both blocks.
    pub fn computational(cut: Partition) -> Self {
        let (a, b) = (cut.d_gamma(), cut.d_gamma_prime());
        Self {
            cut,
            basis_gamma: ProjectiveBasis::computational(a),
            basis_gamma_prime: ProjectiveBasis::computational(b),
        }
    }

    pub fn cut(&self) -> &Partition {
        &self.cut
    }

    pub fn basis_gamma(&self) -> &ProjectiveBasis {
        &self.basis_gamma
    }

    pub fn basis_gamma_prime(&self) -> &ProjectiveBasis {
        &self.basis_gamma_prime
    }

    pub fn basis(&self, side: Side) -> &ProjectiveBasis {
        match side {
            Side::Gamma => &self.basis_gamma,
            Side::GammaPrime => &self.basis_gamma_prime,
        }
    }

    /// The product basis in `(γ, γ′)` party order.
    pub fn product_basis(&self) -> ProjectiveBasis {
        self.basis_gamma.kron(&self.basis_gamma_prime)
    }

    /// The same measurement described from the swapped cut.
    pub fn swapped(&self) -> Self {
        Self {
            cut: self.cut.swapped(),
            basis_gamma: self.basis_gamma_prime.clone(),
            basis_gamma_prime: self.basis_gamma.clone(),
        }
    }
}

/// `Σ_k (P_k ⊗ I) m (P_k ⊗ I)` with the projectors acting on the leading
/// factor of dimension `frame.nrows()`.
pub(crate) fn dephase_leading(m: &CMatrix, frame: &CMatrix, d_rest: usize) -> CMatrix {
    let big = if d_rest == 1 {
        frame.clone()
    } else {
        frame.kronecker(&CMatrix::identity(d_rest, d_rest))
    };
    let mut rotated = big.adjoint() * m * &big;
    let n = rotated.nrows();
    for r in 0..n {
        for c in 0..n {
            if r / d_rest != c / d_rest {
                rotated[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    &big * rotated * big.adjoint()
}

/// Non-selective measurement of the whole system: `Σ_k Π_k ρ Π_k`.
pub fn dephase(rho: &DensityMatrix, basis: &ProjectiveBasis) -> Result<DensityMatrix> {
    if basis.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: basis.dim(),
        });
    }
    Ok(DensityMatrix::from_trusted(
        dephase_leading(rho.elements(), basis.frame(), 1),
        rho.dims().to_vec(),
    ))
}

/// Non-selective measurement of the parties in `block` (0-based,
/// ascending), identity on the rest. The basis acts on the block's factors
/// in that order.
pub fn dephase_block(
    rho: &DensityMatrix,
    block: &[usize],
    basis: &ProjectiveBasis,
) -> Result<DensityMatrix> {
    if block.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidPartition(
            "block indices must be strictly ascending".into(),
        ));
    }
    if block.len() == rho.n_parties() {
        return dephase(rho, basis);
    }
    let cut = Partition::new(block, rho.dims())?;
    if basis.dim() != cut.d_gamma() {
        return Err(Error::DimensionMismatch {
            expected: cut.d_gamma(),
            found: basis.dim(),
        });
    }
    let permuted = permute_to_cut(rho, &cut)?;
    let dephased = dephase_leading(permuted.elements(), basis.frame(), cut.d_gamma_prime());
    restore_from_cut(&DensityMatrix::from_trusted(dephased, permuted.dims().to_vec()), &cut)
}

/// `Φ^γ(ρ) = Σ_{kk′} (Π_γ^k ⊗ Π_γ′^k′) ρ (Π_γ^k ⊗ Π_γ′^k′)`, in the original
/// party order.
pub fn dephase_cut(rho: &DensityMatrix, m: &CutMeasurement) -> Result<DensityMatrix> {
    let permuted = permute_to_cut(rho, &m.cut)?;
    let frame = m.basis_gamma.frame().kronecker(m.basis_gamma_prime.frame());
    let dephased = dephase_leading(permuted.elements(), &frame, 1);
    restore_from_cut(&DensityMatrix::from_trusted(dephased, permuted.dims().to_vec()), &m.cut)
}

/// Outcome distribution of a product measurement on a state already in
/// `(γ, γ′)` order: `p_j = <u_j| ρ |u_j>` for the columns `u_j` of `frame`.
pub(crate) fn outcome_distribution(rho_cut: &CMatrix, frame: &CMatrix) -> Vec<f64> {
    let n = frame.ncols();
    let d = rho_cut.nrows();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let u = frame.column(j);
        let mut acc = 0.0;
        for a in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..d {
                row += rho_cut[(a, b)] * u[b];
            }
            acc += (u[a].conj() * row).re;
        }
        out.push(acc);
    }
    out
}

/// Measures the γ′ block and returns the conditional states of γ.
pub fn conditional_ensemble(
    rho: &DensityMatrix,
    cut: &Partition,
    basis: &ProjectiveBasis,
) -> Result<ConditionalEnsemble> {
    conditional_ensemble_on(rho, cut, Side::GammaPrime, basis)
}

/// Measures the `measured` block of the cut and returns the conditional
/// states of the other block.
pub fn conditional_ensemble_on(
    rho: &DensityMatrix,
    cut: &Partition,
    measured: Side,
    basis: &ProjectiveBasis,
) -> Result<ConditionalEnsemble> {
    let oriented = match measured {
        Side::GammaPrime => cut.clone(),
        Side::Gamma => cut.swapped(),
    };
    if basis.dim() != oriented.d_gamma_prime() {
        return Err(Error::DimensionMismatch {
            expected: oriented.d_gamma_prime(),
            found: basis.dim(),
        });
    }
    let permuted = permute_to_cut(rho, &oriented)?;
    let (raw, kept) = conditional_blocks(permuted.elements(), oriented.d_gamma(), basis.frame());
    let dims = oriented.dims_gamma().to_vec();
    let mut probs = Vec::new();
    let mut states = Vec::new();
    let mut outcomes = Vec::new();
    for (k, (p, block)) in raw.into_iter().zip(kept).enumerate() {
        if p <= OUTCOME_FLOOR {
            continue;
        }
        probs.push(p);
        states.push(DensityMatrix::validate(block.unscale(p), &dims)?);
        outcomes.push(k);
    }
    let total: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|p| p / total).collect();
    Ok(ConditionalEnsemble {
        probabilities: ProbabilityVector::new(probs)?,
        states,
        outcomes,
    })
}

/// For a matrix in `(kept, measured)` order, the unnormalized conditional
/// blocks `(I ⊗ <b_k|) ρ (I ⊗ |b_k>)` and their traces.
pub(crate) fn conditional_blocks(
    m: &CMatrix,
    d_kept: usize,
    frame: &CMatrix,
) -> (Vec<f64>, Vec<CMatrix>) {
    let d_meas = frame.nrows();
    let mut probs = Vec::with_capacity(d_meas);
    let mut blocks = Vec::with_capacity(d_meas);
    for k in 0..d_meas {
        let b = frame.column(k);
        let block = CMatrix::from_fn(d_kept, d_kept, |a, a2| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d_meas {
                let br = b[r].conj();
                if br == C64::new(0.0, 0.0) {
                    continue;
                }
                for s in 0..d_meas {
                    acc += br * m[(a * d_meas + r, a2 * d_meas + s)] * b[s];
                }
            }
            acc
        });
        probs.push((0..d_kept).map(|i| block[(i, i)].re).sum());
        blocks.push(block);
    }
    (probs, blocks)
}

/// Marginal of the leading or trailing block of a `(γ, γ′)`-ordered matrix.
pub(crate) fn block_marginal(m: &CMatrix, d_gamma: usize, d_prime: usize, side: Side) -> CMatrix {
    match side {
        Side::Gamma => trace_trailing(m, d_gamma, d_prime),
        Side::GammaPrime => trace_leading(m, d_gamma, d_prime),
    }
}
