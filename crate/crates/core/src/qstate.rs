//! Density-operator algebra: validation, tensor products, partial traces,
//! spectral matrix functions and entropies.
//!
//! Entropies are in bits. Eigenvalues at or below [`EIG_CLIP`] are treated
//! as exact zeros (`0 log 0 = 0`, `sqrt(0) = 0`).

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::partitions::Partition;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Tolerance for the Hermiticity, trace and positivity checks.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are treated as zero by spectral functions.
pub const EIG_CLIP: f64 = 1e-12;
/// Tolerance on `| ||psi||^2 - 1 |` for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on probability vectors (sum and negativity).
pub const PROB_TOL: f64 = 1e-12;

/// Eigenvalue of a state above which it counts as "in the support" when
/// checking `supp(rho) ⊆ supp(sigma)`.
const SUPPORT_EIG: f64 = 1e-10;
/// Component of a support vector along `ker(sigma)` that triggers +inf.
const SUPPORT_LEAK: f64 = 1e-8;

/// A validated density operator with an explicit subsystem dimension list.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    elements: CMatrix,
    label: Option<String>,
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
    label: Option<String>,
}

/// Nonnegative reals summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

/// `log2` of a PSD matrix restricted to its support.
#[derive(Debug, Clone)]
pub struct MatrixLog {
    /// Spectral `log2` on eigenvalues above [`EIG_CLIP`], zero elsewhere.
    pub log: CMatrix,
    /// Orthonormal eigenvectors spanning the (numerical) kernel.
    pub null_space: Vec<CVector>,
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::TooFewParties(0));
    }
    if let Some(&bad) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::BadSubsystemDim(bad));
    }
    Ok(dims.iter().product())
}

/// Hermitian eigendecomposition; eigenvalues ascending.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// `V diag(f(lambda)) V^dag` for a Hermitian matrix.
pub(crate) fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    reassemble(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>(), &vecs)
}

pub(crate) fn reassemble(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for c in 0..n {
            let w = col[c].conj() * v;
            for r in 0..n {
                out[(r, c)] += col[r] * w;
            }
        }
    }
    out
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5)
}

/// For each flat index of the reordered space, the flat index in the
/// original space. New subsystem `i` is old subsystem `order[i]`.
pub(crate) fn permutation_index_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        map.push(digits.iter().zip(order).map(|(&d, &o)| d * strides[o]).sum());
        for i in (0..n).rev() {
            digits[i] += 1;
            if digits[i] < new_dims[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    map
}

/// Reorders the tensor factors of an operator on `dims`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let map = permutation_index_map(dims, order);
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(map[r], map[c])])
}

pub(crate) fn permute_vector(v: &CVector, dims: &[usize], order: &[usize]) -> CVector {
    let map = permutation_index_map(dims, order);
    CVector::from_fn(v.len(), |r, _| v[map[r]])
}

/// Sorted, deduplicated `keep` plus its complement, with range checks.
fn split_subsystems(n: usize, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange { index: bad, parties: n });
    }
    if kept.is_empty() {
        return Err(Error::EmptyKeep);
    }
    if kept.len() == n {
        return Err(Error::FullKeep);
    }
    let rest = (0..n).filter(|i| !kept.contains(i)).collect();
    Ok((kept, rest))
}

/// Traces out the trailing `d_rest`-dimensional factor.
pub(crate) fn trace_trailing(m: &CMatrix, d_keep: usize, d_rest: usize) -> CMatrix {
    CMatrix::from_fn(d_keep, d_keep, |a, b| {
        (0..d_rest).map(|r| m[(a * d_rest + r, b * d_rest + r)]).sum()
    })
}

/// Traces out the leading `d_lead`-dimensional factor.
pub(crate) fn trace_leading(m: &CMatrix, d_lead: usize, d_keep: usize) -> CMatrix {
    CMatrix::from_fn(d_keep, d_keep, |a, b| {
        (0..d_lead).map(|r| m[(r * d_keep + a, r * d_keep + b)]).sum()
    })
}

impl DensityMatrix {
    /// Checks the density-operator invariants and builds the state.
    pub fn validate(m: CMatrix, dims: &[usize]) -> Result<Self> {
        Self::validate_with_clip(m, dims).map(|(rho, _)| rho)
    }

    /// Like [`validate`](Self::validate), also reporting whether small
    /// negative eigenvalues had to be clipped (and the state renormalized).
    pub fn validate_with_clip(m: CMatrix, dims: &[usize]) -> Result<(Self, bool)> {
        let d = check_dims(dims)?;
        if m.nrows() != d || m.ncols() != d {
            let found = if m.nrows() != d { m.nrows() } else { m.ncols() };
            return Err(Error::DimensionMismatch { expected: d, found });
        }
        let deviation = hermitian_deviation(&m);
        if deviation > VALIDATION_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let herm = hermitian_part(&m);
        let trace: f64 = (0..d).map(|i| herm[(i, i)].re).sum();
        if (trace - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::TraceMismatch {
                trace,
                deviation: (trace - 1.0).abs(),
            });
        }
        let (vals, vecs) = eigh(&herm);
        let min = vals[0];
        if min < -VALIDATION_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        // Negatives above -EIG_CLIP are eigensolver noise; leave the matrix alone.
        if min < -EIG_CLIP {
            let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let scaled: Vec<f64> = clipped.iter().map(|v| v / total).collect();
            let rho = Self::from_trusted(hermitian_part(&reassemble(&scaled, &vecs)), dims.to_vec());
            return Ok((rho, true));
        }
        Ok((Self::from_trusted(herm, dims.to_vec()), false))
    }

    pub(crate) fn from_trusted(elements: CMatrix, dims: Vec<usize>) -> Self {
        Self {
            dims,
            elements,
            label: None,
        }
    }

    /// `I/D` on the given dimensions.
    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let d = check_dims(dims)?;
        Ok(Self::from_trusted(
            CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
            dims.to_vec(),
        ))
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64], dims: &[usize]) -> Result<Self> {
        let d = check_dims(dims)?;
        if probs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: probs.len(),
            });
        }
        let p = ProbabilityVector::new(probs.to_vec())?;
        let m = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                C64::new(p.entries[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self::from_trusted(m, dims.to_vec()))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.elements).0
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Kronecker product; dims concatenate.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_trusted(self.elements.kronecker(&other.elements), dims)
    }

    /// Reduced state on the 0-based subsystems in `keep`, in their original
    /// order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, rest) = split_subsystems(self.n_parties(), keep)?;
        let order: Vec<usize> = kept.iter().chain(&rest).copied().collect();
        let permuted = permute_subsystems(&self.elements, &self.dims, &order);
        let d_keep: usize = kept.iter().map(|&i| self.dims[i]).product();
        let d_rest = self.dim() / d_keep;
        let dims = kept.iter().map(|&i| self.dims[i]).collect();
        Ok(Self::from_trusted(trace_trailing(&permuted, d_keep, d_rest), dims))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> CMatrix {
        spectral_map(&self.elements, clipped_sqrt)
    }

    /// Frobenius distance to another operator of the same size.
    pub fn frobenius_distance(&self, other: &CMatrix) -> f64 {
        (&self.elements - other).norm()
    }
}

fn clipped_sqrt(v: f64) -> f64 {
    if v > EIG_CLIP {
        v.sqrt()
    } else {
        0.0
    }
}

impl PureState {
    pub fn new(dims: &[usize], amplitudes: CVector) -> Result<Self> {
        let d = check_dims(dims)?;
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: amplitudes.len(),
            });
        }
        let deviation = (amplitudes.norm_squared() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes,
            label: None,
        })
    }

    pub(crate) fn from_trusted(dims: &[usize], amplitudes: CVector) -> Self {
        Self {
            dims: dims.to_vec(),
            amplitudes,
            label: None,
        }
    }

    /// Normalizes `amplitudes` first; fails on the zero vector.
    pub fn normalized(dims: &[usize], amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        Self::new(dims, amplitudes.unscale(norm))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    /// `|psi><psi|`, carrying the label over.
    pub fn projector(&self) -> DensityMatrix {
        let a = &self.amplitudes;
        let mut rho = DensityMatrix::from_trusted(a * a.adjoint(), self.dims.clone());
        rho.label = self.label.clone();
        rho
    }

    /// Reduced state on `keep`, via the `M M^dag` reshaping.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, rest) = split_subsystems(self.n_parties(), keep)?;
        let (m, _) = self.reshape(&kept, &rest);
        let dims = kept.iter().map(|&i| self.dims[i]).collect();
        Ok(DensityMatrix::from_trusted(&m * m.adjoint(), dims))
    }

    /// `1 − Tr(rho_keep^2)`, evaluated exactly zero on product vectors.
    pub(crate) fn marginal_linear_entropy(&self, kept: &[usize], rest: &[usize]) -> f64 {
        let (m, _) = self.reshape(kept, rest);
        linear_entropy_of_coefficients(&m)
    }

    fn reshape(&self, kept: &[usize], rest: &[usize]) -> (CMatrix, usize) {
        let order: Vec<usize> = kept.iter().chain(rest).copied().collect();
        let v = permute_vector(&self.amplitudes, &self.dims, &order);
        let d_keep: usize = kept.iter().map(|&i| self.dims[i]).product();
        let d_rest = v.len() / d_keep;
        (CMatrix::from_fn(d_keep, d_rest, |r, c| v[r * d_rest + c]), d_keep)
    }
}

/// `‖M‖_F⁴ − ‖M M†‖_F² = 2 Σ_{i<j, k<l} |M_ik M_jl − M_il M_jk|²`
/// (Lagrange identity), which is `1 − Tr ρ²` for a unit vector with
/// coefficient matrix `M`. Summing squared 2×2 minors avoids the
/// cancellation in `1 − Tr ρ²`.
pub(crate) fn linear_entropy_of_coefficients(m: &CMatrix) -> f64 {
    let (r, c) = (m.nrows(), m.ncols());
    let mut acc = 0.0;
    for i in 0..r {
        for j in i + 1..r {
            for k in 0..c {
                let (a, b) = (m[(i, k)], m[(j, k)]);
                for l in k + 1..c {
                    acc += (a * m[(j, l)] - m[(i, l)] * b).norm_sqr();
                }
            }
        }
    }
    2.0 * acc
}

impl ProbabilityVector {
    /// Accepts entries down to `-PROB_TOL` (clamped to zero).
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability("empty".into()));
        }
        if let Some(bad) = entries.iter().find(|p| !p.is_finite() || **p < -PROB_TOL) {
            return Err(Error::InvalidProbability(format!("entry {bad} is negative")));
        }
        let entries: Vec<f64> = entries.into_iter().map(|p| p.max(0.0)).collect();
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbability(format!("entries sum to {sum}")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// PSD principal square root of a Hermitian matrix.
pub fn matrix_sqrt(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > VALIDATION_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let (vals, vecs) = eigh(&hermitian_part(m));
    if vals[0] < -VALIDATION_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: vals[0],
        });
    }
    let roots: Vec<f64> = vals.iter().map(|&v| clipped_sqrt(v)).collect();
    Ok(reassemble(&roots, &vecs))
}

/// Spectral `log2` on the support of a PSD matrix.
pub fn matrix_log2(m: &CMatrix) -> MatrixLog {
    let (vals, vecs) = eigh(m);
    let mut logs = Vec::with_capacity(vals.len());
    let mut null_space = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v > EIG_CLIP {
            logs.push(v.log2());
        } else {
            logs.push(0.0);
            null_space.push(vecs.column(k).into_owned());
        }
    }
    MatrixLog {
        log: reassemble(&logs, &vecs),
        null_space,
    }
}

/// `-sum lambda log2 lambda` over eigenvalues above [`EIG_CLIP`].
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&v| v > EIG_CLIP)
        .map(|&v| -v * v.log2())
        .sum();
    s.max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    shannon_bits(&p.entries).max(0.0)
}

/// Shannon entropy of raw weights; zero and negative entries contribute 0.
pub(crate) fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `S(rho || sigma) = Tr(rho log2 rho) - Tr(rho log2 sigma)`, or
/// `f64::INFINITY` when the support of `rho` is not contained in that of
/// `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let (rvals, rvecs) = eigh(&rho.elements);
    let slog = matrix_log2(&sigma.elements);
    for (k, &v) in rvals.iter().enumerate() {
        if v <= SUPPORT_EIG {
            continue;
        }
        let r = rvecs.column(k);
        let leak: f64 = slog
            .null_space
            .iter()
            .map(|n| n.dotc(&r).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if leak > SUPPORT_LEAK {
            return Ok(f64::INFINITY);
        }
    }
    let rho_log_rho = -spectrum_entropy(&rvals);
    let rho_log_sigma = trace_product(&rho.elements, &slog.log).re;
    Ok((rho_log_rho - rho_log_sigma).max(0.0))
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `S(rho_gamma) + S(rho_gamma') - S(rho)` for the cut.
pub fn mutual_information(rho: &DensityMatrix, cut: &Partition) -> Result<f64> {
    cut.check_dims(rho.dims())?;
    let s_gamma = von_neumann_entropy(&rho.partial_trace(cut.gamma())?);
    let s_prime = von_neumann_entropy(&rho.partial_trace(cut.gamma_prime())?);
    Ok(s_gamma + s_prime - von_neumann_entropy(rho))
}

/// ChaCha8 generator for `(seed, stream)`; distinct streams are independent.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    random_pure_with(dims, &mut seeded_rng(seed, 0))
}

pub fn random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let d = check_dims(dims)?;
    let v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    PureState::normalized(dims, v)
}

/// `G G^dag / Tr(G G^dag)` for a `D x rank` complex Gaussian `G`.
pub fn random_mixed(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed_with(dims, rank, &mut seeded_rng(seed, 0))
}

pub fn random_mixed_with<R: Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d = check_dims(dims)?;
    if rank == 0 || rank > d {
        return Err(Error::BadRank { rank, dim: d });
    }
    let g = CMatrix::from_fn(d, rank, |_, _| complex_gaussian(rng));
    let w = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| w[(i, i)].re).sum();
    DensityMatrix::validate(w.unscale(tr), dims)
}
