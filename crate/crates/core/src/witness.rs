//! Distance-based witnesses, concurrences and GMC checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{stream_id, OptimizerConfig, StreamTag};
use crate::measurements::{CutMeasurement, ProjectiveBasis};
use crate::optim::{chart_dim, nelder_mead, unitary_from_params};
use crate::partitions::{enumerate_bipartitions, permute_to_cut, Partition};
use crate::qstate::{eigh, seeded_rng, spectral_map, DensityMatrix, PureState, EIG_CLIP};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Commutator norms at or below this pass the GMC necessary condition.
pub const COMMUTATOR_TOL: f64 = 1e-8;

pub const GMC_CAVEAT: &str = "a vanishing commutator [rho, rho_gamma (x) rho_gamma'] for some cut is \
necessary for genuine multipartite classicality but not sufficient; a passed check does not \
certify a classical state";

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    /// `D₂(ρ, ρ_γ⊗ρ_γ′)` in enumeration order.
    pub per_partition: Vec<(Partition, f64)>,
    pub value: f64,
    pub best_partition: Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GmcVerdict {
    NecessaryConditionPassed,
    Violated,
}

impl GmcVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            GmcVerdict::NecessaryConditionPassed => "necessary-condition-passed",
            GmcVerdict::Violated => "violated",
        }
    }
}

impl std::fmt::Display for GmcVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GmcCheckReport {
    /// `‖[ρ, ρ_γ⊗ρ_γ′]‖_F` in enumeration order.
    pub per_partition: Vec<(Partition, f64)>,
    pub min_norm: f64,
    pub best_partition: Partition,
    pub fixed_point: Option<FixedPointReport>,
    pub verdict: GmcVerdict,
    pub caveat: &'static str,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedPointReport {
    /// `‖ρ − Φ(ρ)‖_F`.
    pub distance: f64,
    /// `max_j ‖[ρ, Π_j]‖_F`.
    pub max_commutator: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Biseparability {
    pub biseparable: bool,
    /// Cut with the smallest γ-concurrence.
    pub partition: Partition,
    pub min_concurrence: f64,
}

fn same_size(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// `[Tr |ρ^{1/p} − σ^{1/p}|^p]^{1/p}`.
pub fn dp_distance(rho: &DensityMatrix, sigma: &DensityMatrix, p: f64) -> Result<f64> {
    same_size(rho.elements(), sigma.elements())?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    let root = |m: &CMatrix| spectral_map(m, |v| if v > EIG_CLIP { v.powf(1.0 / p) } else { 0.0 });
    let mut x = root(rho.elements()) - root(sigma.elements());
    x = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let (vals, _) = eigh(&x);
    let s: f64 = vals.iter().map(|v| v.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `√(2 − 2 Tr(√ρ √σ))`, evaluated as `‖√ρ − √σ‖_F` (equal for unit-trace
/// inputs, and free of the cancellation near zero).
pub fn d2_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_size(rho.elements(), sigma.elements())?;
    Ok(d2_raw(&rho.sqrt(), &sigma.sqrt()))
}

fn d2_raw(sqrt_rho: &CMatrix, sqrt_sigma: &CMatrix) -> f64 {
    (sqrt_rho - sqrt_sigma).norm()
}

/// `ρ` in cut order and `ρ_γ⊗ρ_γ′` in the same order.
fn cut_and_product(rho: &DensityMatrix, cut: &Partition) -> Result<(DensityMatrix, DensityMatrix)> {
    let permuted = permute_to_cut(rho, cut)?;
    let g = rho.partial_trace(cut.gamma())?;
    let gp = rho.partial_trace(cut.gamma_prime())?;
    Ok((permuted, g.tensor(&gp)))
}

fn argmin(values: &[(Partition, f64)]) -> usize {
    let mut best = 0;
    for (i, (_, v)) in values.iter().enumerate() {
        if *v < values[best].1 {
            best = i;
        }
    }
    best
}

/// `W(ρ) = min_γ D₂(ρ, ρ_γ⊗ρ_γ′)`.
pub fn witness_w(rho: &DensityMatrix) -> Result<WitnessReport> {
    let cuts = enumerate_bipartitions(rho.dims())?;
    let per_partition = cuts
        .into_iter()
        .map(|cut| {
            let (r, prod) = cut_and_product(rho, &cut)?;
            Ok((cut, d2_raw(&r.sqrt(), &prod.sqrt())))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = argmin(&per_partition);
    Ok(WitnessReport {
        value: per_partition[best].1,
        best_partition: per_partition[best].0.clone(),
        per_partition,
    })
}

/// `√(2 − 2 Tr ρ_A²)` for a two-party pure state.
pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    if psi.n_parties() != 2 {
        return Err(Error::NotBipartite(psi.n_parties()));
    }
    Ok((2.0 * psi.marginal_linear_entropy(&[0], &[1])).sqrt())
}

/// `C_γ = √(1 − Tr ρ_γ²)`.
pub fn gamma_concurrence(psi: &PureState, cut: &Partition) -> Result<f64> {
    cut.check_dims(psi.dims())?;
    Ok(psi.marginal_linear_entropy(cut.gamma(), cut.gamma_prime()).sqrt())
}

fn gamma_concurrences(psi: &PureState) -> Result<Vec<(Partition, f64)>> {
    enumerate_bipartitions(psi.dims())?
        .into_iter()
        .map(|cut| {
            let c = gamma_concurrence(psi, &cut)?;
            Ok((cut, c))
        })
        .collect()
}

/// `C_GME(ψ) = min_γ C_γ(ψ)`.
pub fn gme_concurrence_pure(psi: &PureState) -> Result<f64> {
    let all = gamma_concurrences(psi)?;
    Ok(all[argmin(&all)].1)
}

pub fn biseparable_pure(psi: &PureState, tol: f64) -> Result<Biseparability> {
    let all = gamma_concurrences(psi)?;
    let best = argmin(&all);
    Ok(Biseparability {
        biseparable: all[best].1 <= tol,
        partition: all[best].0.clone(),
        min_concurrence: all[best].1,
    })
}

/// `C_GME` of an unnormalized vector `v`, i.e. of `v/‖v‖`; `cuts` are the
/// partitions to scan and `norm_sq = ‖v‖²`.
fn gme_of_unnormalized(v: &CVector, dims: &[usize], cuts: &[Partition], norm_sq: f64) -> f64 {
    // The linear entropy is quartic in the amplitudes.
    let psi = PureState::from_trusted(dims, v.clone());
    let scale = norm_sq * norm_sq;
    cuts.iter()
        .map(|cut| (psi.marginal_linear_entropy(cut.gamma(), cut.gamma_prime()) / scale).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Upper bound on the convex-roof GME-concurrence.
///
/// Decompositions are `ψ_j = Σ_i V_ji √λ_i e_i` for isometries `V` (m×r,
/// `m ∈ {r, r+2}`) taken as the leading columns of `exp(A) U0`. Start 0 is
/// the eigen-ensemble itself, so the result never exceeds its value.
pub fn gme_concurrence_upper(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    cfg.validate()?;
    let cuts = enumerate_bipartitions(rho.dims())?;
    let (vals, vecs) = eigh(rho.elements());
    let ensemble: Vec<CVector> = vals
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > EIG_CLIP)
        .map(|(i, &l)| vecs.column(i).into_owned() * C64::new(l.sqrt(), 0.0))
        .collect();
    let r = ensemble.len();
    let dims = rho.dims().to_vec();

    let average = |mixing: &CMatrix| -> f64 {
        let mut total = 0.0;
        for j in 0..mixing.nrows() {
            let mut v = CVector::zeros(rho.dim());
            for (i, e) in ensemble.iter().enumerate() {
                v.axpy(mixing[(j, i)], e, C64::new(1.0, 0.0));
            }
            let p = v.norm_squared();
            if p > 1e-14 {
                total += p * gme_of_unnormalized(&v, &dims, &cuts, p);
            }
        }
        total
    };

    struct Start {
        m: usize,
        origin: CMatrix,
    }
    let mut starts = vec![Start {
        m: r,
        origin: CMatrix::identity(r, r),
    }];
    if r > 1 {
        for i in 0..cfg.n_random_starts {
            let m = if i % 2 == 0 { r } else { r + 2 };
            let mut rng = seeded_rng(cfg.seed, stream_id(StreamTag::ConvexRoof, 0, i));
            let origin = ProjectiveBasis::random_with(m, &mut rng).frame().clone();
            starts.push(Start { m, origin });
        }
    }
    let settings = cfg.simplex();
    let values: Vec<f64> = starts
        .par_iter()
        .map(|s| {
            let x0 = vec![0.0; chart_dim(s.m)];
            let out = nelder_mead(
                |x| {
                    let u = unitary_from_params(s.m, x) * &s.origin;
                    average(&u.columns(0, r).into_owned())
                },
                &x0,
                &settings,
            );
            out.value
        })
        .collect();
    Ok(values.into_iter().fold(f64::INFINITY, f64::min).max(0.0))
}

/// `‖[ρ, ρ_γ⊗ρ_γ′]‖_F` for every canonical cut.
pub fn gmc_commutator_check(rho: &DensityMatrix) -> Result<GmcCheckReport> {
    let cuts = enumerate_bipartitions(rho.dims())?;
    let per_partition = cuts
        .into_iter()
        .map(|cut| {
            let (r, prod) = cut_and_product(rho, &cut)?;
            let (a, b) = (r.elements(), prod.elements());
            Ok((cut, (a * b - b * a).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = argmin(&per_partition);
    let min_norm = per_partition[best].1;
    Ok(GmcCheckReport {
        best_partition: per_partition[best].0.clone(),
        per_partition,
        min_norm,
        fixed_point: None,
        verdict: if min_norm <= COMMUTATOR_TOL {
            GmcVerdict::NecessaryConditionPassed
        } else {
            GmcVerdict::Violated
        },
        caveat: GMC_CAVEAT,
    })
}

/// [`gmc_commutator_check`] plus the fixed-point distance for `m`.
pub fn gmc_check_with_measurement(rho: &DensityMatrix, m: &CutMeasurement) -> Result<GmcCheckReport> {
    let mut report = gmc_commutator_check(rho)?;
    report.fixed_point = Some(gmc_fixed_point(rho, m)?);
    Ok(report)
}

/// `‖ρ − Φ(ρ)‖_F` and `max_j ‖[ρ, Π_j]‖_F` for the product measurement `m`.
pub fn gmc_fixed_point(rho: &DensityMatrix, m: &CutMeasurement) -> Result<FixedPointReport> {
    let dephased = crate::measurements::dephase_cut(rho, m)?;
    let distance = rho.frobenius_distance(dephased.elements());
    // Frobenius norms are invariant under the cut permutation.
    let r = permute_to_cut(rho, m.cut())?;
    let frame = m.product_basis().frame().clone();
    let mut max_commutator: f64 = 0.0;
    for u in frame.column_iter() {
        // ‖[ρ, uu†]‖_F = √2 ‖ρu − (u†ρu) u‖ for unit u.
        let w = r.elements() * u;
        let q = u.dotc(&w);
        let residual = w - u * q;
        max_commutator = max_commutator.max(std::f64::consts::SQRT_2 * residual.norm());
    }
    Ok(FixedPointReport {
        distance,
        max_commutator,
    })
}
