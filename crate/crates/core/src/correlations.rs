//! Discord measures, each estimated by multi-start simplex search over
//! projective measurement bases.
//!
//! For a cut `γ|γ′` and a product measurement with outcome distribution
//! `p(k, k′)`, the γ-discord bracket
//!
//! ```text
//! S(ρ‖Φ^γ ρ) − S(ρ_γ‖Φ_γ ρ_γ) − S(ρ_γ′‖Φ_γ′ ρ_γ′)
//! ```
//!
//! is evaluated through the pinching identity `S(ρ‖Φρ) = S(Φρ) − S(ρ)`.
//! Since `Φ^γ ρ` is diagonal in the product basis, `S(Φ^γ ρ) = H(p)` and the
//! marginal terms reduce to `H(p_γ)`, `H(p_γ′)`; only the three constant
//! entropies `S(ρ)`, `S(ρ_γ)`, `S(ρ_γ′)` need an eigensolver.
//!
//! Reported minima are upper bounds on the true minima.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::measurements::{
    block_marginal, conditional_blocks, dephase, dephase_cut, outcome_distribution, CutMeasurement,
    ProjectiveBasis, Side, OUTCOME_FLOOR,
};
use crate::optim::{chart_dim, nelder_mead, unitary_from_params, SimplexOutcome, SimplexSettings};
use crate::partitions::{enumerate_bipartitions, permute_to_cut, Partition};
use crate::qstate::{
    relative_entropy, seeded_rng, shannon_bits, spectrum_entropy, von_neumann_entropy,
    DensityMatrix, EIG_CLIP,
};
use crate::{CMatrix, Error, Result};

/// Raw values down to this are clamped to zero when reported.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

/// How a block's measurement basis is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    /// Any orthonormal basis of the block's joint Hilbert space.
    #[default]
    PerCut,
    /// Tensor products of single-party bases.
    PerSite,
}

/// Which blocks the γ-discord minimization measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MeasuredBlocks {
    /// Projectors on both γ and γ′.
    #[default]
    Both,
    /// Projectors on γ only (identity on γ′).
    GammaOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub n_random_starts: usize,
    pub include_canonical_starts: bool,
    /// Iteration budget per local search.
    pub max_iterations: usize,
    pub ftol: f64,
    /// Initial simplex step in chart coordinates (radians).
    pub step: f64,
    pub seed: u64,
    pub basis_mode: BasisMode,
    pub measured_blocks: MeasuredBlocks,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_random_starts: 24,
            include_canonical_starts: true,
            max_iterations: 2000,
            ftol: 1e-8,
            step: 0.1,
            seed: 42,
            basis_mode: BasisMode::PerCut,
            measured_blocks: MeasuredBlocks::Both,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_random_starts < 1 {
            return Err(Error::InvalidConfig("n_random_starts must be >= 1".into()));
        }
        if !(self.ftol > 0.0) {
            return Err(Error::InvalidConfig("ftol must be > 0".into()));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidConfig("step must be > 0".into()));
        }
        Ok(())
    }

    pub(crate) fn simplex(&self) -> SimplexSettings {
        SimplexSettings {
            step: self.step,
            ftol: self.ftol,
            max_iterations: self.max_iterations,
        }
    }
}

/// The measurement attaining a reported value.
#[derive(Debug, Clone, PartialEq)]
pub enum Argmin {
    Cut(CutMeasurement),
    OneSided {
        cut: Partition,
        side: Side,
        basis: ProjectiveBasis,
    },
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    /// Best value over all starts (min for discords, max for classical
    /// correlation), unclamped.
    pub value: f64,
    pub argmin: Argmin,
    pub per_start_values: Vec<f64>,
    /// Whether the best start's local search met `ftol`.
    pub converged: bool,
    pub evaluations: usize,
}

impl DiscordResult {
    /// `value` with tiny negatives in `[-1e-9, 0)` clamped to 0.
    pub fn reported_value(&self) -> f64 {
        clamp_reported(self.value)
    }
}

pub(crate) fn clamp_reported(v: f64) -> f64 {
    if (-NEGATIVE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

#[derive(Debug, Clone)]
pub struct GenuineDiscord {
    pub value: f64,
    pub best_partition: Partition,
    /// In enumeration order.
    pub per_partition: Vec<(Partition, DiscordResult)>,
}

impl GenuineDiscord {
    pub fn reported_value(&self) -> f64 {
        clamp_reported(self.value)
    }
}

/// Random-stream domains, so different searches never share a stream.
#[derive(Clone, Copy)]
pub(crate) enum StreamTag {
    TwoSided = 1,
    OneSided = 2,
    ConvexRoof = 3,
}

pub(crate) fn stream_id(tag: StreamTag, key: u64, start: usize) -> u64 {
    ((tag as u64) << 56) | ((key & 0xFFFF_FFFF) << 24) | (start as u64 & 0xFF_FFFF)
}

fn cut_key(cut: &Partition) -> u64 {
    cut.gamma().iter().fold(0u64, |acc, &i| acc | 1 << i)
}

/// Basis chart for one block: a product over `sites` (a single site in
/// per-cut mode).
#[derive(Debug, Clone)]
struct BlockChart {
    sites: Vec<usize>,
}

impl BlockChart {
    fn new(block_dims: &[usize], mode: BasisMode) -> Self {
        let sites = match mode {
            BasisMode::PerCut => vec![block_dims.iter().product()],
            BasisMode::PerSite => block_dims.to_vec(),
        };
        Self { sites }
    }

    fn n_params(&self) -> usize {
        self.sites.iter().map(|&d| chart_dim(d)).sum()
    }

    fn frame(&self, origins: &[CMatrix], x: &[f64]) -> CMatrix {
        let mut offset = 0;
        let mut out: Option<CMatrix> = None;
        for (&d, origin) in self.sites.iter().zip(origins) {
            let n = chart_dim(d);
            let site = unitary_from_params(d, &x[offset..offset + n]) * origin;
            offset += n;
            out = Some(match out {
                None => site,
                Some(acc) => acc.kronecker(&site),
            });
        }
        out.expect("block has at least one site")
    }

    /// Canonical start origins for the block. `site_states` are the
    /// marginals of the sites (or of the whole block in per-cut mode).
    fn canonical_origins(&self, site_states: &[CMatrix]) -> Vec<Vec<CMatrix>> {
        let eigen: Vec<CMatrix> = site_states
            .iter()
            .map(|m| ProjectiveBasis::eigenbasis(m).frame().clone())
            .collect();
        if self.sites.len() == 1 {
            let d = self.sites[0];
            let mut out: Vec<Vec<CMatrix>> = crate::measurements::canonical_bases(d)
                .into_iter()
                .map(|b| vec![b.frame().clone()])
                .collect();
            out.push(eigen);
            out
        } else {
            let all = |f: fn(usize) -> ProjectiveBasis| {
                self.sites.iter().map(|&d| f(d).frame().clone()).collect::<Vec<_>>()
            };
            vec![
                all(ProjectiveBasis::computational),
                all(ProjectiveBasis::fourier),
                eigen,
            ]
        }
    }

    fn random_origins<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CMatrix> {
        self.sites
            .iter()
            .map(|&d| ProjectiveBasis::random_with(d, rng).frame().clone())
            .collect()
    }
}

/// Marginals of a block's sites; `parties` are original indices.
fn site_states(rho: &DensityMatrix, parties: &[usize], mode: BasisMode) -> Result<Vec<CMatrix>> {
    let marginal = |keep: &[usize]| -> Result<CMatrix> {
        if keep.len() == rho.n_parties() {
            Ok(rho.elements().clone())
        } else {
            Ok(rho.partial_trace(keep)?.elements().clone())
        }
    };
    match mode {
        BasisMode::PerCut => Ok(vec![marginal(parties)?]),
        BasisMode::PerSite => parties.iter().map(|&p| marginal(&[p])).collect(),
    }
}

/// Precomputed data for the two-sided bracket on one cut.
struct CutProblem {
    rho_cut: CMatrix,
    d_gamma: usize,
    d_prime: usize,
    s_rho: f64,
    s_gamma: f64,
    s_prime: f64,
}

impl CutProblem {
    fn new(rho: &DensityMatrix, cut: &Partition) -> Result<Self> {
        let permuted = permute_to_cut(rho, cut)?;
        let (d_gamma, d_prime) = (cut.d_gamma(), cut.d_gamma_prime());
        let m = permuted.elements().clone();
        let entropy = |x: &CMatrix| spectrum_entropy(x.symmetric_eigenvalues().as_slice());
        Ok(Self {
            s_rho: entropy(&m),
            s_gamma: entropy(&block_marginal(&m, d_gamma, d_prime, Side::Gamma)),
            s_prime: entropy(&block_marginal(&m, d_gamma, d_prime, Side::GammaPrime)),
            rho_cut: m,
            d_gamma,
            d_prime,
        })
    }

    fn quantum_mutual_information(&self) -> f64 {
        self.s_gamma + self.s_prime - self.s_rho
    }

    fn distribution(&self, frame_gamma: &CMatrix, frame_prime: &CMatrix) -> Distribution {
        let p = outcome_distribution(&self.rho_cut, &frame_gamma.kronecker(frame_prime));
        Distribution::new(p, self.d_gamma, self.d_prime)
    }

    /// `[H(p) − S(ρ)] − [H(p_γ) − S(ρ_γ)] − [H(p_γ′) − S(ρ_γ′)]`.
    fn bracket(&self, frame_gamma: &CMatrix, frame_prime: &CMatrix) -> f64 {
        let p = self.distribution(frame_gamma, frame_prime);
        (shannon_bits(&p.joint) - self.s_rho)
            - (shannon_bits(&p.gamma) - self.s_gamma)
            - (shannon_bits(&p.prime) - self.s_prime)
    }

    /// `S(ρ‖ρ_A⊗ρ_B) − S(Φ_AB ρ‖Φ_A ρ_A ⊗ Φ_B ρ_B)`, the second term as the
    /// Kullback-Leibler divergence of `p` from the product of its marginals.
    fn symmetric_bracket(&self, frame_gamma: &CMatrix, frame_prime: &CMatrix) -> f64 {
        let p = self.distribution(frame_gamma, frame_prime);
        let mut kl = 0.0;
        for k in 0..self.d_gamma {
            for l in 0..self.d_prime {
                let pj = p.joint[k * self.d_prime + l];
                if pj > 0.0 {
                    kl += pj * (pj / (p.gamma[k] * p.prime[l])).log2();
                }
            }
        }
        self.quantum_mutual_information() - kl
    }
}

struct Distribution {
    joint: Vec<f64>,
    gamma: Vec<f64>,
    prime: Vec<f64>,
}

impl Distribution {
    fn new(joint: Vec<f64>, d_gamma: usize, d_prime: usize) -> Self {
        let mut gamma = vec![0.0; d_gamma];
        let mut prime = vec![0.0; d_prime];
        for k in 0..d_gamma {
            for l in 0..d_prime {
                let v = joint[k * d_prime + l];
                gamma[k] += v;
                prime[l] += v;
            }
        }
        Self { joint, gamma, prime }
    }
}

/// One start of a two-sided search: chart origins per block.
struct TwoSidedStart {
    gamma: Vec<CMatrix>,
    prime: Vec<CMatrix>,
}

fn two_sided_starts(
    rho: &DensityMatrix,
    cut: &Partition,
    cfg: &OptimizerConfig,
    chart_gamma: &BlockChart,
    chart_prime: &BlockChart,
) -> Result<Vec<TwoSidedStart>> {
    let mut starts = Vec::new();
    if cfg.include_canonical_starts {
        let canon_g = chart_gamma.canonical_origins(&site_states(rho, cut.gamma(), cfg.basis_mode)?);
        let canon_p =
            chart_prime.canonical_origins(&site_states(rho, cut.gamma_prime(), cfg.basis_mode)?);
        for g in &canon_g {
            for p in &canon_p {
                starts.push(TwoSidedStart {
                    gamma: g.clone(),
                    prime: p.clone(),
                });
            }
        }
    }
    let key = cut_key(cut);
    for i in 0..cfg.n_random_starts {
        let mut rng = seeded_rng(cfg.seed, stream_id(StreamTag::TwoSided, key, i));
        starts.push(TwoSidedStart {
            gamma: chart_gamma.random_origins(&mut rng),
            prime: chart_prime.random_origins(&mut rng),
        });
    }
    Ok(starts)
}

/// Runs one local search per start (in parallel) and returns the outcomes
/// in start order.
fn run_starts<S: Sync>(
    starts: &[S],
    n_params: usize,
    cfg: &OptimizerConfig,
    objective: impl Fn(&S, &[f64]) -> f64 + Sync,
) -> Vec<SimplexOutcome> {
    let settings = cfg.simplex();
    let x0 = vec![0.0; n_params];
    starts
        .par_iter()
        .map(|s| nelder_mead(|x| objective(s, x), &x0, &settings))
        .collect()
}

/// Index of the smallest value; ties go to the earliest start.
fn best_index(outcomes: &[SimplexOutcome]) -> usize {
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best].value {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy)]
enum TwoSidedForm {
    Gamma,
    Symmetric,
}

fn two_sided_search(
    rho: &DensityMatrix,
    cut: &Partition,
    cfg: &OptimizerConfig,
    form: TwoSidedForm,
) -> Result<DiscordResult> {
    cfg.validate()?;
    let problem = CutProblem::new(rho, cut)?;
    let chart_gamma = BlockChart::new(cut.dims_gamma(), cfg.basis_mode);
    let chart_prime = BlockChart::new(cut.dims_gamma_prime(), cfg.basis_mode);
    let starts = two_sided_starts(rho, cut, cfg, &chart_gamma, &chart_prime)?;
    let split = chart_gamma.n_params();
    let frames = |s: &TwoSidedStart, x: &[f64]| {
        let (xg, xp) = x.split_at(split);
        (chart_gamma.frame(&s.gamma, xg), chart_prime.frame(&s.prime, xp))
    };
    let outcomes = run_starts(&starts, split + chart_prime.n_params(), cfg, |s, x| {
        let (fg, fp) = frames(s, x);
        match form {
            TwoSidedForm::Gamma => problem.bracket(&fg, &fp),
            TwoSidedForm::Symmetric => problem.symmetric_bracket(&fg, &fp),
        }
    });
    let best = best_index(&outcomes);
    let (fg, fp) = frames(&starts[best], &outcomes[best].x);
    let argmin = CutMeasurement::new(
        cut.clone(),
        ProjectiveBasis::from_unitary_unchecked(fg),
        ProjectiveBasis::from_unitary_unchecked(fp),
    )?;
    Ok(DiscordResult {
        value: outcomes[best].value,
        argmin: Argmin::Cut(argmin),
        per_start_values: outcomes.iter().map(|o| o.value).collect(),
        converged: outcomes[best].converged,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
    })
}

/// One-sided search data: the state ordered `(kept, measured)`.
struct OneSidedProblem {
    rho_ordered: CMatrix,
    d_kept: usize,
    s_rho: f64,
    s_kept: f64,
    s_measured: f64,
}

impl OneSidedProblem {
    fn new(rho: &DensityMatrix, cut: &Partition, measured: Side) -> Result<Self> {
        let oriented = match measured {
            Side::GammaPrime => cut.clone(),
            Side::Gamma => cut.swapped(),
        };
        let permuted = permute_to_cut(rho, &oriented)?;
        let (d_kept, d_meas) = (oriented.d_gamma(), oriented.d_gamma_prime());
        let m = permuted.elements().clone();
        let entropy = |x: &CMatrix| spectrum_entropy(x.symmetric_eigenvalues().as_slice());
        Ok(Self {
            s_rho: entropy(&m),
            s_kept: entropy(&block_marginal(&m, d_kept, d_meas, Side::Gamma)),
            s_measured: entropy(&block_marginal(&m, d_kept, d_meas, Side::GammaPrime)),
            rho_ordered: m,
            d_kept,
        })
    }

    /// `Σ_j p_j S(ρ_j)` for the measurement `frame` on the measured block.
    fn conditional_entropy(&self, frame: &CMatrix) -> f64 {
        let (probs, blocks) = conditional_blocks(&self.rho_ordered, self.d_kept, frame);
        probs
            .iter()
            .zip(&blocks)
            .filter(|(p, _)| **p > OUTCOME_FLOOR)
            .map(|(&p, b)| {
                // p S(B/p) = -Σ μ log μ + p log p over the eigenvalues μ of B.
                let mu = b.symmetric_eigenvalues();
                let s: f64 = mu
                    .iter()
                    .filter(|&&v| v > EIG_CLIP * p)
                    .map(|&v| -v * v.log2())
                    .sum();
                (s + p * p.log2()).max(0.0)
            })
            .sum()
    }
}

/// Minimizes `Σ_j p_j S(ρ_j)` over bases of the measured block.
fn one_sided_search(
    rho: &DensityMatrix,
    cut: &Partition,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<(OneSidedProblem, Vec<SimplexOutcome>, ProjectiveBasis)> {
    cfg.validate()?;
    let problem = OneSidedProblem::new(rho, cut, measured)?;
    let parties = match measured {
        Side::Gamma => cut.gamma(),
        Side::GammaPrime => cut.gamma_prime(),
    };
    let block_dims: Vec<usize> = parties.iter().map(|&i| rho.dims()[i]).collect();
    let chart = BlockChart::new(&block_dims, cfg.basis_mode);
    let mut starts = Vec::new();
    if cfg.include_canonical_starts {
        starts.extend(chart.canonical_origins(&site_states(rho, parties, cfg.basis_mode)?));
    }
    let key = cut_key(cut) | ((measured == Side::Gamma) as u64) << 31;
    for i in 0..cfg.n_random_starts {
        let mut rng = seeded_rng(cfg.seed, stream_id(StreamTag::OneSided, key, i));
        starts.push(chart.random_origins(&mut rng));
    }
    let outcomes = run_starts(&starts, chart.n_params(), cfg, |s, x| {
        problem.conditional_entropy(&chart.frame(s, x))
    });
    let best = best_index(&outcomes);
    let basis = ProjectiveBasis::from_unitary_unchecked(chart.frame(&starts[best], &outcomes[best].x));
    Ok((problem, outcomes, basis))
}

fn require_bipartite(rho: &DensityMatrix) -> Result<Partition> {
    if rho.n_parties() != 2 {
        return Err(Error::NotBipartite(rho.n_parties()));
    }
    Partition::new(&[0], rho.dims())
}

/// `Q = sup_Π [S(ρ_kept) − Σ_j p_j S(ρ_j)]` measuring `side` of a
/// two-party state (`Gamma` = party 1, `GammaPrime` = party 2).
pub fn classical_correlation(
    rho: &DensityMatrix,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    let cut = require_bipartite(rho)?;
    classical_correlation_across(rho, &cut, measured, cfg)
}

/// [`classical_correlation`] for an arbitrary cut treated as two blocks.
pub fn classical_correlation_across(
    rho: &DensityMatrix,
    cut: &Partition,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    let (problem, outcomes, basis) = one_sided_search(rho, cut, measured, cfg)?;
    let best = best_index(&outcomes);
    let q = |o: &SimplexOutcome| problem.s_kept - o.value;
    Ok(DiscordResult {
        value: q(&outcomes[best]),
        argmin: Argmin::OneSided {
            cut: cut.clone(),
            side: measured,
            basis,
        },
        per_start_values: outcomes.iter().map(q).collect(),
        converged: outcomes[best].converged,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
    })
}

/// `D = I(ρ) − Q(ρ)` measuring `side` of a two-party state.
pub fn original_discord(
    rho: &DensityMatrix,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    let cut = require_bipartite(rho)?;
    original_discord_across(rho, &cut, measured, cfg)
}

pub fn original_discord_across(
    rho: &DensityMatrix,
    cut: &Partition,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    let (problem, outcomes, basis) = one_sided_search(rho, cut, measured, cfg)?;
    let best = best_index(&outcomes);
    // I − Q = S(ρ_measured) − S(ρ) + Σ p_j S(ρ_j)
    let d = |o: &SimplexOutcome| problem.s_measured - problem.s_rho + o.value;
    Ok(DiscordResult {
        value: d(&outcomes[best]),
        argmin: Argmin::OneSided {
            cut: cut.clone(),
            side: measured,
            basis,
        },
        per_start_values: outcomes.iter().map(d).collect(),
        converged: outcomes[best].converged,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
    })
}

/// Two-sided discord of a two-party state, minimized over product
/// measurements.
pub fn symmetric_discord(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<DiscordResult> {
    let cut = require_bipartite(rho)?;
    two_sided_search(rho, &cut, cfg, TwoSidedForm::Symmetric)
}

/// The γ-discord bracket for a fixed measurement, via the pinching identity.
pub fn gamma_discord_objective(rho: &DensityMatrix, m: &CutMeasurement) -> Result<f64> {
    let problem = CutProblem::new(rho, m.cut())?;
    Ok(problem.bracket(m.basis_gamma().frame(), m.basis_gamma_prime().frame()))
}

/// The γ-discord bracket evaluated literally as three relative entropies.
pub fn gamma_discord_objective_direct(rho: &DensityMatrix, m: &CutMeasurement) -> Result<f64> {
    let cut = m.cut();
    let full = relative_entropy(rho, &dephase_cut(rho, m)?)?;
    let rho_g = rho.partial_trace(cut.gamma())?;
    let rho_p = rho.partial_trace(cut.gamma_prime())?;
    let g = relative_entropy(&rho_g, &dephase(&rho_g, m.basis_gamma())?)?;
    let p = relative_entropy(&rho_p, &dephase(&rho_p, m.basis_gamma_prime())?)?;
    Ok(full - g - p)
}

/// γ-discord of `cut`, minimized over the blocks selected by
/// `cfg.measured_blocks`.
pub fn gamma_discord(
    rho: &DensityMatrix,
    cut: &Partition,
    cfg: &OptimizerConfig,
) -> Result<DiscordResult> {
    match cfg.measured_blocks {
        MeasuredBlocks::Both => two_sided_search(rho, cut, cfg, TwoSidedForm::Gamma),
        // With identity on γ′ the bracket is S(ρ_γ′|…) bookkeeping of the
        // one-sided discord that measures γ.
        MeasuredBlocks::GammaOnly => original_discord_across(rho, cut, Side::Gamma, cfg),
    }
}

/// Minimum of the γ-discord over all canonical bipartitions.
pub fn genuine_discord(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<GenuineDiscord> {
    cfg.validate()?;
    let cuts = enumerate_bipartitions(rho.dims())?;
    let results: Vec<DiscordResult> = cuts
        .par_iter()
        .map(|cut| gamma_discord(rho, cut, cfg))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = i;
        }
    }
    Ok(GenuineDiscord {
        value: results[best].value,
        best_partition: cuts[best].clone(),
        per_partition: cuts.into_iter().zip(results).collect(),
    })
}

/// `S(ρ)` convenience re-export for report assembly.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    von_neumann_entropy(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{dephase_cut, random_basis};
    use crate::qstate::{mutual_information, random_mixed, PureState};
    use crate::{CVector, C64};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(&[2, 2], CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]))
            .unwrap()
            .projector()
    }

    fn ghz3() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(8);
        v[0] = c(s);
        v[7] = c(s);
        PureState::new(&[2, 2, 2], v).unwrap().projector()
    }

    fn classical_corr() -> DensityMatrix {
        DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], &[2, 2]).unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            n_random_starts: 4,
            ..OptimizerConfig::default()
        }
    }

    /// Bloch-sphere qubit basis `{|n>, |-n>}`.
    fn bloch_basis(theta: f64, phi: f64) -> ProjectiveBasis {
        let (s, co) = (theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, phi);
        let frame = CMatrix::from_row_slice(2, 2, &[c(co), -e.conj() * s, e * s, c(co)]);
        ProjectiveBasis::new(frame).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            n_random_starts: 0,
            ..OptimizerConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = OptimizerConfig {
            ftol: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn classical_correlation_examples() {
        let q = classical_correlation(&bell(), Side::GammaPrime, &quick()).unwrap();
        assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-9);
        let a = random_mixed(&[2], 2, 1).unwrap();
        let b = random_mixed(&[2], 2, 2).unwrap();
        let q = classical_correlation(&a.tensor(&b), Side::GammaPrime, &quick()).unwrap();
        assert_abs_diff_eq!(q.value, 0.0, epsilon = 1e-9);

        // Grid oracle over Bloch angles for the classically correlated state.
        let rho = classical_corr();
        let cut = Partition::new(&[0], &[2, 2]).unwrap();
        let mut grid_best: f64 = 0.0;
        for i in 0..=45 {
            for j in 0..90 {
                let basis = bloch_basis(i as f64 * std::f64::consts::PI / 90.0, j as f64 * std::f64::consts::PI / 45.0);
                let ens = crate::measurements::conditional_ensemble(&rho, &cut, &basis).unwrap();
                let cond: f64 = ens
                    .probabilities
                    .entries()
                    .iter()
                    .zip(&ens.states)
                    .map(|(p, s)| p * von_neumann_entropy(s))
                    .sum();
                grid_best = grid_best.max(1.0 - cond);
            }
        }
        assert_abs_diff_eq!(grid_best, 1.0, epsilon = 1e-12);
        let q = classical_correlation(&rho, Side::GammaPrime, &quick()).unwrap();
        assert_abs_diff_eq!(q.value, grid_best, epsilon = 1e-9);
        assert!(q.per_start_values.iter().all(|&v| v <= q.value + 1e-15));
    }

    #[test]
    fn original_discord_examples() {
        let d = original_discord(&bell(), Side::GammaPrime, &quick()).unwrap();
        assert_abs_diff_eq!(d.value, 1.0, epsilon = 1e-9);
        let d = original_discord(&classical_corr(), Side::GammaPrime, &quick()).unwrap();
        assert_abs_diff_eq!(d.reported_value(), 0.0, epsilon = 1e-9);
        let a = random_mixed(&[2], 2, 3).unwrap();
        let b = random_mixed(&[3], 3, 4).unwrap();
        let d = original_discord(&a.tensor(&b), Side::Gamma, &quick()).unwrap();
        assert_abs_diff_eq!(d.reported_value(), 0.0, epsilon = 1e-9);
        assert!(matches!(
            original_discord(&ghz3(), Side::Gamma, &quick()),
            Err(Error::NotBipartite(3))
        ));
    }

    #[test]
    fn original_discord_is_asymmetric() {
        // Classical on A, quantum on B: ½|0><0|⊗|0><0| + ½|1><1|⊗|+><+|.
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], &[2]).unwrap();
        let one = DensityMatrix::diagonal(&[0.0, 1.0], &[2]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(&[2], CVector::from_vec(vec![c(s), c(s)])).unwrap().projector();
        let m = zero.tensor(&zero).elements() * c(0.5) + one.tensor(&plus).elements() * c(0.5);
        let rho = DensityMatrix::validate(m, &[2, 2]).unwrap();
        let measure_a = original_discord(&rho, Side::Gamma, &quick()).unwrap();
        let measure_b = original_discord(&rho, Side::GammaPrime, &quick()).unwrap();
        assert!(measure_a.reported_value() <= 1e-8);
        assert!(measure_b.value > 0.1);
    }

    #[test]
    fn symmetric_discord_examples() {
        let d = symmetric_discord(&bell(), &quick()).unwrap();
        assert_abs_diff_eq!(d.value, 1.0, epsilon = 1e-9);
        let a = random_mixed(&[2], 2, 5).unwrap();
        let b = random_mixed(&[2], 2, 6).unwrap();
        assert!(symmetric_discord(&a.tensor(&b), &quick()).unwrap().reported_value() <= 1e-9);
        assert!(symmetric_discord(&classical_corr(), &quick()).unwrap().reported_value() <= 1e-12);
    }

    #[test]
    fn objective_examples() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], &[2]).unwrap();
        let bell_zero = bell().tensor(&zero);
        let cut = Partition::parse("12|3", bell_zero.dims()).unwrap();
        let m = CutMeasurement::new(cut, ProjectiveBasis::bell(), ProjectiveBasis::computational(2)).unwrap();
        assert_abs_diff_eq!(gamma_discord_objective(&bell_zero, &m).unwrap(), 0.0, epsilon = 1e-12);

        // GHZ3, 1|23, computational: I = 2, classical mutual information 1.
        let g = ghz3();
        let cut = Partition::parse("1|23", g.dims()).unwrap();
        let m = CutMeasurement::computational(cut);
        let v0 = gamma_discord_objective(&g, &m).unwrap();
        assert_abs_diff_eq!(v0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gamma_discord_objective_direct(&g, &m).unwrap(), v0, epsilon = 1e-9);

        // Product of pure states with bases diagonalizing both marginals.
        let psi = crate::qstate::random_pure(&[2], 3).unwrap().projector();
        let phi = crate::qstate::random_pure(&[3], 4).unwrap().projector();
        let prod = psi.tensor(&phi);
        let cut = Partition::new(&[0], prod.dims()).unwrap();
        let m = CutMeasurement::new(
            cut,
            ProjectiveBasis::eigenbasis(psi.elements()),
            ProjectiveBasis::eigenbasis(phi.elements()),
        )
        .unwrap();
        assert_abs_diff_eq!(gamma_discord_objective(&prod, &m).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_discord_examples() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], &[2]).unwrap();
        let bell_zero = bell().tensor(&zero);
        let cut = Partition::parse("12|3", bell_zero.dims()).unwrap();
        assert!(gamma_discord(&bell_zero, &cut, &quick()).unwrap().reported_value() <= 1e-6);

        let a = random_mixed(&[2], 2, 7).unwrap();
        let b = random_mixed(&[2], 1, 8).unwrap();
        let cc = random_mixed(&[2], 2, 9).unwrap();
        let prod = a.tensor(&b).tensor(&cc);
        for cut in enumerate_bipartitions(prod.dims()).unwrap() {
            assert!(gamma_discord(&prod, &cut, &quick()).unwrap().reported_value() <= 1e-6);
        }
    }

    #[test]
    fn one_sided_gamma_discord_is_original_discord_measuring_gamma() {
        let rho = random_mixed(&[2, 2], 3, 17).unwrap();
        let cut = Partition::new(&[0], rho.dims()).unwrap();
        let cfg = OptimizerConfig {
            measured_blocks: MeasuredBlocks::GammaOnly,
            ..quick()
        };
        let a = gamma_discord(&rho, &cut, &cfg).unwrap();
        let b = original_discord(&rho, Side::Gamma, &quick()).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
        // Measuring γ′ as well can only lose more correlation.
        let two = gamma_discord(&rho, &cut, &quick()).unwrap();
        assert!(a.value <= two.value + 1e-6);
    }

    #[test]
    fn genuine_discord_examples() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], &[2]).unwrap();
        let bell_zero = bell().tensor(&zero);
        let g = genuine_discord(&bell_zero, &quick()).unwrap();
        assert!(g.reported_value() <= 1e-6);
        assert_eq!(g.best_partition.to_string(), "12|3");
        assert_eq!(g.per_partition.len(), 3);

        let a = random_mixed(&[2], 2, 10).unwrap();
        let prod = a.tensor(&a).tensor(&a);
        assert!(genuine_discord(&prod, &quick()).unwrap().reported_value() <= 1e-6);

        let g = genuine_discord(&ghz3(), &quick()).unwrap();
        assert!(g.value > 0.1);
        let vals: Vec<f64> = g.per_partition.iter().map(|(_, r)| r.value).collect();
        for v in &vals {
            assert_abs_diff_eq!(*v, vals[0], epsilon = 1e-3);
        }
    }

    #[test]
    fn ghz_gamma_discord_matches_product_grid() {
        // Coarse per-site Bloch grid (15° polar, 30° azimuth on the upper
        // hemisphere) over all three qubits. Every measurement has classical
        // mutual information <= H(p_1) <= 1, so the grid minimum is >= 1 and
        // the computational basis (on the grid) reaches it.
        let g = ghz3();
        let cut = Partition::parse("1|23", g.dims()).unwrap();
        let angles: Vec<(f64, f64)> = (0..=6)
            .flat_map(|i| (0..12).map(move |j| (i as f64 * 15f64.to_radians(), j as f64 * 30f64.to_radians())))
            .collect();
        let bases: Vec<ProjectiveBasis> = angles.iter().map(|&(t, p)| bloch_basis(t, p)).collect();
        let problem = CutProblem::new(&g, &cut).unwrap();
        let mut grid = f64::INFINITY;
        for b1 in &bases {
            for b2 in &bases {
                for b3 in &bases {
                    let v = problem.bracket(b1.frame(), &b2.frame().kronecker(b3.frame()));
                    grid = grid.min(v);
                }
            }
        }
        assert_abs_diff_eq!(grid, 1.0, epsilon = 1e-12);
        let r = gamma_discord(&g, &cut, &quick()).unwrap();
        assert_abs_diff_eq!(r.value, grid, epsilon = 2e-3);
    }

    #[test]
    fn per_site_mode_runs_and_bounds_per_cut() {
        let rho = random_mixed(&[2, 2, 2], 3, 33).unwrap();
        let cut = Partition::parse("1|23", rho.dims()).unwrap();
        let joint = gamma_discord(&rho, &cut, &quick()).unwrap();
        let site = gamma_discord(
            &rho,
            &cut,
            &OptimizerConfig {
                basis_mode: BasisMode::PerSite,
                ..quick()
            },
        )
        .unwrap();
        // Product bases are a subset of joint bases.
        assert!(joint.value <= site.value + 1e-4);
        if let Argmin::Cut(m) = &site.argmin {
            assert!(m.basis_gamma_prime().orthonormality_defect() < 1e-12);
        } else {
            panic!("expected a cut measurement");
        }
    }

    #[test]
    fn results_are_deterministic() {
        let rho = random_mixed(&[2, 2, 2], 4, 2).unwrap();
        let a = genuine_discord(&rho, &quick()).unwrap();
        let b = genuine_discord(&rho, &quick()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let cut = a.per_partition[1].0.clone();
        let single = gamma_discord(&rho, &cut, &quick()).unwrap();
        assert_eq!(single.value.to_bits(), a.per_partition[1].1.value.to_bits());
    }

    #[test]
    fn zero_value_means_fixed_point_on_classical_states() {
        // Correlated classical-classical state in rotated local bases.
        let cut = Partition::parse("1|23", &[2, 2, 2]).unwrap();
        let ug = random_basis(2, 1);
        let up = random_basis(4, 2);
        let product = ug.kron(&up);
        // Nondegenerate marginals, so the eigenbasis starts are the fixed point.
        let probs = [0.31, 0.04, 0.01, 0.12, 0.02, 0.2, 0.22, 0.08];
        let diag = DensityMatrix::diagonal(&probs, &[2, 2, 2]).unwrap();
        let m = product.frame() * diag.elements() * product.frame().adjoint();
        let rho = DensityMatrix::validate(m, &[2, 2, 2]).unwrap();
        let r = gamma_discord(&rho, &cut, &quick()).unwrap();
        assert!(r.reported_value() <= 1e-6);
        let Argmin::Cut(m) = &r.argmin else { panic!() };
        let fixed = dephase_cut(&rho, m).unwrap();
        assert!(rho.frobenius_distance(fixed.elements()) <= 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn identity_and_direct_forms_agree(seed in any::<u64>(), rank in 1usize..=8) {
            let rho = random_mixed(&[2, 2, 2], rank, seed).unwrap();
            let cuts = enumerate_bipartitions(rho.dims()).unwrap();
            let cut = cuts[(seed % 3) as usize].clone();
            let m = CutMeasurement::new(
                cut.clone(),
                random_basis(cut.d_gamma(), seed ^ 7),
                random_basis(cut.d_gamma_prime(), seed ^ 9),
            ).unwrap();
            let a = gamma_discord_objective(&rho, &m).unwrap();
            let b = gamma_discord_objective_direct(&rho, &m).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
            // Pointwise the bracket is I(ρ) − I(Φρ) >= 0.
            prop_assert!(a >= -1e-12);
            prop_assert!(a <= mutual_information(&rho, &cut).unwrap() + 1e-12);
        }

        #[test]
        fn objective_gauge_invariance(seed in any::<u64>()) {
            let rho = random_mixed(&[2, 3], 4, seed).unwrap();
            let cut = Partition::new(&[0], rho.dims()).unwrap();
            let (bg, bp) = (random_basis(2, seed ^ 1), random_basis(3, seed ^ 2));
            let (ug, up) = (random_basis(2, seed ^ 3), random_basis(3, seed ^ 4));
            let u = ug.frame().kronecker(up.frame());
            let rotated = DensityMatrix::validate(&u * rho.elements() * u.adjoint(), rho.dims()).unwrap();
            let m = CutMeasurement::new(cut.clone(), bg.clone(), bp.clone()).unwrap();
            let mu = CutMeasurement::new(
                cut,
                ProjectiveBasis::new(ug.frame() * bg.frame()).unwrap(),
                ProjectiveBasis::new(up.frame() * bp.frame()).unwrap(),
            ).unwrap();
            let a = gamma_discord_objective(&rho, &m).unwrap();
            let b = gamma_discord_objective(&rotated, &mu).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
