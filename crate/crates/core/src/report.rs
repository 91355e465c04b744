//! Analysis reports: assembly, the minima-consistency check, and JSON /
//! plain-text emission.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::correlations::{
    clamp_reported, gamma_discord, genuine_discord, Argmin, BasisMode, DiscordResult,
    MeasuredBlocks, OptimizerConfig,
};
use crate::io::StateData;
use crate::measurements::{CutMeasurement, ProjectiveBasis, Side};
use crate::partitions::{enumerate_bipartitions, Partition};
use crate::qstate::{mutual_information, von_neumann_entropy, DensityMatrix};
use crate::witness::{
    gme_concurrence_pure, gme_concurrence_upper, gmc_commutator_check, gmc_fixed_point,
    witness_w, GmcVerdict,
};
use crate::{Error, Result};

pub const SQRT2_NOTE: &str = "for pure states W = sqrt(2) * C_GME, with C_GME^2 = min over cuts of \
(1 - Tr rho_gamma^2); W and C_GME are not equal as literally stated, they differ by the factor sqrt(2)";

pub const CONVEX_ROOF_NOTE: &str = "heuristic upper bound from optimized ensemble decompositions; \
not a certified value of the convex roof";

/// Quantities an analysis can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Entropy,
    Witness,
    Gmc,
    Discord,
    ConvexRoof,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Witness => "witness",
            Measure::Gmc => "gmc",
            Measure::Discord => "discord",
            Measure::ConvexRoof => "convex-roof",
        }
    }

    /// The measures `analyze` runs when none are requested.
    pub fn defaults() -> Vec<Measure> {
        vec![Measure::Entropy, Measure::Witness, Measure::Gmc]
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "entropy" => Measure::Entropy,
            "witness" => Measure::Witness,
            "gmc" => Measure::Gmc,
            "discord" => Measure::Discord,
            "convex-roof" => Measure::ConvexRoof,
            other => return Err(Error::InvalidConfig(format!("unknown measure '{other}'"))),
        })
    }
}

/// Comma-separated measure list; result is sorted and deduplicated.
pub fn parse_measures(s: &str) -> Result<Vec<Measure>> {
    let mut out = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Measure::from_str)
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty measure list".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub measures: Vec<Measure>,
    pub config: OptimizerConfig,
    /// Restricts the discord section to one cut (no genuine value).
    pub cut: Option<Partition>,
    /// Measurement for the GMC fixed-point distance.
    pub fixed_point: Option<CutMeasurement>,
    pub timing: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            measures: Measure::defaults(),
            config: OptimizerConfig::default(),
            cut: None,
            fixed_point: None,
            timing: true,
        }
    }
}

type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize)]
pub struct InputSection {
    pub label: Option<String>,
    pub dims: Vec<usize>,
    pub dim: usize,
    pub representation: &'static str,
    pub purity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub n_random_starts: usize,
    pub include_canonical_starts: bool,
    pub max_iterations: usize,
    pub ftol: f64,
    pub step: f64,
    pub basis_mode: BasisMode,
    pub measured_blocks: MeasuredBlocks,
    pub measures: Vec<Measure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEntry {
    pub partition: Partition,
    pub entropy_gamma: f64,
    pub entropy_gamma_prime: f64,
    pub mutual_information: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropySection {
    pub von_neumann_entropy: f64,
    pub per_partition: Vec<EntropyEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionValue {
    pub partition: Partition,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PureWitness {
    pub gme_concurrence: f64,
    pub sqrt2_gme_concurrence: f64,
    /// `W − √2·C_GME`.
    pub difference: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSection {
    pub per_partition: Vec<PartitionValue>,
    pub value: f64,
    pub best_partition: Partition,
    pub pure_state: Option<PureWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexRoofSection {
    pub gme_concurrence_upper: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointEcho {
    pub partition: Partition,
    pub distance: f64,
    pub max_commutator: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GmcSection {
    pub per_partition: Vec<PartitionValue>,
    pub min_norm: f64,
    pub best_partition: Partition,
    pub verdict: GmcVerdict,
    pub caveat: &'static str,
    pub fixed_point: Option<FixedPointEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArgminEcho {
    /// Measured blocks; vectors as rows of `[re, im]` pairs.
    pub measured: Vec<Side>,
    pub basis_gamma: Option<Vec<Vec<Pair>>>,
    pub basis_gamma_prime: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordEntry {
    pub partition: Partition,
    /// Raw value with tiny negatives clamped.
    pub value: f64,
    pub raw_value: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub per_start_values: Vec<f64>,
    pub argmin: ArgminEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordSection {
    pub per_partition: Vec<DiscordEntry>,
    pub genuine_discord: Option<f64>,
    pub best_partition: Option<Partition>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingEntry {
    pub section: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub input: InputSection,
    pub config: ConfigEcho,
    pub entropy: Option<EntropySection>,
    pub witness: Option<WitnessSection>,
    pub convex_roof: Option<ConvexRoofSection>,
    pub gmc: Option<GmcSection>,
    pub discord: Option<DiscordSection>,
    pub timing: Option<Vec<TimingEntry>>,
}

fn rows(basis: &ProjectiveBasis) -> Vec<Vec<Pair>> {
    basis
        .frame()
        .column_iter()
        .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn argmin_echo(argmin: &Argmin) -> ArgminEcho {
    match argmin {
        Argmin::Cut(m) => ArgminEcho {
            measured: vec![Side::Gamma, Side::GammaPrime],
            basis_gamma: Some(rows(m.basis_gamma())),
            basis_gamma_prime: Some(rows(m.basis_gamma_prime())),
        },
        Argmin::OneSided { side, basis, .. } => ArgminEcho {
            measured: vec![*side],
            basis_gamma: (*side == Side::Gamma).then(|| rows(basis)),
            basis_gamma_prime: (*side == Side::GammaPrime).then(|| rows(basis)),
        },
    }
}

fn discord_entry(partition: Partition, r: &DiscordResult) -> DiscordEntry {
    DiscordEntry {
        partition,
        value: r.reported_value(),
        raw_value: r.value,
        converged: r.converged,
        evaluations: r.evaluations,
        per_start_values: r.per_start_values.clone(),
        argmin: argmin_echo(&r.argmin),
    }
}

fn entropy_section(rho: &DensityMatrix) -> Result<EntropySection> {
    let per_partition = enumerate_bipartitions(rho.dims())?
        .into_iter()
        .map(|cut| {
            Ok(EntropyEntry {
                entropy_gamma: von_neumann_entropy(&rho.partial_trace(cut.gamma())?),
                entropy_gamma_prime: von_neumann_entropy(&rho.partial_trace(cut.gamma_prime())?),
                mutual_information: mutual_information(rho, &cut)?,
                partition: cut,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EntropySection {
        von_neumann_entropy: von_neumann_entropy(rho),
        per_partition,
    })
}

fn witness_section(state: &StateData, rho: &DensityMatrix) -> Result<WitnessSection> {
    let w = witness_w(rho)?;
    let pure_state = match state.as_pure() {
        Some(psi) => {
            let c = gme_concurrence_pure(psi)?;
            let s = std::f64::consts::SQRT_2 * c;
            Some(PureWitness {
                gme_concurrence: c,
                sqrt2_gme_concurrence: s,
                difference: w.value - s,
                note: SQRT2_NOTE,
            })
        }
        None => None,
    };
    Ok(WitnessSection {
        per_partition: w
            .per_partition
            .into_iter()
            .map(|(partition, value)| PartitionValue { partition, value })
            .collect(),
        value: w.value,
        best_partition: w.best_partition,
        pure_state,
    })
}

fn gmc_section(rho: &DensityMatrix, fixed: Option<&CutMeasurement>) -> Result<GmcSection> {
    let g = gmc_commutator_check(rho)?;
    let fixed_point = match fixed {
        Some(m) => {
            let f = gmc_fixed_point(rho, m)?;
            Some(FixedPointEcho {
                partition: m.cut().clone(),
                distance: f.distance,
                max_commutator: f.max_commutator,
            })
        }
        None => None,
    };
    Ok(GmcSection {
        per_partition: g
            .per_partition
            .into_iter()
            .map(|(partition, value)| PartitionValue { partition, value })
            .collect(),
        min_norm: g.min_norm,
        best_partition: g.best_partition,
        verdict: g.verdict,
        caveat: g.caveat,
        fixed_point,
    })
}

fn discord_section(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
    cut: Option<&Partition>,
) -> Result<DiscordSection> {
    match cut {
        Some(cut) => {
            let r = gamma_discord(rho, cut, cfg)?;
            Ok(DiscordSection {
                per_partition: vec![discord_entry(cut.clone(), &r)],
                genuine_discord: None,
                best_partition: None,
            })
        }
        None => {
            let g = genuine_discord(rho, cfg)?;
            Ok(DiscordSection {
                per_partition: g
                    .per_partition
                    .iter()
                    .map(|(p, r)| discord_entry(p.clone(), r))
                    .collect(),
                genuine_discord: Some(g.reported_value()),
                best_partition: Some(g.best_partition),
            })
        }
    }
}

fn timed<T>(timing: &mut Vec<TimingEntry>, section: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let out = f()?;
    timing.push(TimingEntry {
        section,
        seconds: t.elapsed().as_secs_f64(),
    });
    Ok(out)
}

/// Runs the requested measures on `state`.
pub fn analyze(state: &StateData, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    opts.config.validate()?;
    let rho = state.clone().into_density();
    if rho.n_parties() < 2 {
        return Err(Error::TooFewParties(rho.n_parties()));
    }
    if let Some(cut) = &opts.cut {
        cut.check_dims(rho.dims())?;
    }
    let has = |m: Measure| opts.measures.contains(&m);
    let mut timing = Vec::new();
    let cfg = &opts.config;
    let entropy = if has(Measure::Entropy) {
        Some(timed(&mut timing, "entropy", || entropy_section(&rho))?)
    } else {
        None
    };
    let witness = if has(Measure::Witness) {
        Some(timed(&mut timing, "witness", || witness_section(state, &rho))?)
    } else {
        None
    };
    let convex_roof = if has(Measure::ConvexRoof) {
        Some(timed(&mut timing, "convex-roof", || {
            Ok(ConvexRoofSection {
                gme_concurrence_upper: gme_concurrence_upper(&rho, cfg)?,
                note: CONVEX_ROOF_NOTE,
            })
        })?)
    } else {
        None
    };
    let gmc = if has(Measure::Gmc) {
        Some(timed(&mut timing, "gmc", || gmc_section(&rho, opts.fixed_point.as_ref()))?)
    } else {
        None
    };
    let discord = if has(Measure::Discord) {
        Some(timed(&mut timing, "discord", || discord_section(&rho, cfg, opts.cut.as_ref()))?)
    } else {
        None
    };
    let report = AnalysisReport {
        input: InputSection {
            label: state.label().map(str::to_string),
            dims: rho.dims().to_vec(),
            dim: rho.dim(),
            representation: match state {
                StateData::Matrix(_) => "matrix",
                StateData::Vector(_) => "vector",
            },
            purity: rho.purity(),
        },
        config: ConfigEcho {
            seed: cfg.seed,
            n_random_starts: cfg.n_random_starts,
            include_canonical_starts: cfg.include_canonical_starts,
            max_iterations: cfg.max_iterations,
            ftol: cfg.ftol,
            step: cfg.step,
            basis_mode: cfg.basis_mode,
            measured_blocks: cfg.measured_blocks,
            measures: opts.measures.clone(),
        },
        entropy,
        witness,
        convex_roof,
        gmc,
        discord,
        timing: opts.timing.then_some(timing),
    };
    report.verify_minima()?;
    Ok(report)
}

fn min_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, f64::min)
}

impl AnalysisReport {
    /// Every reported minimum equals the minimum of its per-partition list.
    pub fn verify_minima(&self) -> Result<()> {
        let check = |name: &str, reported: f64, listed: f64| {
            if reported == listed {
                Ok(())
            } else {
                Err(Error::Inconsistent(format!(
                    "{name}: reported minimum {reported} differs from list minimum {listed}"
                )))
            }
        };
        if let Some(w) = &self.witness {
            check("witness", w.value, min_of(w.per_partition.iter().map(|e| e.value)))?;
        }
        if let Some(g) = &self.gmc {
            check("gmc", g.min_norm, min_of(g.per_partition.iter().map(|e| e.value)))?;
        }
        if let Some(d) = &self.discord {
            if let Some(v) = d.genuine_discord {
                let listed = clamp_reported(min_of(d.per_partition.iter().map(|e| e.raw_value)));
                check("genuine discord", v, listed)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.verify_minima()?;
        Ok(serde_json::to_string_pretty(self).expect("report serializes"))
    }

    /// Aligned plain text; numbers at 6 significant digits.
    pub fn to_text(&self) -> Result<String> {
        self.verify_minima()?;
        let mut body = String::new();
        let mut section = |title: &str, lines: Vec<(String, String)>| {
            let _ = writeln!(body, "{title}");
            for (k, v) in lines {
                let _ = writeln!(body, "  {k:<28} {v}");
            }
        };
        let i = &self.input;
        section(
            "input",
            vec![
                ("label".into(), i.label.clone().unwrap_or_else(|| "-".into())),
                ("dims".into(), format!("{:?}", i.dims)),
                ("representation".into(), i.representation.into()),
                ("purity".into(), sig6(i.purity)),
            ],
        );
        let c = &self.config;
        section(
            "config",
            vec![
                ("seed".into(), c.seed.to_string()),
                ("random starts".into(), c.n_random_starts.to_string()),
                ("canonical starts".into(), c.include_canonical_starts.to_string()),
                ("max iterations".into(), c.max_iterations.to_string()),
                ("ftol".into(), sig6(c.ftol)),
                ("step".into(), sig6(c.step)),
                ("basis mode".into(), enum_name(&c.basis_mode)),
                ("measured blocks".into(), enum_name(&c.measured_blocks)),
                (
                    "measures".into(),
                    c.measures.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
                ),
            ],
        );
        if let Some(e) = &self.entropy {
            let mut l = vec![("S(rho)".into(), sig6(e.von_neumann_entropy))];
            for p in &e.per_partition {
                l.push((
                    format!("I({})", p.partition),
                    format!(
                        "{}  (S_gamma {}, S_gamma' {})",
                        sig6(p.mutual_information),
                        sig6(p.entropy_gamma),
                        sig6(p.entropy_gamma_prime)
                    ),
                ));
            }
            section("entropy", l);
        }
        if let Some(w) = &self.witness {
            let mut l: Vec<(String, String)> = w
                .per_partition
                .iter()
                .map(|p| (format!("D2 {}", p.partition), sig6(p.value)))
                .collect();
            l.push(("W".into(), format!("{} at {}", sig6(w.value), w.best_partition)));
            if let Some(p) = &w.pure_state {
                l.push(("C_GME".into(), sig6(p.gme_concurrence)));
                l.push(("sqrt2 * C_GME".into(), sig6(p.sqrt2_gme_concurrence)));
                l.push(("note".into(), p.note.into()));
            }
            section("witness", l);
        }
        if let Some(r) = &self.convex_roof {
            section(
                "convex roof",
                vec![
                    ("C_GME upper bound".into(), sig6(r.gme_concurrence_upper)),
                    ("note".into(), r.note.into()),
                ],
            );
        }
        if let Some(g) = &self.gmc {
            let mut l: Vec<(String, String)> = g
                .per_partition
                .iter()
                .map(|p| (format!("|[rho, prod]| {}", p.partition), sig6(p.value)))
                .collect();
            l.push(("min norm".into(), format!("{} at {}", sig6(g.min_norm), g.best_partition)));
            l.push(("verdict".into(), g.verdict.to_string()));
            l.push(("caveat".into(), g.caveat.into()));
            if let Some(f) = &g.fixed_point {
                l.push((format!("fixed-point distance {}", f.partition), sig6(f.distance)));
                l.push(("max |[rho, Pi_j]|".into(), sig6(f.max_commutator)));
            }
            section("gmc", l);
        }
        if let Some(d) = &self.discord {
            let mut l = Vec::new();
            for e in &d.per_partition {
                l.push((
                    format!("D_gamma {}", e.partition),
                    format!(
                        "{}  (raw {}, converged {}, evaluations {}, starts {})",
                        sig6(e.value),
                        sig6(e.raw_value),
                        e.converged,
                        e.evaluations,
                        e.per_start_values.len()
                    ),
                ));
            }
            if let (Some(v), Some(p)) = (d.genuine_discord, &d.best_partition) {
                l.push(("genuine discord".into(), format!("{} at {}", sig6(v), p)));
            }
            section("discord", l);
        }
        if let Some(t) = &self.timing {
            section(
                "timing",
                t.iter().map(|e| (e.section.to_string(), format!("{} s", sig6(e.seconds)))).collect(),
            );
        }
        Ok(body)
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// `%g`-style formatting with 6 significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{v:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{zoo, ZooParams};

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            n_random_starts: 3,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.70710678118), "0.707107");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(1e-8), "1e-8");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn measures_parse() {
        assert_eq!(
            parse_measures("gmc, witness,gmc").unwrap(),
            vec![Measure::Witness, Measure::Gmc]
        );
        assert!(parse_measures("bogus").is_err());
        assert!(parse_measures("").is_err());
    }

    #[test]
    fn bell_times_zero_report() {
        let state = zoo("bell-times-zero", &ZooParams::default()).unwrap();
        let opts = AnalysisOptions {
            measures: vec![Measure::Witness, Measure::Gmc],
            ..AnalysisOptions::default()
        };
        let r = analyze(&state, &opts).unwrap();
        let gmc = r.gmc.as_ref().unwrap();
        assert_eq!(gmc.verdict, GmcVerdict::NecessaryConditionPassed);
        assert_eq!(r.witness.as_ref().unwrap().per_partition.len(), 3);
        assert!(r.discord.is_none() && r.entropy.is_none());
        let text = r.to_text().unwrap();
        assert!(text.contains("necessary-condition-passed"));
        let json = r.to_json().unwrap();
        assert!(json.contains("\"best_partition\": \"12|3\""));
    }

    #[test]
    fn pure_input_reports_sqrt2_gap() {
        let state = zoo("ghz", &ZooParams::default()).unwrap();
        let r = analyze(&state, &AnalysisOptions::default()).unwrap();
        let w = r.witness.unwrap();
        let p = w.pure_state.unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
        assert!((p.sqrt2_gme_concurrence - w.value).abs() < 1e-12);
        assert!((p.gme_concurrence - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn discord_section_consistency() {
        let state = zoo("bell-times-zero", &ZooParams::default()).unwrap();
        let opts = AnalysisOptions {
            measures: vec![Measure::Discord],
            config: quick(),
            timing: false,
            ..AnalysisOptions::default()
        };
        let r = analyze(&state, &opts).unwrap();
        let d = r.discord.as_ref().unwrap();
        assert!(d.genuine_discord.unwrap() <= 1e-6);
        assert_eq!(d.best_partition.as_ref().unwrap().to_string(), "12|3");
        assert!(r.timing.is_none());
        r.verify_minima().unwrap();

        let mut broken = r.clone();
        broken.discord.as_mut().unwrap().genuine_discord = Some(0.5);
        assert!(matches!(broken.verify_minima(), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn single_cut_discord() {
        let state = zoo("ghz", &ZooParams::default()).unwrap();
        let cut = Partition::parse("1|23", state.dims()).unwrap();
        let opts = AnalysisOptions {
            measures: vec![Measure::Discord],
            config: quick(),
            cut: Some(cut),
            ..AnalysisOptions::default()
        };
        let r = analyze(&state, &opts).unwrap();
        let d = r.discord.unwrap();
        assert_eq!(d.per_partition.len(), 1);
        assert!(d.genuine_discord.is_none());
        assert!((d.per_partition[0].value - 1.0).abs() < 2e-3);
    }
}
