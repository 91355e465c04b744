//! Bipartitions `γ|γ′` of the party set.
//!
//! Parties are 0-based in the API and 1-based in the text syntax
//! (`"1|23"`, `"13|2"`). For more than nine parties the text form uses
//! commas (`"1,10|2,3,...,9"`).

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::qstate::{check_dims, permute_subsystems, DensityMatrix};
use crate::{Error, Result};

/// A bipartition of `{0..N}` into two nonempty blocks.
///
/// [`enumerate_bipartitions`] only yields canonical cuts (party 0 on the
/// γ side). Non-canonical cuts can be built explicitly when the side
/// matters, e.g. for one-sided measurements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    gamma: Vec<usize>,
    gamma_prime: Vec<usize>,
    dims_gamma: Vec<usize>,
    dims_gamma_prime: Vec<usize>,
}

impl Partition {
    /// Cut with the given γ block; γ′ is the complement.
    pub fn new(gamma: &[usize], dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        let n = dims.len();
        if n < 2 {
            return Err(Error::TooFewParties(n));
        }
        let mut g = gamma.to_vec();
        g.sort_unstable();
        let before = g.len();
        g.dedup();
        if g.len() != before {
            return Err(Error::InvalidPartition("duplicate party index".into()));
        }
        if let Some(&bad) = g.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, parties: n });
        }
        if g.is_empty() || g.len() == n {
            return Err(Error::InvalidPartition("both blocks must be nonempty".into()));
        }
        let gp: Vec<usize> = (0..n).filter(|i| !g.contains(i)).collect();
        Ok(Self {
            dims_gamma: g.iter().map(|&i| dims[i]).collect(),
            dims_gamma_prime: gp.iter().map(|&i| dims[i]).collect(),
            gamma: g,
            gamma_prime: gp,
        })
    }

    /// Parses `"13|2"` (1-based); both sides must cover every party once.
    pub fn parse(text: &str, dims: &[usize]) -> Result<Self> {
        let spec: CutSpec = text.parse()?;
        spec.resolve(dims)
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn gamma_prime(&self) -> &[usize] {
        &self.gamma_prime
    }

    pub fn dims_gamma(&self) -> &[usize] {
        &self.dims_gamma
    }

    pub fn dims_gamma_prime(&self) -> &[usize] {
        &self.dims_gamma_prime
    }

    pub fn d_gamma(&self) -> usize {
        self.dims_gamma.iter().product()
    }

    pub fn d_gamma_prime(&self) -> usize {
        self.dims_gamma_prime.iter().product()
    }

    pub fn n_parties(&self) -> usize {
        self.gamma.len() + self.gamma_prime.len()
    }

    /// Full dimension list in the original party order.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![0; self.n_parties()];
        for (&i, &d) in self.gamma.iter().zip(&self.dims_gamma) {
            dims[i] = d;
        }
        for (&i, &d) in self.gamma_prime.iter().zip(&self.dims_gamma_prime) {
            dims[i] = d;
        }
        dims
    }

    pub fn is_canonical(&self) -> bool {
        self.gamma.first() == Some(&0)
    }

    /// The same cut with γ and γ′ exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            gamma: self.gamma_prime.clone(),
            gamma_prime: self.gamma.clone(),
            dims_gamma: self.dims_gamma_prime.clone(),
            dims_gamma_prime: self.dims_gamma.clone(),
        }
    }

    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.swapped()
        }
    }

    /// Party order `(γ, γ′)`.
    pub fn order(&self) -> Vec<usize> {
        self.gamma.iter().chain(&self.gamma_prime).copied().collect()
    }

    /// Inverse of [`order`](Self::order).
    pub fn inverse_order(&self) -> Vec<usize> {
        let order = self.order();
        let mut inv = vec![0; order.len()];
        for (pos, &party) in order.iter().enumerate() {
            inv[party] = pos;
        }
        inv
    }

    pub(crate) fn check_dims(&self, dims: &[usize]) -> Result<()> {
        let own = self.dims();
        if own.as_slice() != dims {
            return Err(Error::DimensionMismatch {
                expected: own.iter().product(),
                found: dims.iter().product(),
            });
        }
        if own.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: own.len(),
                found: dims.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.n_parties() > 9;
        let side = |ids: &[usize]| {
            let parts: Vec<String> = ids.iter().map(|i| (i + 1).to_string()).collect();
            parts.join(if wide { "," } else { "" })
        };
        write!(f, "{}|{}", side(&self.gamma), side(&self.gamma_prime))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A parsed cut string not yet bound to a dimension list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    /// 0-based parties on the γ side.
    pub gamma: Vec<usize>,
    /// 0-based parties on the γ′ side.
    pub gamma_prime: Vec<usize>,
}

impl FromStr for CutSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPartition(format!("'{text}': {msg}"));
        let (left, right) = text
            .trim()
            .split_once('|')
            .ok_or_else(|| bad("expected '<gamma>|<gamma prime>'"))?;
        let side = |s: &str| -> Result<Vec<usize>> {
            let s = s.trim();
            let tokens: Vec<&str> = if s.contains(',') {
                s.split(',').map(str::trim).collect()
            } else {
                s.split("").filter(|t| !t.is_empty()).collect()
            };
            tokens
                .iter()
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(bad("party indices are 1-based integers")),
                })
                .collect()
        };
        let gamma = side(left)?;
        let gamma_prime = side(right)?;
        if gamma.is_empty() || gamma_prime.is_empty() {
            return Err(bad("both sides must be nonempty"));
        }
        let mut all: Vec<usize> = gamma.iter().chain(&gamma_prime).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("duplicate party index"));
        }
        Ok(Self { gamma, gamma_prime })
    }
}

impl CutSpec {
    pub fn resolve(&self, dims: &[usize]) -> Result<Partition> {
        let n = dims.len();
        if let Some(&bad) = self.gamma.iter().chain(&self.gamma_prime).find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad + 1,
                parties: n,
            });
        }
        if self.gamma.len() + self.gamma_prime.len() != n {
            return Err(Error::InvalidPartition(format!(
                "cut does not cover all {n} parties"
            )));
        }
        Partition::new(&self.gamma, dims)
    }
}

/// All `2^(N-1) - 1` canonical bipartitions, ordered lexicographically by
/// their γ block.
pub fn enumerate_bipartitions(dims: &[usize]) -> Result<Vec<Partition>> {
    let n = dims.len();
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    check_dims(dims)?;
    let mut cuts = Vec::with_capacity((1usize << (n - 1)) - 1);
    // Bit i of `mask` puts party i+1 on the γ side; party 0 always is.
    for mask in 0..(1usize << (n - 1)) - 1 {
        let gamma: Vec<usize> = std::iter::once(0)
            .chain((1..n).filter(|i| mask >> (i - 1) & 1 == 1))
            .collect();
        cuts.push(Partition::new(&gamma, dims)?);
    }
    cuts.sort_by(|a, b| a.gamma.cmp(&b.gamma));
    Ok(cuts)
}

/// Reorders subsystems to `(γ, γ′)`; the result's dims follow that order.
pub fn permute_to_cut(rho: &DensityMatrix, cut: &Partition) -> Result<DensityMatrix> {
    cut.check_dims(rho.dims())?;
    let order = cut.order();
    let dims = order.iter().map(|&i| rho.dims()[i]).collect();
    Ok(DensityMatrix::from_trusted(
        permute_subsystems(rho.elements(), rho.dims(), &order),
        dims,
    ))
}

/// Inverse of [`permute_to_cut`]: takes a state in `(γ, γ′)` order back to
/// the original party order.
pub fn restore_from_cut(rho_cut: &DensityMatrix, cut: &Partition) -> Result<DensityMatrix> {
    let order = cut.order();
    let expected: Vec<usize> = order.iter().map(|&i| cut.dims()[i]).collect();
    if rho_cut.dims() != expected.as_slice() {
        return Err(Error::DimensionMismatch {
            expected: expected.iter().product(),
            found: rho_cut.dim(),
        });
    }
    Ok(DensityMatrix::from_trusted(
        permute_subsystems(rho_cut.elements(), &expected, &cut.inverse_order()),
        cut.dims(),
    ))
}
