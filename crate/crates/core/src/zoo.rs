//! Named test states.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::io::StateData;
use crate::qstate::{check_dims, random_mixed, random_pure, DensityMatrix, PureState};
use crate::{CMatrix, CVector, Error, Result, C64};

pub const NAMES: &[&str] = &[
    "bell",
    "ghz",
    "w",
    "product",
    "werner",
    "classical-corr",
    "bell-times-zero",
    "random-pure",
    "random-mixed",
];

/// Optional generator parameters; each generator reads only what it needs.
#[derive(Debug, Clone, Default)]
pub struct ZooParams {
    pub n: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub p: Option<f64>,
    pub rank: Option<usize>,
    pub seed: Option<u64>,
}

const DEFAULT_SEED: u64 = 42;

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn basis_ket(dims: &[usize], index: usize) -> PureState {
    let d: usize = dims.iter().product();
    let mut v = CVector::zeros(d);
    v[index] = real(1.0);
    PureState::from_trusted(dims, v)
}

fn bell_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(r, c)] = real(0.5);
    }
    m
}

fn qubit_count(params: &ZooParams) -> Result<usize> {
    let n = params.n.unwrap_or(3);
    if !(2..=12).contains(&n) {
        return Err(Error::BadParams(format!("n must be in 2..=12, got {n}")));
    }
    Ok(n)
}

fn dims_or(params: &ZooParams, default: &[usize]) -> Result<Vec<usize>> {
    let dims = params.dims.clone().unwrap_or_else(|| default.to_vec());
    check_dims(&dims).map_err(|e| Error::BadParams(e.to_string()))?;
    Ok(dims)
}

pub fn zoo(name: &str, params: &ZooParams) -> Result<StateData> {
    let label = name.to_string();
    let data = match name {
        "bell" => {
            let v = CVector::from_vec(vec![real(FRAC_1_SQRT_2), real(0.0), real(0.0), real(FRAC_1_SQRT_2)]);
            StateData::Vector(PureState::from_trusted(&[2, 2], v))
        }
        "ghz" => {
            let n = qubit_count(params)?;
            let mut v = CVector::zeros(1 << n);
            v[0] = real(FRAC_1_SQRT_2);
            v[(1 << n) - 1] = real(FRAC_1_SQRT_2);
            StateData::Vector(PureState::from_trusted(&vec![2; n], v))
        }
        "w" => {
            let n = qubit_count(params)?;
            let a = real(1.0 / (n as f64).sqrt());
            let mut v = CVector::zeros(1 << n);
            for k in 0..n {
                v[1 << k] = a;
            }
            StateData::Vector(PureState::from_trusted(&vec![2; n], v))
        }
        "product" => StateData::Vector(basis_ket(&dims_or(params, &[2, 2])?, 0)),
        "werner" => {
            let p = params
                .p
                .ok_or_else(|| Error::BadParams("werner needs p".into()))?;
            if !(-1.0 / 3.0..=1.0).contains(&p) {
                return Err(Error::BadParams(format!("werner p must lie in [-1/3, 1], got {p}")));
            }
            let mut m = bell_matrix() * real(p);
            for i in 0..4 {
                m[(i, i)] += real((1.0 - p) / 4.0);
            }
            StateData::Matrix(DensityMatrix::from_trusted(m, vec![2, 2]))
        }
        "classical-corr" => StateData::Matrix(DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], &[2, 2])?),
        "bell-times-zero" => {
            let zero = DensityMatrix::diagonal(&[1.0, 0.0], &[2])?;
            let bell = DensityMatrix::from_trusted(bell_matrix(), vec![2, 2]);
            StateData::Matrix(bell.tensor(&zero))
        }
        "random-pure" => {
            let dims = dims_or(params, &[2, 2])?;
            StateData::Vector(random_pure(&dims, params.seed.unwrap_or(DEFAULT_SEED))?)
        }
        "random-mixed" => {
            let dims = dims_or(params, &[2, 2])?;
            let d: usize = dims.iter().product();
            let rank = params.rank.unwrap_or(d);
            if rank == 0 || rank > d {
                return Err(Error::BadParams(format!("rank must be in 1..={d}, got {rank}")));
            }
            StateData::Matrix(random_mixed(&dims, rank, params.seed.unwrap_or(DEFAULT_SEED))?)
        }
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(data.with_label(label))
}
