use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::random::{random_gaussian, random_psd_from, rng_from_seed, SpecRng};
use crate::linalg::{MatrixC, PsdMatrix, SpectrumSpec};

/// How the random pair `(A, B)` of a trial is drawn.
///
/// Serialized as `generic`, `diagonal`, `rank-deficient` or
/// `near-commuting:<eps>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    /// Haar frames, eigenvalues uniform on `[0, 1)`.
    Generic,
    /// Diagonal with entries uniform on `[0, 1)`.
    Diagonal,
    /// Haar frames, rank uniform in `0..n` (at least 1 when `n > 1`).
    RankDeficient,
    /// `B = A + εE` with `A` generic and `E` a random PSD matrix of unit
    /// spectral norm.
    NearCommuting(f64),
}

impl Family {
    pub const DEFAULTS: [Family; 5] = [
        Family::Generic,
        Family::Diagonal,
        Family::RankDeficient,
        Family::NearCommuting(1e-3),
        Family::NearCommuting(1e-1),
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Generic => f.write_str("generic"),
            Family::Diagonal => f.write_str("diagonal"),
            Family::RankDeficient => f.write_str("rank-deficient"),
            Family::NearCommuting(eps) => write!(f, "near-commuting:{eps}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Family::Generic),
            "diagonal" => Ok(Family::Diagonal),
            "rank-deficient" => Ok(Family::RankDeficient),
            _ => {
                let eps = s
                    .strip_prefix("near-commuting:")
                    .ok_or_else(|| invalid(format!("unknown matrix family '{s}'")))?
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad epsilon in family '{s}'")))?;
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(invalid("near-commuting epsilon must be positive"));
                }
                Ok(Family::NearCommuting(eps))
            }
        }
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

/// Matrices of one trial. `a`, `b` are PSD except for the AG-mean check on
/// the generic family, which uses arbitrary Gaussian matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialCase {
    pub a: MatrixC,
    pub b: MatrixC,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<MatrixC>,
}

impl TrialCase {
    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn psd_pair(&self) -> Result<(PsdMatrix, PsdMatrix)> {
        Ok((
            PsdMatrix::from_matrix(self.a.clone())?,
            PsdMatrix::from_matrix(self.b.clone())?,
        ))
    }
}

const UNIT: SpectrumSpec = SpectrumSpec::Uniform { low: 0.0, high: 1.0 };

fn psd_pair(family: Family, n: usize, rng: &mut SpecRng) -> Result<(PsdMatrix, PsdMatrix)> {
    match family {
        Family::Generic => Ok((random_psd_from(n, &UNIT, rng)?, random_psd_from(n, &UNIT, rng)?)),
        Family::Diagonal => {
            let mut diag = || (0..n).map(|_| rng.gen::<f64>()).collect::<Vec<_>>();
            let da = diag();
            let db = diag();
            Ok((PsdMatrix::from_diag(&da)?, PsdMatrix::from_diag(&db)?))
        }
        Family::RankDeficient => {
            let mut one = || {
                let rank = if n > 1 { rng.gen_range(1..n) } else { 0 };
                random_psd_from(n, &SpectrumSpec::RankDeficient { rank, low: 0.0, high: 1.0 }, rng)
            };
            let a = one()?;
            let b = one()?;
            Ok((a, b))
        }
        Family::NearCommuting(eps) => {
            let a = random_psd_from(n, &UNIT, rng)?;
            let e = random_psd_from(n, &SpectrumSpec::Uniform { low: 0.0, high: 1.0 }, rng)?;
            let norm = e.spectral_norm();
            let e = if norm > 0.0 { e.scale(1.0 / norm)? } else { e };
            let b = PsdMatrix::from_matrix(a.matrix() + &e.matrix().scale(eps))?;
            Ok((a, b))
        }
    }
}

/// Draws the trial case for `family` at dimension `n` from `seed`.
pub fn generate_case(family: Family, n: usize, seed: u64, arbitrary: bool, with_x: bool) -> Result<TrialCase> {
    if n == 0 {
        return Err(invalid("matrix dimension must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let (a, b) = if arbitrary && family == Family::Generic {
        (random_gaussian(n, &mut rng), random_gaussian(n, &mut rng))
    } else {
        let (a, b) = psd_pair(family, n, &mut rng)?;
        (a.matrix().clone(), b.matrix().clone())
    };
    let x = with_x.then(|| random_gaussian(n, &mut rng));
    Ok(TrialCase { a, b, x })
}
