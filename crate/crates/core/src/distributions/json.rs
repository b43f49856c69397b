//! JSON wire format for distributions, as used inside problem configs.
//!
//! Base families are tagged by `"family"`; affine pushforwards wrap a base
//! family under an `"affine"` key:
//!
//! ```json
//! {"family":"normal","mean":[0,0],"cov":[[1,0],[0,1]]}
//! {"family":"weibull","shape":1.0,"scales":[1.0]}
//! {"family":"elliptical","shape":2.0,"cov":[[1]]}
//! {"family":"mixture","weights":[0.5,0.5],"means":[[0],[1]],"covs":[[[1]],[[2]]]}
//! {"affine":{"T":[[1,0],[0,1],[0,0]],"t":[0,0,1],"base":{"family":"normal",...}}}
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffinePushforward, Distribution, Uncertainty};
use crate::error::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UncertaintyJson {
    Affine { affine: AffineJson },
    Base(FamilyJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyJson {
    Normal {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    Elliptical {
        shape: f64,
        cov: Vec<Vec<f64>>,
    },
    Mixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covs: Vec<Vec<Vec<f64>>>,
    },
    Weibull {
        shape: f64,
        scales: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineJson {
    #[serde(rename = "T")]
    pub transform: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub base: FamilyJson,
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, Error> {
    if rows.is_empty() {
        return Err(Error::Config(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: ragged or empty rows")));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().cloned(),
    ))
}

pub(crate) fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

impl TryFrom<FamilyJson> for Distribution {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Self, Error> {
        match j {
            FamilyJson::Normal { mean, cov } => Distribution::multivariate_normal(
                DVector::from_vec(mean),
                matrix_from_rows(&cov, "normal cov")?,
            ),
            FamilyJson::Elliptical { shape, cov } => {
                Distribution::elliptical(matrix_from_rows(&cov, "elliptical cov")?, shape)
            }
            FamilyJson::Mixture {
                weights,
                means,
                covs,
            } => {
                let means = means.into_iter().map(DVector::from_vec).collect();
                let covs = covs
                    .iter()
                    .map(|c| matrix_from_rows(c, "mixture cov"))
                    .collect::<Result<Vec<_>, _>>()?;
                Distribution::gaussian_mixture(weights, means, covs)
            }
            FamilyJson::Weibull { shape, scales } => {
                Distribution::weibull_independent(shape, scales)
            }
        }
    }
}

impl From<&Distribution> for FamilyJson {
    fn from(d: &Distribution) -> Self {
        match d {
            Distribution::MultivariateNormal(f) => FamilyJson::Normal {
                mean: f.mean().iter().cloned().collect(),
                cov: rows_from_matrix(f.covariance()),
            },
            Distribution::Elliptical(f) => FamilyJson::Elliptical {
                shape: f.shape,
                cov: rows_from_matrix(&f.cov),
            },
            Distribution::GaussianMixture(f) => FamilyJson::Mixture {
                weights: f.weights.clone(),
                means: f
                    .components
                    .iter()
                    .map(|c| c.mean().iter().cloned().collect())
                    .collect(),
                covs: f
                    .components
                    .iter()
                    .map(|c| rows_from_matrix(c.covariance()))
                    .collect(),
            },
            Distribution::WeibullIndependent(f) => FamilyJson::Weibull {
                shape: f.shape,
                scales: f.scales.clone(),
            },
        }
    }
}

impl TryFrom<UncertaintyJson> for Uncertainty {
    type Error = Error;

    fn try_from(j: UncertaintyJson) -> Result<Self, Error> {
        match j {
            UncertaintyJson::Base(fam) => Ok(Uncertainty::Base(fam.try_into()?)),
            UncertaintyJson::Affine { affine } => {
                let base: Distribution = affine.base.try_into()?;
                let transform = matrix_from_rows(&affine.transform, "affine T")?;
                let offset = DVector::from_vec(affine.t);
                Ok(Uncertainty::Affine(AffinePushforward::new(
                    base, transform, offset,
                )?))
            }
        }
    }
}

impl From<Uncertainty> for UncertaintyJson {
    fn from(u: Uncertainty) -> Self {
        match u {
            Uncertainty::Base(d) => UncertaintyJson::Base((&d).into()),
            Uncertainty::Affine(p) => UncertaintyJson::Affine {
                affine: AffineJson {
                    transform: rows_from_matrix(p.transform()),
                    t: p.offset().iter().cloned().collect(),
                    base: p.base().into(),
                },
            },
        }
    }
}
