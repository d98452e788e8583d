//! Multi-prompt transport: cosine score maps between image and sketch
//! features, entropic optimal transport solved in the log domain, and
//! transport-weighted score aggregation.

mod oracle;
mod scores;
mod sinkhorn;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::scalar::Scalar;

pub use oracle::{brute_force_ot, MAX_BRUTE_FORCE_SIDE};
pub use scores::{
    cosine_scores, extract_patch_features, grid_cells, mpt_aggregate, multi_prompt_transport,
    pooled_prompt_feature, upsample_scoremap, MptOutput,
};
pub use sinkhorn::sinkhorn;

/// Rows of `dim`-dimensional feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T>(Array2<T>);

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidDimensions(format!(
                "feature matrix {}x{} is empty",
                values.nrows(),
                values.ncols()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("feature value is not finite".into()));
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: usize, dim: usize, values: Vec<T>) -> Result<Self> {
        let arr = Array2::from_shape_vec((rows, dim), values)
            .map_err(|e| Error::InvalidDimensions(e.to_string()))?;
        Self::new(arr)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.0
    }
}

/// Finite transport cost matrix (`n` sources × `m` targets).
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix<T>(Array2<T>);

impl<T: Scalar> CostMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidDimensions("cost matrix is empty".into()));
        }
        if let Some(((i, j), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteCost(i, j));
        }
        Ok(Self(values))
    }

    /// `1 - S` for a cosine score matrix `S`.
    pub fn from_scores(scores: &Array2<T>) -> Result<Self> {
        Self::new(scores.mapv(|s| T::one() - s))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn m(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.0.view()
    }
}

/// Source (`mu`) and target (`nu`) probability weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals<T> {
    mu: Array1<T>,
    nu: Array1<T>,
}

impl<T: Scalar> Marginals<T> {
    pub fn new(mu: Array1<T>, nu: Array1<T>) -> Result<Self> {
        for (name, w) in [("mu", &mu), ("nu", &nu)] {
            if w.is_empty() {
                return Err(Error::InvalidDimensions(format!("{name} is empty")));
            }
            if !w.iter().all(|&v| v >= T::zero() && v.is_finite()) {
                return Err(Error::Domain(format!("{name} has a negative or non-finite weight")));
            }
            let sum: T = w.iter().copied().sum();
            let tol = T::lit(1e-9).max(T::epsilon() * T::from_usize_lossy(4 * w.len()));
            if (sum - T::one()).abs() > tol {
                return Err(Error::Domain(format!("{name} sums to {sum}, expected 1")));
            }
        }
        Ok(Self { mu, nu })
    }

    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDimensions("uniform marginals need n, m >= 1".into()));
        }
        Self::new(
            Array1::from_elem(n, T::one() / T::from_usize_lossy(n)),
            Array1::from_elem(m, T::one() / T::from_usize_lossy(m)),
        )
    }

    pub fn mu(&self) -> &Array1<T> {
        &self.mu
    }

    pub fn nu(&self) -> &Array1<T> {
        &self.nu
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinkhornConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            max_iter: 50,
            tolerance: 1e-4,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Solution of an entropic transport problem.
#[derive(Clone, Debug)]
pub struct TransportPlan<T> {
    pub values: Array2<T>,
    /// Log-domain dual scalings `a` (rows) and `b` (columns).
    pub log_a: Array1<T>,
    pub log_b: Array1<T>,
    /// `<T, C>`.
    pub achieved_cost: T,
    pub iterations_used: usize,
    pub converged: bool,
    /// `max_i |sum_j T_ij - mu_i|`.
    pub row_marginal_error: T,
    /// `max_j |sum_i T_ij - nu_j|`.
    pub col_marginal_error: T,
}

impl<T: Scalar> TransportPlan<T> {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }
}

/// Score matrix `HW × (K_p · N)`: the columns of prompt `k` are
/// `k*N .. (k+1)*N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreStack<T> {
    values: Array2<T>,
    num_prompts: usize,
    per_prompt_cols: usize,
}

impl<T: Scalar> ScoreStack<T> {
    pub fn new(values: Array2<T>, num_prompts: usize, per_prompt_cols: usize) -> Result<Self> {
        if num_prompts == 0 || per_prompt_cols == 0 || values.nrows() == 0 {
            return Err(Error::InvalidDimensions("score stack needs HW, K_p, N >= 1".into()));
        }
        if values.ncols() != num_prompts * per_prompt_cols {
            return Err(mismatch(
                format!("{} columns (K_p={num_prompts} x N={per_prompt_cols})", num_prompts * per_prompt_cols),
                format!("{} columns", values.ncols()),
            ));
        }
        Ok(Self {
            values,
            num_prompts,
            per_prompt_cols,
        })
    }

    pub fn pixels(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_prompts(&self) -> usize {
        self.num_prompts
    }

    pub fn per_prompt_cols(&self) -> usize {
        self.per_prompt_cols
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }
}
