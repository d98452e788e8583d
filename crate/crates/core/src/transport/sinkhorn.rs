use ndarray::{Array1, Array2, Axis, Zip};

use super::{CostMatrix, Marginals, SinkhornConfig, TransportPlan};
use crate::error::{mismatch, Result};
use crate::scalar::{log_sum_exp, Scalar};

/// Log-domain Sinkhorn iterations for entropic optimal transport.
///
/// Starting from `b = 0`, alternates
///
/// ```text
/// a_i = log mu_i - LSE_j(-C_ij / eps + b_j)
/// b_j = log nu_j - LSE_i(-C_ij / eps + a_i)
/// ```
///
/// and stops once `||b_t - b_{t-1}||_2 < tolerance` or after `max_iter`
/// rounds. The plan is `exp(a_i - C_ij / eps + b_j)`. Hitting `max_iter`
/// is not an error; the plan comes back with `converged == false`.
pub fn sinkhorn<T: Scalar>(
    cost: &CostMatrix<T>,
    marg: &Marginals<T>,
    cfg: &SinkhornConfig,
) -> Result<TransportPlan<T>> {
    cfg.validate()?;
    let (n, m) = (cost.n(), cost.m());
    if marg.mu().len() != n || marg.nu().len() != m {
        return Err(mismatch(
            format!("marginals of length ({n}, {m})"),
            format!("({}, {})", marg.mu().len(), marg.nu().len()),
        ));
    }
    let eps = T::lit(cfg.epsilon);
    let tol = T::lit(cfg.tolerance);
    let log_kernel: Array2<T> = cost.view().mapv(|c| -c / eps);
    let log_mu = marg.mu().mapv(|v| v.ln());
    let log_nu = marg.nu().mapv(|v| v.ln());

    let mut a = Array1::<T>::zeros(n);
    let mut b = Array1::<T>::zeros(m);
    let mut next_b = Array1::<T>::zeros(m);
    let mut iterations_used = 0;
    let mut converged = false;
    for iter in 1..=cfg.max_iter {
        for (i, row) in log_kernel.axis_iter(Axis(0)).enumerate() {
            a[i] = log_mu[i] - log_sum_exp(row.iter().zip(b.iter()).map(|(&k, &bj)| k + bj));
        }
        for (j, col) in log_kernel.axis_iter(Axis(1)).enumerate() {
            next_b[j] = log_nu[j] - log_sum_exp(col.iter().zip(a.iter()).map(|(&k, &ai)| k + ai));
        }
        let change = next_b
            .iter()
            .zip(b.iter())
            .map(|(&new, &old)| {
                // equal infinities (zero-weight targets) count as no change
                if new == old {
                    T::zero()
                } else {
                    (new - old) * (new - old)
                }
            })
            .sum::<T>()
            .sqrt();
        std::mem::swap(&mut b, &mut next_b);
        iterations_used = iter;
        if change < tol {
            converged = true;
            break;
        }
    }

    let mut values = log_kernel;
    Zip::indexed(&mut values).for_each(|(i, j), v| {
        *v = (a[i] + *v + b[j]).exp();
    });
    let achieved_cost = Zip::from(&values)
        .and(&cost.view())
        .fold(T::zero(), |acc, &p, &c| acc + p * c);
    let row_marginal_error = values
        .sum_axis(Axis(1))
        .iter()
        .zip(marg.mu())
        .map(|(&s, &w)| (s - w).abs())
        .fold(T::zero(), T::max);
    let col_marginal_error = values
        .sum_axis(Axis(0))
        .iter()
        .zip(marg.nu())
        .map(|(&s, &w)| (s - w).abs())
        .fold(T::zero(), T::max);
    Ok(TransportPlan {
        values,
        log_a: a,
        log_b: b,
        achieved_cost,
        iterations_used,
        converged,
        row_marginal_error,
        col_marginal_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use ndarray::array;

    fn solve(cost: Array2<f64>, cfg: &SinkhornConfig) -> TransportPlan<f64> {
        let (n, m) = cost.dim();
        sinkhorn(
            &CostMatrix::new(cost).unwrap(),
            &Marginals::uniform(n, m).unwrap(),
            cfg,
        )
        .unwrap()
    }

    #[test]
    fn one_by_one() {
        let p = solve(array![[0.7]], &SinkhornConfig::default());
        assert!((p.values[[0, 0]] - 1.0).abs() < 1e-12);
        assert!(p.converged);
    }

    #[test]
    fn constant_cost_gives_independent_coupling() {
        let p = solve(Array2::from_elem((2, 2), 0.3), &SinkhornConfig::default());
        for v in p.values.iter() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn small_epsilon_picks_the_diagonal() {
        let cfg = SinkhornConfig {
            epsilon: 1e-3,
            max_iter: 1000,
            tolerance: 1e-9,
        };
        let p = solve(array![[0.0, 1.0], [1.0, 0.0]], &cfg);
        assert!((p.values[[0, 0]] - 0.5).abs() < 1e-3);
        assert!((p.values[[1, 1]] - 0.5).abs() < 1e-3);
        assert!(p.values[[0, 1]] < 1e-3 && p.values[[1, 0]] < 1e-3);
    }

    #[test]
    fn zero_weight_target_gets_no_mass() {
        let cost = CostMatrix::new(array![[0.1f64, 0.5, 0.9], [0.4, 0.2, 0.3]]).unwrap();
        let marg = Marginals::new(array![0.5, 0.5], array![0.5, 0.0, 0.5]).unwrap();
        let cfg = SinkhornConfig {
            max_iter: 5000,
            ..Default::default()
        };
        let p = sinkhorn(&cost, &marg, &cfg).unwrap();
        assert!(p.values.column(1).iter().all(|&v| v == 0.0));
        assert!(p.values.iter().all(|v| v.is_finite()));
        assert!(p.converged);
        assert!(p.row_marginal_error < 1e-3 && p.col_marginal_error < 1e-3);
    }

    #[test]
    fn dimension_and_config_errors() {
        let cost = CostMatrix::new(array![[0.0f64, 1.0]]).unwrap();
        let marg = Marginals::uniform(2, 2).unwrap();
        assert!(matches!(
            sinkhorn(&cost, &marg, &SinkhornConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let marg = Marginals::uniform(1, 2).unwrap();
        let bad = SinkhornConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(matches!(sinkhorn(&cost, &marg, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = SinkhornConfig {
            epsilon: 1e-3,
            max_iter: 1,
            tolerance: 1e-12,
        };
        let p = solve(array![[0.0, 1.0, 0.3], [1.0, 0.0, 0.2], [0.5, 0.1, 0.9]], &cfg);
        assert!(!p.converged);
        assert_eq!(p.iterations_used, 1);
    }

    #[test]
    fn f32_matches_f64() {
        let c64 = array![[0.1f64, 0.9, 0.4], [0.7, 0.2, 0.5]];
        let c32 = c64.mapv(|v| v as f32);
        let p64 = solve(c64, &SinkhornConfig::default());
        let p32 = sinkhorn(
            &CostMatrix::new(c32).unwrap(),
            &Marginals::uniform(2, 3).unwrap(),
            &SinkhornConfig::default(),
        )
        .unwrap();
        for (a, b) in p64.values.iter().zip(p32.values.iter()) {
            assert!((a - f64::from(*b)).abs() < 1e-5);
        }
    }
}
