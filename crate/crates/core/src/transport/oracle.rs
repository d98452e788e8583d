use itertools::Itertools;
use ndarray::Array2;

use super::{CostMatrix, Marginals};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest side handled by [`brute_force_ot`] (6! = 720 permutations).
pub const MAX_BRUTE_FORCE_SIDE: usize = 6;

/// Exact unregularized transport for square problems with uniform marginals.
///
/// With uniform weights the optimum is attained at a vertex of the Birkhoff
/// polytope, i.e. a permutation matrix scaled by `1/n`, so enumerating all
/// `n!` permutations is exact. Ties go to the lexicographically first
/// permutation. Returns `(<P, C>, P)`.
pub fn brute_force_ot<T: Scalar>(cost: &CostMatrix<T>, marg: &Marginals<T>) -> Result<(T, Array2<T>)> {
    let n = cost.n();
    if cost.m() != n {
        return Err(Error::UnsupportedInstance(format!(
            "brute force needs a square cost, got {n}x{}",
            cost.m()
        )));
    }
    if n > MAX_BRUTE_FORCE_SIDE {
        return Err(Error::UnsupportedInstance(format!(
            "brute force limited to n <= {MAX_BRUTE_FORCE_SIDE}, got {n}"
        )));
    }
    let w = T::one() / T::from_usize_lossy(n);
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(8.0));
    let uniform = |v: &ndarray::Array1<T>| v.len() == n && v.iter().all(|&x| (x - w).abs() <= tol);
    if !uniform(marg.mu()) || !uniform(marg.nu()) {
        return Err(Error::UnsupportedInstance(
            "brute force needs uniform marginals matching the cost".into(),
        ));
    }
    let c = cost.view();
    let mut best: Option<(T, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let total = perm
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &j)| acc + c[[i, j]]);
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, perm));
        }
    }
    let (total, perm) = best.expect("n >= 1");
    let mut plan = Array2::zeros((n, n));
    for (i, &j) in perm.iter().enumerate() {
        plan[[i, j]] = w;
    }
    Ok((total * w, plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn run(c: Array2<f64>) -> (f64, Array2<f64>) {
        let n = c.nrows();
        brute_force_ot(&CostMatrix::new(c).unwrap(), &Marginals::uniform(n, n).unwrap()).unwrap()
    }

    #[test]
    fn two_by_two_diagonal() {
        let (cost, plan) = run(array![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(cost, 0.0);
        assert_eq!(plan, array![[0.5, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn one_by_one() {
        let (cost, plan) = run(array![[0.37]]);
        assert_eq!(cost, 0.37);
        assert_eq!(plan, array![[1.0]]);
    }

    #[test]
    fn three_by_three_identity() {
        // identity costs 0.3; every other permutation costs at least 1.5
        let (cost, plan) = run(array![[0.1, 1.0, 0.9], [0.8, 0.1, 1.0], [1.0, 0.7, 0.1]]);
        assert!((cost - 0.1).abs() < 1e-15);
        for i in 0..3 {
            assert_eq!(plan[[i, i]], 1.0 / 3.0);
        }
    }

    #[test]
    fn ties_take_first_permutation() {
        let (_, plan) = run(Array2::from_elem((3, 3), 1.0));
        assert_eq!(plan[[0, 0]], 1.0 / 3.0);
        assert_eq!(plan[[2, 2]], 1.0 / 3.0);
    }

    #[test]
    fn rejects_unsupported() {
        let c = CostMatrix::new(Array2::<f64>::zeros((2, 3))).unwrap();
        let m = Marginals::uniform(2, 3).unwrap();
        assert!(matches!(brute_force_ot(&c, &m), Err(Error::UnsupportedInstance(_))));
        let c = CostMatrix::new(Array2::<f64>::zeros((2, 2))).unwrap();
        let m = Marginals::new(array![0.3, 0.7], array![0.5, 0.5]).unwrap();
        assert!(matches!(brute_force_ot(&c, &m), Err(Error::UnsupportedInstance(_))));
        let c = CostMatrix::new(Array2::<f64>::zeros((7, 7))).unwrap();
        let m = Marginals::uniform(7, 7).unwrap();
        assert!(matches!(brute_force_ot(&c, &m), Err(Error::UnsupportedInstance(_))));
    }
}
