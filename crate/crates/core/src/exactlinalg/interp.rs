use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{LinalgError, Rational, SparseVector};

/// Coefficients of a polynomial with vector coefficients, keyed by the
/// exponent tuple. Every multidegree inside the degree bounds is present.
pub type CoefficientMap<K> = BTreeMap<Vec<usize>, SparseVector<K>>;

/// Inverse of the Vandermonde matrix `V[t][e] = t^e`, `t, e = 0..=degree`.
fn vandermonde_inverse(degree: usize) -> Vec<Vec<Rational>> {
    let n = degree + 1;
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|t| {
            let t = Rational::from_integer((t as i64).into());
            let mut row = Vec::with_capacity(2 * n);
            let mut p = Rational::one();
            for _ in 0..n {
                row.push(p.clone());
                p *= &t;
            }
            row
        })
        .collect();
    for (i, row) in a.iter_mut().enumerate() {
        for j in 0..n {
            row.push(if i == j { Rational::one() } else { Rational::zero() });
        }
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("Vandermonde on distinct nodes is invertible");
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

fn pow_i64(x: i64, e: usize) -> Rational {
    Rational::from_integer(num_bigint::BigInt::from(x).pow(e as u32))
}

/// Evaluates `sum_a c_a t^a` at an integer point.
pub fn evaluate_polynomial<K: Ord + Clone>(coefficients: &CoefficientMap<K>, point: &[i64]) -> SparseVector<K> {
    let mut out = SparseVector::new();
    for (deg, c) in coefficients {
        if c.is_zero() {
            continue;
        }
        let mono: Rational = deg.iter().zip(point).map(|(&e, &x)| pow_i64(x, e)).product();
        out.add_scaled(c, &mono);
    }
    out
}

/// Recovers the coefficients of a polynomial with vector coefficients from
/// its values on a tensor grid.
///
/// Each variable `i` must be sampled at `0, 1, ..., g_i - 1` with
/// `g_i > degree_bounds[i]`, and every grid point must appear exactly once.
/// The solve uses the first `degree_bounds[i] + 1` nodes per axis; any
/// remaining points are used to check consistency.
pub fn vandermonde_solve<K: Ord + Clone>(
    points: &[Vec<i64>],
    values: &[SparseVector<K>],
    degree_bounds: &[usize],
) -> Result<CoefficientMap<K>, LinalgError> {
    let nvars = degree_bounds.len();
    if points.len() != values.len() {
        return Err(LinalgError::LengthMismatch {
            left: points.len(),
            right: values.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| p.len() != nvars) {
        return Err(LinalgError::NotGrid(format!("point {p:?} has wrong arity, expected {nvars}")));
    }

    let mut axis_sizes = Vec::with_capacity(nvars);
    for i in 0..nvars {
        let axis: BTreeSet<i64> = points.iter().map(|p| p[i]).collect();
        let size = axis.len();
        if axis.iter().copied().ne(0..size as i64) {
            return Err(LinalgError::NotGrid(format!(
                "variable {i} is not sampled at consecutive integers from 0"
            )));
        }
        if size <= degree_bounds[i] {
            return Err(LinalgError::NotGrid(format!(
                "variable {i} has {size} nodes, needs {}",
                degree_bounds[i] + 1
            )));
        }
        axis_sizes.push(size);
    }
    let expected: usize = axis_sizes.iter().product();
    let mut by_point: BTreeMap<&[i64], &SparseVector<K>> = BTreeMap::new();
    for (p, v) in points.iter().zip(values) {
        if by_point.insert(p.as_slice(), v).is_some() {
            return Err(LinalgError::NotGrid(format!("duplicate point {p:?}")));
        }
    }
    if by_point.len() != expected {
        return Err(LinalgError::NotGrid(format!(
            "{} points given, full grid has {expected}",
            by_point.len()
        )));
    }

    // dense tensor over the solve sub-grid, row-major in variable order
    let shape: Vec<usize> = degree_bounds.iter().map(|d| d + 1).collect();
    let total: usize = shape.iter().product();
    let strides: Vec<usize> = (0..nvars).map(|i| shape[i + 1..].iter().product()).collect();
    let index_to_point = |mut idx: usize| -> Vec<i64> {
        let mut p = vec![0i64; nvars];
        for i in 0..nvars {
            p[i] = (idx / strides[i]) as i64;
            idx %= strides[i];
        }
        p
    };
    let mut tensor: Vec<SparseVector<K>> = (0..total)
        .map(|idx| by_point[index_to_point(idx).as_slice()].clone())
        .collect();

    for axis in 0..nvars {
        let inv = vandermonde_inverse(degree_bounds[axis]);
        let n = shape[axis];
        let stride = strides[axis];
        let mut next = vec![SparseVector::new(); total];
        for base in 0..total {
            if (base / stride) % n != 0 {
                continue;
            }
            for (e, inv_row) in inv.iter().enumerate() {
                let mut acc = SparseVector::new();
                for (t, w) in inv_row.iter().enumerate() {
                    acc.add_scaled(&tensor[base + t * stride], w);
                }
                next[base + e * stride] = acc;
            }
        }
        tensor = next;
    }

    let coefficients: CoefficientMap<K> = tensor
        .into_iter()
        .enumerate()
        .map(|(idx, c)| (index_to_point(idx).into_iter().map(|x| x as usize).collect(), c))
        .collect();

    for (p, v) in points.iter().zip(values) {
        if &evaluate_polynomial(&coefficients, p) != v {
            return Err(LinalgError::Inconsistent(p.clone()));
        }
    }
    Ok(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: i64) -> SparseVector<u8> {
        SparseVector::from_terms([(0u8, Rational::from_integer(x.into()))])
    }

    fn grid(sizes: &[usize]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &s in sizes {
            out = out
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..s as i64).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn constant_polynomial() {
        let pts = grid(&[2]);
        let vals = vec![scalar(5); 2];
        let c = vandermonde_solve(&pts, &vals, &[1]).unwrap();
        assert_eq!(c[&vec![0]], scalar(5));
        assert!(c[&vec![1]].is_zero());
    }

    #[test]
    fn square_polynomial() {
        let pts = grid(&[3]);
        let vals: Vec<_> = (0..3).map(|t| scalar(t * t)).collect();
        let c = vandermonde_solve(&pts, &vals, &[2]).unwrap();
        assert!(c[&vec![0]].is_zero());
        assert!(c[&vec![1]].is_zero());
        assert_eq!(c[&vec![2]], scalar(1));
    }

    #[test]
    fn bilinear_polynomial() {
        let pts = grid(&[2, 2]);
        let vals: Vec<_> = pts.iter().map(|p| scalar(p[0] * p[1])).collect();
        let c = vandermonde_solve(&pts, &vals, &[1, 1]).unwrap();
        for (deg, v) in &c {
            if deg == &vec![1, 1] {
                assert_eq!(v, &scalar(1));
            } else {
                assert!(v.is_zero(), "{deg:?}");
            }
        }
    }

    #[test]
    fn rejects_non_grid() {
        let pts = vec![vec![0], vec![2]];
        let vals = vec![scalar(0), scalar(0)];
        assert!(matches!(vandermonde_solve(&pts, &vals, &[1]), Err(LinalgError::NotGrid(_))));
        let pts = vec![vec![0, 0], vec![1, 1]];
        assert!(matches!(vandermonde_solve(&pts, &vals, &[1, 1]), Err(LinalgError::NotGrid(_))));
        // too few nodes for the degree
        let pts = grid(&[2]);
        assert!(matches!(vandermonde_solve(&pts, &vals, &[2]), Err(LinalgError::NotGrid(_))));
    }

    #[test]
    fn rejects_inconsistent_overdetermined() {
        // t^2 sampled at 0..3 but claimed to be linear
        let pts = grid(&[3]);
        let vals: Vec<_> = (0..3).map(|t| scalar(t * t)).collect();
        assert_eq!(
            vandermonde_solve(&pts, &vals, &[1]),
            Err(LinalgError::Inconsistent(vec![2]))
        );
    }

    #[test]
    fn extra_nodes_accepted_when_consistent() {
        let pts = grid(&[5, 3]);
        let vals: Vec<_> = pts.iter().map(|p| scalar(3 * p[0] - p[1] * p[1] + 1)).collect();
        let c = vandermonde_solve(&pts, &vals, &[1, 2]).unwrap();
        assert_eq!(c[&vec![1, 0]], scalar(3));
        assert_eq!(c[&vec![0, 2]], scalar(-1));
        assert_eq!(c[&vec![0, 0]], scalar(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn solve_then_evaluate_reproduces_grid(
                coeffs in prop::collection::vec(-9i64..=9, 12),
            ) {
                // degree bounds (2, 3) in two variables
                let bounds = [2usize, 3];
                let pts = grid(&[3, 4]);
                let poly: CoefficientMap<u8> = (0..12)
                    .map(|i| (vec![i / 4, i % 4], scalar(coeffs[i])))
                    .collect();
                let vals: Vec<_> = pts.iter().map(|p| evaluate_polynomial(&poly, p)).collect();
                let solved = vandermonde_solve(&pts, &vals, &bounds).unwrap();
                prop_assert_eq!(&solved, &poly);
                for (p, v) in pts.iter().zip(&vals) {
                    prop_assert_eq!(&evaluate_polynomial(&solved, p), v);
                }
            }
        }
    }
}
