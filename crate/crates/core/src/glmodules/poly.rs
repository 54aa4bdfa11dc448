//! Polynomials in `h_1, ..., h_{d-1}` with exact coefficients, as used by the
//! Nilsson modules.

use num_bigint::BigInt;
use num_integer::binomial;

use crate::exactlinalg::{Rational, SparseVector};

pub(crate) type Monomial = Vec<u32>;
pub(crate) type Poly = SparseVector<Monomial>;

pub(crate) fn constant(nvars: usize, c: Rational) -> Poly {
    Poly::from_terms([(vec![0; nvars], c)])
}

pub(crate) fn variable(nvars: usize, i: usize) -> Poly {
    let mut m = vec![0; nvars];
    m[i] = 1;
    Poly::basis(m)
}

pub(crate) fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a.iter() {
        for (mb, cb) in b.iter() {
            let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            out.add_term(m, &(ca * cb));
        }
    }
    out
}

/// `f(h_1, ..., h_i + delta, ..., h_{d-1})`
pub(crate) fn shift(f: &Poly, i: usize, delta: i64) -> Poly {
    if delta == 0 {
        return f.clone();
    }
    let delta = BigInt::from(delta);
    let mut out = Poly::new();
    for (m, c) in f.iter() {
        let a = m[i];
        for p in 0..=a {
            // (h_i + delta)^a = sum_p C(a, p) delta^(a-p) h_i^p
            let w = binomial(BigInt::from(a), BigInt::from(p)) * delta.pow(a - p);
            let mut mm = m.clone();
            mm[i] = p;
            out.add_term(mm, &(c * Rational::from_integer(w)));
        }
    }
    out
}

pub(crate) fn total_degree(m: &Monomial) -> u32 {
    m.iter().sum()
}

/// All exponent tuples in `nvars` variables of total degree `<= bound`,
/// sorted lexicographically.
pub(crate) fn monomials_up_to(nvars: usize, bound: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, left: u32, prefix: &mut Monomial, out: &mut Vec<Monomial>) {
        if prefix.len() == nvars {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, bound, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> Rational {
        Rational::from_integer(x.into())
    }

    #[test]
    fn shift_expands_binomially() {
        // (h + 1)^2 = h^2 + 2h + 1
        let f = Poly::basis(vec![2]);
        let g = shift(&f, 0, 1);
        assert_eq!(g, Poly::from_terms([(vec![2], r(1)), (vec![1], r(2)), (vec![0], r(1))]));
        assert_eq!(shift(&g, 0, -1), f);
    }

    #[test]
    fn monomial_listing() {
        assert_eq!(monomials_up_to(1, 2), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(monomials_up_to(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(monomials_up_to(2, 4).len(), 15);
    }

    #[test]
    fn product_of_linears() {
        let x = variable(2, 0);
        let y = variable(2, 1);
        let mut s = x.clone();
        s.add_assign(&y);
        let sq = mul(&s, &s);
        assert_eq!(sq.get(&vec![1, 1]), r(2));
        assert_eq!(sq.len(), 3);
    }
}
