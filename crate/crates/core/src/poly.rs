//! Small positive polynomials with saturating evaluation, used for declared
//! bounds: input lengths, step budgets, size and slowdown limits.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Poly {
    /// coeffs[i] is the coefficient of n^i.
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(coeffs: &[u64]) -> Self {
        Poly {
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn constant(c: u64) -> Self {
        Poly::new(&[c])
    }

    pub fn linear(c0: u64, c1: u64) -> Self {
        Poly::new(&[c0, c1])
    }

    pub fn eval(&self, n: u64) -> u64 {
        let mut acc = 0u64;
        let mut pow = 1u64;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                pow = pow.saturating_mul(n);
            }
            acc = acc.saturating_add(c.saturating_mul(pow));
        }
        acc
    }

    pub fn is_positive(&self) -> bool {
        self.coeffs.iter().any(|&c| c > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_matches_horner() {
        let p = Poly::new(&[3, 2, 1]); // 3 + 2n + n^2
        assert_eq!(p.eval(0), 3);
        assert_eq!(p.eval(5), 3 + 10 + 25);
    }

    #[test]
    fn saturates_instead_of_overflowing() {
        let p = Poly::new(&[0, u64::MAX]);
        assert_eq!(p.eval(u64::MAX), u64::MAX);
    }
}
