//! Signed Catalan weights of blue faces.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn catalan(n: usize) -> BigInt {
    // C(n) = binom(2n, n) / (n + 1)
    let mut c = BigInt::one();
    for k in 0..n {
        c = c * (2 * (2 * k + 1)) / (k + 2);
    }
    c
}

/// `w_i = (-1)^(i-1) Cat(i-1)`, the large-N weight of a blue face of degree `2i`.
pub fn w(i: usize) -> BigInt {
    assert!(i >= 1);
    let c = catalan(i - 1);
    if i % 2 == 1 {
        c
    } else {
        -c
    }
}

/// Leading Weingarten term of a permutation with the given cycle type.
pub fn mobius(cycle_type: &[usize]) -> BigInt {
    cycle_type.iter().map(|&c| w(c)).product()
}

/// Weight table used by the enumerator. Kept as a value so that tests can
/// inject a deliberately wrong table and watch the identities break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    flip_w2: bool,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { flip_w2: false }
    }
}

impl Weights {
    pub fn standard() -> Self {
        Self::default()
    }

    /// `w_2 = +1` instead of `-1`.
    pub fn with_flipped_w2() -> Self {
        Weights { flip_w2: true }
    }

    pub fn is_standard(&self) -> bool {
        !self.flip_w2
    }

    /// Weight of a blue face with `half_degree` copies of each orientation.
    pub fn face(&self, half_degree: usize) -> BigInt {
        if self.flip_w2 && half_degree == 2 {
            return BigInt::one();
        }
        w(half_degree)
    }

    /// `w(2k) + sum_{h=1}^{k-1} w(2h) w(2(k-h))`, zero for a correct table.
    pub fn catalan_defect(&self, k: usize) -> BigInt {
        let mut s = self.face(k);
        for h in 1..k {
            s += self.face(h) * self.face(k - h);
        }
        s
    }

    pub fn check_table(&self) -> bool {
        let expected = [1, -1, 2, -5, 14];
        let table_ok = expected
            .iter()
            .enumerate()
            .all(|(i, &x)| self.face(i + 1) == BigInt::from(x));
        table_ok && (2..=12).all(|k| self.catalan_defect(k).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_catalans() {
        let c: Vec<BigInt> = (0..8).map(catalan).collect();
        let expect = [1, 1, 2, 5, 14, 42, 132, 429];
        for (a, b) in c.iter().zip(expect) {
            assert_eq!(*a, BigInt::from(b));
        }
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(&[1]), BigInt::from(1));
        assert_eq!(mobius(&[2]), BigInt::from(-1));
        assert_eq!(mobius(&[3, 2]), BigInt::from(-2));
    }

    #[test]
    fn flipped_table_breaks_recursion() {
        assert!(Weights::standard().check_table());
        assert!(!Weights::with_flipped_w2().check_table());
        assert!(!Weights::with_flipped_w2().catalan_defect(2).is_zero());
    }
}
