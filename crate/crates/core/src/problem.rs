//! Factorization instances and candidate factor pairs.
//!
//! An instance fixes the target `n`, its little-endian bit vector and the bit
//! widths allotted to the two factors. Widths default to `floor(N/2) + 1`
//! for both factors, which covers every balanced factor pair of an `N`-bit
//! target.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widths beyond this would overflow the `u64` running sums of the diagram.
pub const MAX_TOTAL_WIDTH: usize = 62;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("invalid instance: n = {0} (need n >= 4)")]
    InvalidInstance(u64),
    #[error("invalid widths (np = {np}, nq = {nq}) for a {bits}-bit target: {reason}")]
    WidthError {
        np: usize,
        nq: usize,
        bits: usize,
        reason: &'static str,
    },
    #[error("factor {value} does not fit in {width} bits")]
    FactorTooWide { value: u64, width: usize },
}

/// LSB-first binary digits of `x`, padded to `width` (or to the bit length
/// when `width` is smaller).
pub fn to_bits(x: u64, width: usize) -> Vec<bool> {
    let len = bit_length(x).max(width);
    (0..len).map(|k| (x >> k) & 1 == 1).collect()
}

pub fn from_bits(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | ((b as u64) << k))
}

pub fn bit_length(x: u64) -> usize {
    (u64::BITS - x.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n: u64,
    /// Binary digits of `n`, index `k` holds bit `k`.
    pub n_bits: Vec<bool>,
    pub np: usize,
    pub nq: usize,
}

impl ProblemInstance {
    pub fn new(n: u64, widths: Option<(usize, usize)>) -> Result<Self, ProblemError> {
        if n < 4 {
            return Err(ProblemError::InvalidInstance(n));
        }
        let bits = bit_length(n);
        let default = bits / 2 + 1;
        let (np, nq) = widths.unwrap_or((default, default));
        let err = |reason| ProblemError::WidthError { np, nq, bits, reason };
        if np < 2 || nq < 2 {
            return Err(err("both widths must be at least 2"));
        }
        if np + nq < bits {
            return Err(err("np + nq must cover the bit length of n"));
        }
        if np + nq > MAX_TOTAL_WIDTH {
            return Err(err("combined width exceeds the 64-bit compiler path"));
        }
        Ok(Self { n, n_bits: to_bits(n, 0), np, nq })
    }

    /// Bit length `N` of the target.
    pub fn bit_len(&self) -> usize {
        self.n_bits.len()
    }

    /// Product-term check `sum_i sum_j p_i q_j 2^(i+j) == n`.
    pub fn check_factor_pair(&self, pair: &FactorPair) -> bool {
        let mut total: u128 = 0;
        for (i, &pi) in pair.p_bits.iter().enumerate() {
            for (j, &qj) in pair.q_bits.iter().enumerate() {
                if pi && qj {
                    total += 1u128 << (i + j);
                }
            }
        }
        total == self.n as u128
    }

    /// All `(p, q)` within the widths with `p * q = n`, by trial division.
    pub fn divisor_pairs(&self) -> Vec<(u64, u64)> {
        let p_max = (1u64 << self.np) - 1;
        let q_max = (1u64 << self.nq) - 1;
        (1..=p_max.min(self.n))
            .filter(|&p| self.n.is_multiple_of(p) && self.n / p <= q_max)
            .map(|p| (p, self.n / p))
            .collect()
    }
}

pub fn create_instance(n: u64, widths: Option<(usize, usize)>) -> Result<ProblemInstance, ProblemError> {
    ProblemInstance::new(n, widths)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactorPair {
    pub p: u64,
    pub q: u64,
    pub p_bits: Vec<bool>,
    pub q_bits: Vec<bool>,
}

impl FactorPair {
    pub fn new(p: u64, q: u64, np: usize, nq: usize) -> Result<Self, ProblemError> {
        if bit_length(p) > np {
            return Err(ProblemError::FactorTooWide { value: p, width: np });
        }
        if bit_length(q) > nq {
            return Err(ProblemError::FactorTooWide { value: q, width: nq });
        }
        Ok(Self { p, q, p_bits: to_bits(p, np), q_bits: to_bits(q, nq) })
    }

    pub fn for_instance(inst: &ProblemInstance, p: u64, q: u64) -> Result<Self, ProblemError> {
        Self::new(p, q, inst.np, inst.nq)
    }
}

pub fn check_factor_pair(inst: &ProblemInstance, pair: &FactorPair) -> bool {
    inst.check_factor_pair(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn six_has_three_bits_and_two_bit_factors() {
        let inst = create_instance(6, None).unwrap();
        assert_eq!(inst.bit_len(), 3);
        assert_eq!(inst.n_bits, vec![false, true, true]);
        assert_eq!((inst.np, inst.nq), (2, 2));
    }

    #[test]
    fn fifteen_with_three_bit_override() {
        let inst = create_instance(15, Some((3, 3))).unwrap();
        assert_eq!(inst.n_bits, vec![true; 4]);
        assert_eq!((inst.np, inst.nq), (3, 3));
    }

    #[test]
    fn smallest_instance() {
        let inst = create_instance(4, None).unwrap();
        assert_eq!(inst.n_bits, vec![false, false, true]);
        assert_eq!((inst.np, inst.nq), (2, 2));
    }

    #[test]
    fn rejects_small_n_and_narrow_widths() {
        assert_eq!(create_instance(3, None), Err(ProblemError::InvalidInstance(3)));
        assert!(matches!(
            create_instance(255, Some((2, 3))),
            Err(ProblemError::WidthError { .. })
        ));
        assert!(matches!(create_instance(15, Some((1, 4))), Err(ProblemError::WidthError { .. })));
    }

    #[test]
    fn factor_pair_checks() {
        let six = create_instance(6, None).unwrap();
        assert!(six.check_factor_pair(&FactorPair::for_instance(&six, 2, 3).unwrap()));
        assert!(!six.check_factor_pair(&FactorPair::for_instance(&six, 3, 3).unwrap()));
        let n35 = create_instance(35, Some((3, 3))).unwrap();
        assert!(n35.check_factor_pair(&FactorPair::for_instance(&n35, 5, 7).unwrap()));
        assert!(FactorPair::for_instance(&six, 4, 1).is_err());
    }

    #[test]
    fn divisor_pairs_respect_widths() {
        let inst = create_instance(15, Some((3, 3))).unwrap();
        assert_eq!(inst.divisor_pairs(), vec![(3, 5), (5, 3)]);
        assert!(create_instance(13, None).unwrap().divisor_pairs().is_empty());
    }

    proptest! {
        #[test]
        fn round_trip_products(np in 2usize..8, nq in 2usize..8, p_seed: u64, q_seed: u64) {
            let p = p_seed % (1 << np);
            let q = q_seed % (1 << nq);
            prop_assume!(p * q >= 4);
            let inst = create_instance(p * q, Some((np, nq))).unwrap();
            let pair = FactorPair::new(p, q, np, nq).unwrap();
            prop_assert!(inst.check_factor_pair(&pair));
        }

        #[test]
        fn bits_reconstruct_n(n in 4u64..=(1 << 20)) {
            let inst = create_instance(n, None).unwrap();
            prop_assert_eq!(from_bits(&inst.n_bits), n);
        }
    }
}
