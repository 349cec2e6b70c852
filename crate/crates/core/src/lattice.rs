//! Dilation pairs `A = diag(α,1)`, `B = diag(1,β)`, digit sets of
//! `T = AᵐBⁿ`, and midpoint frequency grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DilationPair {
    pub alpha: u32,
    pub beta: u32,
}

impl DilationPair {
    pub fn new(alpha: u32, beta: u32) -> Result<Self> {
        if alpha < 2 || beta < 2 {
            return Err(Error::InvalidDilation { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn triadic() -> Self {
        Self { alpha: 3, beta: 3 }
    }

    pub fn dyadic() -> Self {
        Self { alpha: 2, beta: 2 }
    }

    /// `T = AᵐBⁿ`.
    pub fn power(&self, m: u32, n: u32) -> Result<Dilation> {
        if m == 0 && n == 0 {
            return Err(Error::TrivialDilation);
        }
        Ok(Dilation {
            diag: [self.alpha.pow(m) as i64, self.beta.pow(n) as i64],
        })
    }

    pub fn a(&self) -> Dilation {
        Dilation { diag: [self.alpha as i64, 1] }
    }

    pub fn b(&self) -> Dilation {
        Dilation { diag: [1, self.beta as i64] }
    }

    pub fn ab(&self) -> Dilation {
        Dilation { diag: [self.alpha as i64, self.beta as i64] }
    }
}

/// A diagonal dilation `diag(t₁, t₂)` with `t₁t₂ ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dilation {
    pub diag: [i64; 2],
}

impl Dilation {
    pub fn det(&self) -> usize {
        (self.diag[0] * self.diag[1]) as usize
    }

    /// Digits `{0..t₁−1}×{0..t₂−1}` in lexicographic order.
    pub fn digits(&self) -> DigitSet {
        let digits = (0..self.diag[0])
            .flat_map(|i| (0..self.diag[1]).map(move |j| (i, j)))
            .collect();
        DigitSet { dilation: *self, digits }
    }

    /// Index `i` with `k ∈ d_i + TZ²`.
    pub fn coset_index(&self, k: (i64, i64)) -> usize {
        let r0 = k.0.rem_euclid(self.diag[0]);
        let r1 = k.1.rem_euclid(self.diag[1]);
        (r0 * self.diag[1] + r1) as usize
    }

    /// `2πT⁻¹d`.
    pub fn dual_shift(&self, d: (i64, i64)) -> [f64; 2] {
        [
            2.0 * PI * d.0 as f64 / self.diag[0] as f64,
            2.0 * PI * d.1 as f64 / self.diag[1] as f64,
        ]
    }

    /// `Tk`.
    pub fn apply(&self, k: (i64, i64)) -> (i64, i64) {
        (self.diag[0] * k.0, self.diag[1] * k.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSet {
    pub dilation: Dilation,
    pub digits: Vec<(i64, i64)>,
}

impl DigitSet {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

/// Lexicographic digit set for `T = AᵐBⁿ`.
pub fn digits_for(pair: DilationPair, m: u32, n: u32) -> Result<DigitSet> {
    Ok(pair.power(m, n)?.digits())
}

/// Cell midpoints of the `n×n` uniform subdivision of `[−L, L]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreqGrid {
    pub half_extent: f64,
    pub n: usize,
}

impl FreqGrid {
    pub fn new(half_extent: f64, n: usize) -> Self {
        assert!(n > 0 && half_extent > 0.0);
        Self { half_extent, n }
    }

    /// `[−4π/3, 4π/3]²` with `n` cells per axis.
    pub fn meyer(n: usize) -> Self {
        Self::new(4.0 * PI / 3.0, n)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + (i as f64 + 0.5) * self.spacing()
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(i), self.coord(j)]
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| self.node(i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triadic_digit_order() {
        let ds = digits_for(DilationPair::triadic(), 1, 1).unwrap();
        let expected: Vec<(i64, i64)> = vec![
            (0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2),
        ];
        assert_eq!(ds.digits, expected);
    }

    #[test]
    fn dyadic_a_digits() {
        let ds = digits_for(DilationPair::dyadic(), 1, 0).unwrap();
        assert_eq!(ds.digits, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn identity_dilation_rejected() {
        let err = digits_for(DilationPair::dyadic(), 0, 0).unwrap_err();
        assert_eq!(err.to_string(), "identity dilation has a single trivial coset");
    }

    #[test]
    fn mixed_digits_distinct_mod_t() {
        let pair = DilationPair::new(2, 3).unwrap();
        let t = pair.ab();
        let ds = t.digits();
        assert_eq!(ds.len(), 6);
        for (a, &da) in ds.digits.iter().enumerate() {
            for &db in &ds.digits[a + 1..] {
                let dx = da.0 - db.0;
                let dy = da.1 - db.1;
                assert!(dx % 2 != 0 || dy % 3 != 0, "{da:?} ≡ {db:?}");
            }
        }
    }

    #[test]
    fn coset_index_examples() {
        let t = DilationPair::triadic().ab();
        let ds = t.digits();
        assert_eq!(ds.digits[t.coset_index((4, 7))], (1, 1));
        for (j, &d) in ds.digits.iter().enumerate() {
            assert_eq!(t.coset_index(d), j);
        }
    }

    #[test]
    fn cosets_partition_window() {
        for t in [DilationPair::triadic().ab(), DilationPair::new(2, 5).unwrap().power(2, 1).unwrap()] {
            let ds = t.digits();
            assert_eq!(ds.len(), t.det());
            let mut counts = vec![0usize; t.det()];
            for x in -20..=20 {
                for y in -20..=20 {
                    let hits = ds
                        .digits
                        .iter()
                        .filter(|d| (x - d.0) % t.diag[0] == 0 && (y - d.1) % t.diag[1] == 0)
                        .count();
                    assert_eq!(hits, 1);
                    counts[t.coset_index((x, y))] += 1;
                }
            }
            assert!(counts.iter().all(|&c| c > 0));
        }
    }

    #[test]
    fn grid_midpoints() {
        let g = FreqGrid::new(1.0, 4);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coord(0), -0.75);
        assert_eq!(g.coord(3), 0.75);
        assert_eq!(g.nodes().count(), 16);
    }

    proptest! {
        #[test]
        fn coset_representative_divides(
            alpha in 2u32..6, beta in 2u32..6, m in 0u32..3, n in 0u32..3,
            x in -1000i64..1000, y in -1000i64..1000,
        ) {
            prop_assume!(m + n >= 1);
            let t = DilationPair::new(alpha, beta).unwrap().power(m, n).unwrap();
            let d = t.digits().digits[t.coset_index((x, y))];
            prop_assert_eq!((x - d.0).rem_euclid(t.diag[0]), 0);
            prop_assert_eq!((y - d.1).rem_euclid(t.diag[1]), 0);
        }
    }
}
