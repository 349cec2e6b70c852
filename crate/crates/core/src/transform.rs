//! Biscaled block transform: each level splits an `(αM)×(βN)` array into
//! `αβ` subbands of shape `M×N` using a [`HaarFamily`] matrix, then recurses on
//! the approximation band.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::latin::HaarFamily;
use crate::par;

/// Detail subbands of one level, each `M×N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub detail_a: Vec<Array2<f64>>,
    pub detail_b: Vec<Array2<f64>>,
    pub wavelet: Vec<Array2<f64>>,
}

impl Level {
    pub fn bands(&self) -> impl Iterator<Item = &Array2<f64>> {
        self.detail_a.iter().chain(&self.detail_b).chain(&self.wavelet)
    }

    pub fn bands_mut(&mut self) -> impl Iterator<Item = &mut Array2<f64>> {
        self.detail_a
            .iter_mut()
            .chain(&mut self.detail_b)
            .chain(&mut self.wavelet)
    }

    pub fn energy(&self) -> f64 {
        self.bands().map(energy).sum()
    }
}

/// Levels are ordered finest first.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandTree {
    pub alpha: usize,
    pub beta: usize,
    pub shape: (usize, usize),
    pub levels: Vec<Level>,
    pub approx: Array2<f64>,
}

impl SubbandTree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.approx.len() + self.levels.iter().flat_map(|l| l.bands()).map(|b| b.len()).sum::<usize>()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.approx) + self.levels.iter().map(Level::energy).sum::<f64>()
    }

    /// Zeroes every detail coefficient with `|c| ≤ t`. Returns the number of
    /// retained detail coefficients and the energy removed.
    pub fn threshold(&mut self, t: f64) -> ThresholdStats {
        let mut stats = ThresholdStats::default();
        for band in self.levels.iter_mut().flat_map(|l| l.bands_mut()) {
            for v in band.iter_mut() {
                stats.detail_total += 1;
                if v.abs() > t {
                    stats.retained += 1;
                } else {
                    stats.removed_energy += *v * *v;
                    *v = 0.0;
                }
            }
        }
        stats
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThresholdStats {
    pub retained: usize,
    pub detail_total: usize,
    pub removed_energy: f64,
}

fn energy(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Analysis to the given depth. Row count must be divisible by `α^depth`
/// and column count by `β^depth`.
pub fn analyze(x: ArrayView2<f64>, fam: &HaarFamily, depth: usize) -> Result<SubbandTree> {
    let (rows, cols) = x.dim();
    let row_factor = fam.alpha.pow(depth as u32);
    let col_factor = fam.beta.pow(depth as u32);
    if rows % row_factor != 0 || cols % col_factor != 0 || rows == 0 || cols == 0 {
        return Err(Error::Indivisible {
            rows,
            cols,
            row_factor,
            col_factor,
        });
    }
    let matrix = fam.matrix();
    let mut approx = x.to_owned();
    let mut levels = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut bands = split_level(approx.view(), &matrix, fam.alpha, fam.beta);
        approx = bands.remove(0);
        levels.push(group_bands(bands, fam));
    }
    Ok(SubbandTree {
        alpha: fam.alpha,
        beta: fam.beta,
        shape: (rows, cols),
        levels,
        approx,
    })
}

/// Inverse of [`analyze`].
pub fn synthesize(tree: &SubbandTree, fam: &HaarFamily) -> Result<Array2<f64>> {
    if tree.alpha != fam.alpha || tree.beta != fam.beta {
        return Err(Error::ShapeMismatch(format!(
            "tree built for ({}, {}) but family is ({}, {})",
            tree.alpha, tree.beta, fam.alpha, fam.beta
        )));
    }
    let matrix = fam.matrix();
    let mut approx = tree.approx.clone();
    for (depth, level) in tree.levels.iter().enumerate().rev() {
        let counts = (fam.alpha - 1, fam.beta - 1, (fam.alpha - 1) * (fam.beta - 1));
        if (level.detail_a.len(), level.detail_b.len(), level.wavelet.len()) != counts {
            return Err(Error::ShapeMismatch(format!("level {depth} has the wrong number of bands")));
        }
        if level.bands().any(|b| b.dim() != approx.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "level {depth} bands do not match approximation shape {:?}",
                approx.dim()
            )));
        }
        let mut bands = vec![approx.view()];
        bands.extend(level.bands().map(|b| b.view()));
        approx = merge_level(&bands, &matrix, fam.alpha, fam.beta);
    }
    if approx.dim() != tree.shape {
        return Err(Error::ShapeMismatch(format!(
            "reconstructed shape {:?} differs from recorded {:?}",
            approx.dim(),
            tree.shape
        )));
    }
    Ok(approx)
}

fn group_bands(mut bands: Vec<Array2<f64>>, fam: &HaarFamily) -> Level {
    let wavelet = bands.split_off(fam.alpha + fam.beta - 2);
    let detail_b = bands.split_off(fam.alpha - 1);
    Level {
        detail_a: bands,
        detail_b,
        wavelet,
    }
}

fn split_level(x: ArrayView2<f64>, matrix: &Array2<f64>, alpha: usize, beta: usize) -> Vec<Array2<f64>> {
    let (rows, cols) = x.dim();
    let (m, n) = (rows / alpha, cols / beta);
    let t = alpha * beta;
    // one output row of blocks per task: [band][q]
    let block_rows = par::map_range(m, |p| {
        let mut out = vec![vec![0.0; n]; t];
        let mut v = vec![0.0; t];
        for q in 0..n {
            for i in 0..alpha {
                for j in 0..beta {
                    v[i * beta + j] = x[(p * alpha + i, q * beta + j)];
                }
            }
            for (r, band) in out.iter_mut().enumerate() {
                band[q] = (0..t).map(|c| matrix[(r, c)] * v[c]).sum();
            }
        }
        out
    });
    (0..t)
        .map(|r| Array2::from_shape_fn((m, n), |(p, q)| block_rows[p][r][q]))
        .collect()
}

fn merge_level(bands: &[ArrayView2<f64>], matrix: &Array2<f64>, alpha: usize, beta: usize) -> Array2<f64> {
    let (m, n) = bands[0].dim();
    let t = alpha * beta;
    let strips = par::map_range(m, |p| {
        let mut strip = vec![0.0; alpha * n * beta];
        let mut w = vec![0.0; t];
        for q in 0..n {
            for (r, band) in bands.iter().enumerate() {
                w[r] = band[(p, q)];
            }
            for i in 0..alpha {
                for j in 0..beta {
                    let c = i * beta + j;
                    strip[i * n * beta + q * beta + j] = (0..t).map(|r| matrix[(r, c)] * w[r]).sum();
                }
            }
        }
        strip
    });
    Array2::from_shape_fn((m * alpha, n * beta), |(r, c)| {
        strips[r / alpha][(r % alpha) * n * beta + c]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{haar_family, latin_square_family};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_array(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn constant_input_has_no_detail() {
        let fam = latin_square_family();
        let x = Array2::from_elem((27, 27), 2.5);
        let tree = analyze(x.view(), &fam, 2).unwrap();
        for band in tree.levels.iter().flat_map(|l| l.bands()) {
            assert!(max_abs(band) < 1e-12);
        }
        assert_eq!(tree.approx.dim(), (3, 3));
        let expected = 2.5 * 9f64.powi(2).sqrt();
        assert!(tree.approx.iter().all(|v| (v - expected).abs() < 1e-12));
    }

    #[test]
    fn single_tile_hits_one_band() {
        let fam = latin_square_family();
        let mut x = Array2::zeros((9, 9));
        let g = &fam.wavelets[3];
        for i in 0..3 {
            for j in 0..3 {
                x[(3 + i, 6 + j)] = g[(i, j)];
            }
        }
        let tree = analyze(x.view(), &fam, 1).unwrap();
        let level = &tree.levels[0];
        for (b, band) in level.wavelet.iter().enumerate() {
            for ((p, q), v) in band.indexed_iter() {
                let expected = if b == 3 && (p, q) == (1, 2) { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
        for band in level.detail_a.iter().chain(&level.detail_b) {
            assert!(max_abs(band) < 1e-12);
        }
        assert!(max_abs(&tree.approx) < 1e-12);
    }

    #[test]
    fn round_trip_triadic_depth3() {
        let fam = latin_square_family();
        let x = random_array(27, 27, 11);
        let tree = analyze(x.view(), &fam, 3).unwrap();
        assert_eq!(tree.coefficient_count(), 27 * 27);
        let y = synthesize(&tree, &fam).unwrap();
        assert!(max_abs(&(&y - &x)) <= 1e-10 * max_abs(&x));
    }

    #[test]
    fn zero_tree_with_constant_approx() {
        let fam = haar_family(2, 3).unwrap();
        let x = Array2::from_elem((4, 9), 1.0);
        let mut tree = analyze(x.view(), &fam, 2).unwrap();
        tree.approx.fill(6.0);
        let y = synthesize(&tree, &fam).unwrap();
        assert!(y.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn indivisible_shape() {
        let fam = latin_square_family();
        let x = Array2::zeros((27, 26));
        let err = analyze(x.view(), &fam, 1).unwrap_err();
        assert!(matches!(err, Error::Indivisible { col_factor: 3, .. }));
    }

    #[test]
    fn threshold_removes_exact_energy() {
        let fam = latin_square_family();
        let x = random_array(27, 27, 3);
        let mut tree = analyze(x.view(), &fam, 2).unwrap();
        let stats = tree.threshold(0.4);
        assert!(stats.retained < stats.detail_total);
        let y = synthesize(&tree, &fam).unwrap();
        let err: f64 = (&y - &x).iter().map(|v| v * v).sum();
        assert!((err - stats.removed_energy).abs() <= 1e-9 * stats.removed_energy);
    }

    #[test]
    fn synthesize_rejects_mismatched_family() {
        let tree = analyze(random_array(9, 9, 0).view(), &latin_square_family(), 1).unwrap();
        assert!(synthesize(&tree, &haar_family(3, 2).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_energy(alpha in 2u32..5, beta in 2u32..5, depth in 0usize..3, m in 1usize..3, n in 1usize..3, seed in any::<u64>()) {
            let fam = haar_family(alpha, beta).unwrap();
            let rows = m * (alpha as usize).pow(depth as u32);
            let cols = n * (beta as usize).pow(depth as u32);
            let x = random_array(rows, cols, seed);
            let tree = analyze(x.view(), &fam, depth).unwrap();
            let ex: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!((tree.energy() - ex).abs() <= 1e-10 * ex);
            let y = synthesize(&tree, &fam).unwrap();
            prop_assert!(max_abs(&(&y - &x)) <= 1e-10 * max_abs(&x));
        }

        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
            let fam = latin_square_family();
            let x = random_array(9, 9, seed);
            let y = random_array(9, 9, seed.wrapping_add(1));
            let combo = &x * a + &y * b;
            let tx = analyze(x.view(), &fam, 2).unwrap();
            let ty = analyze(y.view(), &fam, 2).unwrap();
            let tc = analyze(combo.view(), &fam, 2).unwrap();
            let expected = &tx.approx * a + &ty.approx * b;
            prop_assert!(max_abs(&(&tc.approx - &expected)) < 1e-12);
            for l in 0..2 {
                let bands: Vec<_> = tc.levels[l].bands().zip(tx.levels[l].bands().zip(ty.levels[l].bands())).collect();
                for (c, (bx, by)) in bands {
                    prop_assert!(max_abs(&(c - &(bx * a + by * b))) < 1e-12);
                }
            }
        }
    }
}
