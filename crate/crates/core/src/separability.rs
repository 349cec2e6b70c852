//! Separability checks: the intertwining identity as a constraint on
//! polynomial filter pairs, and an outer-product detector for sampled
//! scaling functions.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::intertwine_residual;
use crate::par;
use crate::trigpoly::TrigPoly2;

/// Minimal rectangle `[l1, m1] × [l2, m2]` of exponents carrying nonzero
/// coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupportBox {
    pub l1: i64,
    pub m1: i64,
    pub l2: i64,
    pub m2: i64,
}

impl SupportBox {
    pub fn of(p: &TrigPoly2) -> Result<Self> {
        let mut it = p.terms().map(|(k, _)| k);
        let (j, k) = it.next().ok_or(Error::ZeroPolynomial)?;
        let mut b = SupportBox { l1: j, m1: j, l2: k, m2: k };
        for (j, k) in it {
            b.l1 = b.l1.min(j);
            b.m1 = b.m1.max(j);
            b.l2 = b.l2.min(k);
            b.m2 = b.m2.max(k);
        }
        Ok(b)
    }
}

/// Whether `p` depends only on `ξ_{axis+1}` (`axis` 0 for `ξ₁`, 1 for `ξ₂`).
pub fn is_univariate(p: &TrigPoly2, axis: usize) -> Result<bool> {
    let b = SupportBox::of(p)?;
    Ok(match axis {
        0 => b.l2 == 0 && b.m2 == 0,
        1 => b.l1 == 0 && b.m1 == 0,
        _ => panic!("axis must be 0 or 1"),
    })
}

#[derive(Clone, Debug)]
pub struct Lemma61Verdict {
    /// The residual vanishes identically.
    pub holds: bool,
    pub residual: TrigPoly2,
    /// `a` depends on `ξ₁` only and `b` on `ξ₂` only. Meaningful when
    /// `holds`; `false` there is a counterexample.
    pub conclusion_verified: bool,
}

/// Residual `a(ξ₁, βξ₂) b(ξ) − a(ξ) b(αξ₁, ξ₂)` and, when it vanishes, whether
/// the pair is univariate as the identity forces.
pub fn check_lemma61(a: &TrigPoly2, b: &TrigPoly2, alpha: u32, beta: u32) -> Lemma61Verdict {
    let residual = intertwine_residual(a, b, alpha, beta);
    let holds = residual.is_empty();
    let conclusion_verified = !a.depends_on(1) && !b.depends_on(0);
    Lemma61Verdict {
        holds,
        residual,
        conclusion_verified,
    }
}

/// Outcome of an outer-product test on sampled values.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Certificate {
    pub separable: bool,
    pub score: f64,
}

pub const SEPARABLE_THRESHOLD: f64 = 1e-10;

const MAX_LINES: usize = 64;

fn distinct_rows(m: ArrayView2<f64>) -> Vec<usize> {
    let mut seen: Vec<Vec<u64>> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in m.rows().into_iter().enumerate() {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        if !seen.contains(&key) {
            seen.push(key);
            keep.push(i);
        }
    }
    keep
}

fn thin(idx: Vec<usize>) -> Vec<usize> {
    if idx.len() <= MAX_LINES {
        return idx;
    }
    (0..MAX_LINES).map(|k| idx[k * idx.len() / MAX_LINES]).collect()
}

/// Largest `|m_ik m_jl − m_il m_jk|` divided by the squared largest entry,
/// over distinct rows and columns (evenly thinned to at most 64 of each).
/// Zero exactly when the samples form an outer product.
pub fn minor_score(m: ArrayView2<f64>) -> f64 {
    let peak = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let rows = thin(distinct_rows(m));
    let cols = thin(distinct_rows(m.t()));
    let sub = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| m[(rows[i], cols[j])]);
    let worst = par::map_range(sub.nrows(), |i| {
        let mut w = 0.0f64;
        for j in i + 1..sub.nrows() {
            for k in 0..sub.ncols() {
                for l in k + 1..sub.ncols() {
                    let d = sub[(i, k)] * sub[(j, l)] - sub[(i, l)] * sub[(j, k)];
                    w = w.max(d.abs());
                }
            }
        }
        w
    });
    worst.into_iter().fold(0.0, f64::max) / (peak * peak)
}

pub fn separability_certificate(samples: ArrayView2<f64>) -> Certificate {
    let score = minor_score(samples);
    Certificate {
        separable: score <= SEPARABLE_THRESHOLD,
        score,
    }
}

/// Which generator produced a fuzzing trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    /// Independent sparse pairs on `[−3, 3]²`.
    Sparse,
    /// Univariate `a(ξ₁)`, `b(ξ₂)`.
    Separable,
    /// Univariate pairs multiplied by a common factor in both variables.
    SharedFactor,
    /// Univariate pairs with a single extra mixed monomial.
    Perturbed,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub a: TrigPoly2,
    pub b: TrigPoly2,
    pub alpha: u32,
    pub beta: u32,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub zero_residual: usize,
    pub exhaustive_pairs: usize,
    pub exhaustive_zero_residual: usize,
    #[serde(skip)]
    pub counterexamples: Vec<Counterexample>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-3..=3);
    }
    Complex64::new(v as f64, 0.0)
}

fn sparse(rng: &mut ChaCha8Rng, radius: i64, mixed: bool) -> TrigPoly2 {
    loop {
        let count = rng.gen_range(1..=4);
        let p = TrigPoly2::from_terms((0..count).map(|_| {
            let j = rng.gen_range(-radius..=radius);
            let k = if mixed { rng.gen_range(-radius..=radius) } else { 0 };
            ((j, k), random_coeff(rng))
        }));
        if !p.is_empty() {
            return p;
        }
    }
}

fn swap_axes(p: &TrigPoly2) -> TrigPoly2 {
    TrigPoly2::from_terms(p.terms().map(|((j, k), c)| ((k, j), c)))
}

fn trial(seed: u64, index: usize) -> (TrialKind, TrigPoly2, TrigPoly2, u32, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let alpha = rng.gen_range(2..=4);
    let beta = rng.gen_range(2..=4);
    let kind = match index % 4 {
        0 => TrialKind::Sparse,
        1 => TrialKind::Separable,
        2 => TrialKind::SharedFactor,
        _ => TrialKind::Perturbed,
    };
    let u = sparse(&mut rng, 1, false);
    let v = swap_axes(&sparse(&mut rng, 1, false));
    let (a, b) = match kind {
        TrialKind::Sparse => (sparse(&mut rng, 3, true), sparse(&mut rng, 3, true)),
        TrialKind::Separable => (u, v),
        TrialKind::SharedFactor => {
            let g = sparse(&mut rng, 1, true);
            (&u * &g, &v * &g)
        }
        TrialKind::Perturbed => {
            let j = rng.gen_range(-2..=2);
            let k = if rng.gen_bool(0.5) { 1 } else { -1 };
            let extra = TrigPoly2::monomial(j, k, random_coeff(&mut rng));
            if rng.gen_bool(0.5) {
                (&u + &extra, v)
            } else {
                (u, &v + &swap_axes(&extra))
            }
        }
    };
    (kind, a, b, alpha, beta)
}

/// All nonzero polynomials with `{0, 1}` coefficients on exponents `[0, 1]²`.
fn binary_polys() -> Vec<TrigPoly2> {
    let keys = [(0, 0), (0, 1), (1, 0), (1, 1)];
    (1u32..16)
        .map(|mask| {
            TrigPoly2::from_terms(
                keys.iter()
                    .enumerate()
                    .filter(|(bit, _)| mask & (1 << bit) != 0)
                    .map(|(_, &key)| (key, Complex64::new(1.0, 0.0))),
            )
        })
        .collect()
}

/// Seeded randomized search for pairs satisfying the intertwining identity
/// without being univariate, plus an exhaustive pass over small binary
/// supports. Any hit is recorded as a counterexample.
pub fn fuzz_intertwining(seed: u64, trials: usize) -> FuzzReport {
    let results = par::map_range(trials, |i| {
        let (_, a, b, alpha, beta) = trial(seed, i);
        let v = check_lemma61(&a, &b, alpha, beta);
        let bad = (v.holds && !v.conclusion_verified).then_some(Counterexample { a, b, alpha, beta });
        (v.holds, bad)
    });
    let mut report = FuzzReport {
        trials,
        ..Default::default()
    };
    for (holds, bad) in results {
        report.zero_residual += holds as usize;
        report.counterexamples.extend(bad);
    }

    let polys = binary_polys();
    for (alpha, beta) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        for a in &polys {
            for b in &polys {
                report.exhaustive_pairs += 1;
                let v = check_lemma61(a, b, alpha, beta);
                if v.holds {
                    report.exhaustive_zero_residual += 1;
                    if !v.conclusion_verified {
                        report.counterexamples.push(Counterexample {
                            a: a.clone(),
                            b: b.clone(),
                            alpha,
                            beta,
                        });
                    }
                }
            }
        }
    }
    report
}
