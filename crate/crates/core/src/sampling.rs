//! Fock-basis enumeration, exact output distributions, inverse-CDF sampling,
//! and distribution distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RngSeed, UnitaryMatrix};
use crate::permanent::{permanent_dense, transition_probability, transition_submatrix, FockState};

/// Guard on the Fock basis size C(N+M-1, N).
pub const ENUMERATION_GUARD: usize = 1_000_000;

/// Tolerance on |sum p - 1| for a normalized distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Negative probabilities above this magnitude are rejected; smaller ones are
/// clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Probability distribution over the full N-particle, M-mode Fock basis in
/// the global (descending lexicographic) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    modes: usize,
    total: usize,
    basis: Vec<FockState>,
    probabilities: Vec<f64>,
}

impl FockDistribution {
    /// Validate and clamp a probability vector over the canonical basis.
    pub fn new(modes: usize, total: usize, probabilities: Vec<f64>) -> Result<Self> {
        let basis = enumerate_fock(modes, total)?;
        if probabilities.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                left: probabilities.len(),
                right: basis.len(),
            });
        }
        let mut clamped = probabilities;
        for p in &mut clamped {
            if *p < -CLAMP_TOL || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} is not in [0, 1]"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            modes,
            total,
            basis,
            probabilities: clamped,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn basis(&self) -> &[FockState] {
        &self.basis
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn probability_of(&self, state: &FockState) -> Option<f64> {
        self.basis
            .iter()
            .position(|s| s == state)
            .map(|i| self.probabilities[i])
    }

    fn same_basis(&self, other: &Self) -> bool {
        self.modes == other.modes && self.total == other.total
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All compositions of N particles into M modes, descending lexicographic:
/// (N, 0, ..., 0) first, (0, ..., 0, N) last.
pub fn enumerate_fock(modes: usize, total: usize) -> Result<Vec<FockState>> {
    if modes == 0 {
        return Err(Error::InvalidParameter("at least one mode required".into()));
    }
    let size = binomial(total + modes - 1, total);
    if size > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuardExceeded {
            size,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut out = Vec::with_capacity(size);
    let mut current = vec![0usize; modes];
    fn go(current: &mut Vec<usize>, mode: usize, remaining: usize, out: &mut Vec<FockState>) {
        if mode == current.len() - 1 {
            current[mode] = remaining;
            out.push(FockState::new(current.clone()));
            return;
        }
        for n in (0..=remaining).rev() {
            current[mode] = n;
            go(current, mode + 1, remaining - n, out);
        }
    }
    go(&mut current, 0, total, &mut out);
    Ok(out)
}

/// Exact output distribution of `n_in` scattered by the unitary `Lambda`.
pub fn exact_distribution(lambda: &UnitaryMatrix, n_in: &FockState) -> Result<FockDistribution> {
    let modes = lambda.dim();
    let total = n_in.total();
    let basis = enumerate_fock(modes, total)?;
    let mut probabilities = Vec::with_capacity(basis.len());
    for n_out in &basis {
        probabilities.push(transition_probability(lambda, n_in, n_out)?);
    }
    FockDistribution::new(modes, total, probabilities)
}

/// Renormalized permanent-weight distribution of a general (sub-unitary)
/// transition matrix, e.g. a banded truncation. Returns the distribution and
/// the pre-normalization mass deficit `1 - sum of raw weights`.
pub fn distribution_from_matrix(
    lambda: &ComplexMatrix,
    n_in: &FockState,
) -> Result<(FockDistribution, f64)> {
    if !lambda.is_square() {
        return Err(Error::NotSquare {
            rows: lambda.rows(),
            cols: lambda.cols(),
        });
    }
    let modes = lambda.rows();
    let total = n_in.total();
    let basis = enumerate_fock(modes, total)?;
    let mut weights = Vec::with_capacity(basis.len());
    for n_out in &basis {
        let sub = transition_submatrix(lambda, n_in, n_out)?;
        let perm = permanent_dense(&sub)?;
        let mut denom = 1.0;
        for &n in n_in.occupations().iter().chain(n_out.occupations()) {
            denom *= (1..=n).map(|k| k as f64).product::<f64>();
        }
        weights.push(perm.value.norm_sqr() / denom);
    }
    let mass: f64 = weights.iter().sum();
    if mass <= 0.0 {
        return Err(Error::InvalidParameter(
            "transition matrix carries no weight to any output state".into(),
        ));
    }
    for w in &mut weights {
        *w /= mass;
    }
    Ok((
        FockDistribution::new(modes, total, weights)?,
        1.0 - mass,
    ))
}

/// `k` i.i.d. draws by inverse-CDF, deterministic for a given seed.
pub fn sample(dist: &FockDistribution, k: usize, seed: RngSeed) -> Vec<FockState> {
    use rand::Rng;
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = seed.rng();
    (0..k)
        .map(|_| {
            let u: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c < u).min(dist.len() - 1);
            dist.basis()[idx].clone()
        })
        .collect()
}

/// Total variation distance `(1/2) sum |P - Q|`.
pub fn total_variation(p: &FockDistribution, q: &FockDistribution) -> Result<f64> {
    if !p.same_basis(q) {
        return Err(Error::BasisMismatch);
    }
    Ok(p.probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0)
}

/// Worst-case relative error of Q against P over resolvable events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeGap {
    /// `max |P(X) - Q(X)| / P(X)` over events with `P(X) > delta_floor`.
    pub gap: f64,
    /// Events excluded because `P(X) <= delta_floor`.
    pub skipped: usize,
    pub delta_floor: f64,
}

pub const DELTA_FLOOR: f64 = 1e-12;

/// Multiplicative-approximation diagnostic of Q against reference P.
pub fn multiplicative_gap(p: &FockDistribution, q: &FockDistribution) -> Result<MultiplicativeGap> {
    if !p.same_basis(q) {
        return Err(Error::BasisMismatch);
    }
    let mut gap: f64 = 0.0;
    let mut skipped = 0usize;
    for (&a, &b) in p.probabilities().iter().zip(q.probabilities()) {
        if a <= DELTA_FLOOR {
            skipped += 1;
        } else {
            gap = gap.max((a - b).abs() / a);
        }
    }
    Ok(MultiplicativeGap {
        gap,
        skipped,
        delta_floor: DELTA_FLOOR,
    })
}
