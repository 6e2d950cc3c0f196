//! Matrix permanents: dense Ryser/Glynn oracle, banded dynamic programming,
//! cyclically banded DP, transfer-operator power for circulant bands, and the
//! Fock-transition submatrix construction.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryMatrix, C64};

/// Cost guard for the dense Ryser permanent (`O(2^N N)`).
pub const DENSE_GUARD: usize = 24;
/// Band guard for the subset DP (`O(N 2^{2B})` state space).
pub const BAND_GUARD: usize = 14;
/// Band guard for the transfer-operator power (`(2^B)^3` per multiply).
pub const TRANSFER_GUARD: usize = 8;

/// Occupation-number vector `(n_1, ..., n_M)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockState {
    occupations: Vec<usize>,
}

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        assert!(!occupations.is_empty(), "at least one mode required");
        Self { occupations }
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    /// Total particle number N.
    pub fn total(&self) -> usize {
        self.occupations.iter().sum()
    }

    /// `"n1|n2|...|nM"`, the CSV state label.
    pub fn label(&self) -> String {
        self.occupations
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Which algorithm produced a permanent value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermanentMethod {
    Ryser,
    BandedDp,
    CyclicDp,
    TransferPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermanentResult {
    pub value: C64,
    pub method: PermanentMethod,
    /// Complex multiplications performed; the scaling observable.
    pub cost_estimate: u64,
}

/// Banded storage: diagonals with offsets `i - j` in `[-upper, lower]`.
/// Entries outside the (cyclic) band are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    lower: usize,
    upper: usize,
    cyclic: bool,
    /// `diagonals[k]` holds offset `o = k - upper`; entry at column `j` is
    /// `A[(j + o) mod dim, j]` (cyclic) or `A[j + o, j]` where in range.
    diagonals: Vec<Vec<C64>>,
}

impl BandedMatrix {
    /// Build from per-column diagonal values. `diagonals[k][j]` is the entry
    /// in column `j` on offset `k - upper`.
    pub fn from_diagonals(
        dim: usize,
        lower: usize,
        upper: usize,
        cyclic: bool,
        diagonals: Vec<Vec<C64>>,
    ) -> Result<Self> {
        if diagonals.len() != lower + upper + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} diagonals, got {}",
                lower + upper + 1,
                diagonals.len()
            )));
        }
        if diagonals.iter().any(|d| d.len() != dim) {
            return Err(Error::InvalidParameter(
                "each stored diagonal must have length dim".into(),
            ));
        }
        if lower + upper > dim {
            return Err(Error::InvalidParameter(format!(
                "band {} exceeds dimension {dim}",
                lower + upper
            )));
        }
        Ok(Self {
            dim,
            lower,
            upper,
            cyclic,
            diagonals,
        })
    }

    /// Detect the band structure of a dense square matrix. With `cyclic` the
    /// minimal wrap-around half-widths are found; otherwise plain `i - j`
    /// offsets are used.
    pub fn from_dense(m: &ComplexMatrix, cyclic: bool) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let (lower, upper) = if cyclic {
            let mut present = vec![false; n];
            for i in 0..n {
                for j in 0..n {
                    if m.get(i, j) != Complex::new(0.0, 0.0) {
                        present[(i + n - j) % n] = true;
                    }
                }
            }
            minimal_cyclic_halfwidths(&present, n)
        } else {
            let mut lo = 0usize;
            let mut hi = 0usize;
            for i in 0..n {
                for j in 0..n {
                    if m.get(i, j) != Complex::new(0.0, 0.0) {
                        if i >= j {
                            lo = lo.max(i - j);
                        } else {
                            hi = hi.max(j - i);
                        }
                    }
                }
            }
            (lo, hi)
        };
        let mut diagonals = vec![vec![Complex::new(0.0, 0.0); n]; lower + upper + 1];
        for (k, diag) in diagonals.iter_mut().enumerate() {
            let o = k as isize - upper as isize;
            for (j, slot) in diag.iter_mut().enumerate() {
                let i = j as isize + o;
                if cyclic {
                    *slot = m.get(i.rem_euclid(n as isize) as usize, j);
                } else if i >= 0 && (i as usize) < n {
                    *slot = m.get(i as usize, j);
                }
            }
        }
        Self::from_diagonals(n, lower, upper, cyclic, diagonals)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    /// Total band `B = lower + upper`.
    pub fn band(&self) -> usize {
        self.lower + self.upper
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let n = self.dim as isize;
        let diff = i as isize - j as isize;
        let offset = if self.cyclic {
            let om = diff.rem_euclid(n);
            if om <= self.lower as isize {
                om
            } else if n - om <= self.upper as isize {
                om - n
            } else {
                return Complex::new(0.0, 0.0);
            }
        } else {
            if diff > self.lower as isize || -diff > self.upper as isize {
                return Complex::new(0.0, 0.0);
            }
            diff
        };
        self.diagonals[(offset + self.upper as isize) as usize][j]
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// True when every stored diagonal is constant along its (cyclic) length,
    /// i.e. the matrix is a banded circulant.
    pub fn is_circulant(&self) -> bool {
        if !self.cyclic {
            return false;
        }
        self.diagonals
            .iter()
            .all(|d| d.iter().all(|&v| v == d[0]))
    }
}

/// Minimal `(lower, upper)` cyclic half-widths covering all offsets marked in
/// `present` (indexed by `(i - j) mod n`), minimizing `lower + upper`.
pub(crate) fn minimal_cyclic_halfwidths(present: &[bool], n: usize) -> (usize, usize) {
    // Offset 0 (the main diagonal) is covered by lower >= 0 unconditionally.
    let offsets: Vec<usize> = (1..n).filter(|&d| present[d]).collect();
    if offsets.is_empty() {
        return (0, 0);
    }
    // Each offset d is covered either as a subdiagonal (lower >= d) or as a
    // wrapped superdiagonal (upper >= n - d). Scan all split points.
    let mut best = (n, 0usize, 0usize);
    for split in 0..=offsets.len() {
        let lower = if split == 0 { 0 } else { offsets[split - 1] };
        let upper = if split == offsets.len() {
            0
        } else {
            n - offsets[split]
        };
        if lower + upper < best.0 {
            best = (lower + upper, lower, upper);
        }
    }
    (best.1, best.2)
}

/// Exact permanent of a dense square matrix by Ryser's formula with Gray-code
/// row-sum updates and compensated summation. The reference oracle.
pub fn permanent_dense(a: &ComplexMatrix) -> Result<PermanentResult> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > DENSE_GUARD {
        return Err(Error::DenseGuardExceeded {
            n,
            guard: DENSE_GUARD,
        });
    }
    if n == 0 {
        return Ok(PermanentResult {
            value: Complex::new(1.0, 0.0),
            method: PermanentMethod::Ryser,
            cost_estimate: 0,
        });
    }

    let mut row_sums = vec![Complex::new(0.0, 0.0); n];
    let mut sum = Complex::new(0.0, 0.0);
    let mut comp = Complex::new(0.0, 0.0); // Kahan compensation
    let mut popcount: u32 = 0;
    let mut cost: u64 = 0;

    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        if gray & (1 << bit) != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += a.get(i, bit);
            }
            popcount += 1;
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= a.get(i, bit);
            }
            popcount -= 1;
        }
        let mut prod = Complex::new(1.0, 0.0);
        for rs in &row_sums {
            prod *= rs;
        }
        cost += n as u64;
        let signed = if (n as u32 - popcount) % 2 == 1 {
            -prod
        } else {
            prod
        };
        // Kahan step, componentwise through complex arithmetic.
        let y = signed - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    Ok(PermanentResult {
        value: sum,
        method: PermanentMethod::Ryser,
        cost_estimate: cost,
    })
}

/// One column step of the banded subset DP. Masks cover the `b` window rows
/// `j - upper .. j + lower - 1` (bit `p` = row `j - upper + p` used); the
/// entering row `j + lower` joins at bit `b`, the exiting row `j - upper`
/// must be used before the window slides.
fn dp_step(
    a: &BandedMatrix,
    dp: &[C64],
    j: usize,
    b: usize,
    cost: &mut u64,
) -> Vec<C64> {
    let n = a.dim() as isize;
    let upper = a.upper() as isize;
    let mut next = vec![Complex::new(0.0, 0.0); 1 << b];
    let enter_row = j as isize + a.lower() as isize;
    let enter_out = !a.is_cyclic() && enter_row >= n;
    for (mask, &w) in dp.iter().enumerate() {
        if w == Complex::new(0.0, 0.0) {
            continue;
        }
        let ext = if enter_out { mask | (1 << b) } else { mask };
        for p in 0..=b {
            if ext & (1 << p) != 0 {
                continue;
            }
            let row = j as isize - upper + p as isize;
            let row = if a.is_cyclic() {
                row.rem_euclid(n) as usize
            } else {
                if row < 0 || row >= n {
                    continue;
                }
                row as usize
            };
            let aij = a.get(row, j);
            if aij == Complex::new(0.0, 0.0) {
                continue;
            }
            let nm = ext | (1 << p);
            if nm & 1 == 0 {
                continue; // exiting row left unused
            }
            next[nm >> 1] += w * aij;
            *cost += 1;
        }
    }
    next
}

/// Exact permanent of a banded matrix by a column-sweep subset DP over the
/// sliding window of open rows; the cyclic wrap is closed by conditioning on
/// the boundary subset. `O(N 2^{2B})`.
pub fn permanent_banded(a: &BandedMatrix) -> Result<PermanentResult> {
    let b = a.band();
    if b > BAND_GUARD {
        return Err(Error::BandGuardExceeded {
            band: b,
            guard: BAND_GUARD,
        });
    }
    let n = a.dim();
    let mut cost: u64 = 0;

    if a.is_cyclic() {
        if n < b + 2 {
            return Err(Error::InvalidParameter(format!(
                "cyclic banded DP needs dimension > B + 1 (N = {n}, B = {b}); use the dense oracle"
            )));
        }
        // Boundary conditioning: bit p of the seed mask promises window row
        // (p - upper) mod N to a wrapped column; the sweep must return to the
        // same mask.
        let mut total = Complex::new(0.0, 0.0);
        for seed in 0..(1usize << b) {
            let mut dp = vec![Complex::new(0.0, 0.0); 1 << b];
            dp[seed] = Complex::new(1.0, 0.0);
            for j in 0..n {
                dp = dp_step(a, &dp, j, b, &mut cost);
            }
            total += dp[seed];
        }
        Ok(PermanentResult {
            value: total,
            method: PermanentMethod::CyclicDp,
            cost_estimate: cost,
        })
    } else {
        let mut dp = vec![Complex::new(0.0, 0.0); 1 << b];
        // Window rows below zero are unavailable from the start.
        let mut init = 0usize;
        for p in 0..b {
            let row = p as isize - a.upper() as isize;
            if row < 0 || row >= n as isize {
                init |= 1 << p;
            }
        }
        dp[init] = Complex::new(1.0, 0.0);
        for j in 0..n {
            dp = dp_step(a, &dp, j, b, &mut cost);
        }
        Ok(PermanentResult {
            value: dp[(1 << b) - 1],
            method: PermanentMethod::BandedDp,
            cost_estimate: cost,
        })
    }
}

/// Permanent of a cyclically banded *circulant* matrix via the N-th power of
/// the column transfer operator, computed by repeated squaring:
/// `Perm = Tr(T^N)`, `O(log N)` matrix products.
pub fn permanent_circulant_banded(a: &BandedMatrix) -> Result<PermanentResult> {
    if !a.is_circulant() {
        return Err(Error::NotCirculant);
    }
    let b = a.band();
    if b > TRANSFER_GUARD {
        return Err(Error::BandGuardExceeded {
            band: b,
            guard: TRANSFER_GUARD,
        });
    }
    let n = a.dim();
    if n < b + 2 {
        return Err(Error::InvalidParameter(format!(
            "transfer-power method needs dimension > B + 1 (N = {n}, B = {b})"
        )));
    }
    let states = 1usize << b;
    // Column 0 is representative: the transfer operator is column independent.
    let mut transfer = vec![vec![Complex::new(0.0, 0.0); states]; states];
    let mut cost: u64 = 0;
    for mask in 0..states {
        let mut dp = vec![Complex::new(0.0, 0.0); states];
        dp[mask] = Complex::new(1.0, 0.0);
        let next = dp_step(a, &dp, 0, b, &mut cost);
        for (to, &w) in next.iter().enumerate() {
            transfer[to][mask] = w;
        }
    }

    // result = T^n by binary exponentiation.
    let mul = |x: &Vec<Vec<C64>>, y: &Vec<Vec<C64>>, cost: &mut u64| -> Vec<Vec<C64>> {
        let s = x.len();
        let mut out = vec![vec![Complex::new(0.0, 0.0); s]; s];
        for i in 0..s {
            for k in 0..s {
                let xik = x[i][k];
                if xik == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..s {
                    out[i][j] += xik * y[k][j];
                    *cost += 1;
                }
            }
        }
        out
    };
    let mut result: Option<Vec<Vec<C64>>> = None;
    let mut base = transfer;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mul(&r, &base, &mut cost),
            });
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base, &mut cost);
        }
    }
    let result = result.expect("n >= 1");
    let value = (0..states).map(|s| result[s][s]).sum();
    Ok(PermanentResult {
        value,
        method: PermanentMethod::TransferPower,
        cost_estimate: cost,
    })
}

/// Submatrix for a Fock transition: column `l` of `Lambda` repeated
/// `n_in[l]` times, row `l'` repeated `n_out[l']` times.
pub fn transition_submatrix(
    lambda: &ComplexMatrix,
    n_in: &FockState,
    n_out: &FockState,
) -> Result<ComplexMatrix> {
    if !lambda.is_square() {
        return Err(Error::NotSquare {
            rows: lambda.rows(),
            cols: lambda.cols(),
        });
    }
    let m = lambda.rows();
    if n_in.modes() != m || n_out.modes() != m {
        return Err(Error::DimensionMismatch {
            left: n_in.modes().max(n_out.modes()),
            right: m,
        });
    }
    if n_in.total() != n_out.total() {
        return Err(Error::ParticleNumberMismatch {
            input: n_in.total(),
            output: n_out.total(),
        });
    }
    let expand = |occ: &[usize]| -> Vec<usize> {
        let mut idx = Vec::new();
        for (l, &n) in occ.iter().enumerate() {
            idx.extend(std::iter::repeat(l).take(n));
        }
        idx
    };
    let rows = expand(n_out.occupations());
    let cols = expand(n_in.occupations());
    let n = rows.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        lambda.get(rows[i], cols[j])
    }))
}

const FACTORIAL_TABLE_LEN: usize = DENSE_GUARD + 1;

fn factorial(n: usize) -> f64 {
    static TABLE: std::sync::OnceLock<[f64; FACTORIAL_TABLE_LEN]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_TABLE_LEN];
        for i in 1..FACTORIAL_TABLE_LEN {
            t[i] = t[i - 1] * i as f64;
        }
        t
    });
    table[n]
}

/// Fock transition probability
/// `|Perm(Lambda_{n_out|n_in})|^2 / (prod n_in! prod n_out!)`.
pub fn transition_probability(
    lambda: &UnitaryMatrix,
    n_in: &FockState,
    n_out: &FockState,
) -> Result<f64> {
    let sub = transition_submatrix(lambda.matrix(), n_in, n_out)?;
    let perm = permanent_dense(&sub)?;
    let mut denom = 1.0;
    for &n in n_in.occupations().iter().chain(n_out.occupations()) {
        denom *= factorial(n);
    }
    Ok(perm.value.norm_sqr() / denom)
}
