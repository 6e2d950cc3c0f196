//! Single-particle Hamiltonians and propagators for the three lattice
//! families, plus banded truncation of transition matrices.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryMatrix};
use crate::permanent::minimal_cyclic_halfwidths;

/// Uniform nearest-neighbor hopping on a periodic ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRing {
    /// Site count M.
    pub sites: usize,
    /// Hopping rate J (energy, hbar = 1).
    pub hopping: f64,
}

impl UniformRing {
    pub fn new(sites: usize, hopping: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "ring needs at least 2 sites, got {sites}"
            )));
        }
        if hopping <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hopping must be positive, got {hopping}"
            )));
        }
        Ok(Self { sites, hopping })
    }
}

/// Spin-dependent lattice: M sites per sublattice, Hilbert dimension 2M.
/// Basis ordering is all down-spin sites, then all up-spin sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorLatticeModel {
    /// Sites per sublattice M (d = 2M).
    pub sites: usize,
    /// Global microwave Rabi frequency Omega_0 (energy).
    pub rabi: f64,
    /// Lamb-Dicke parameter eta (dimensionless).
    pub lamb_dicke: f64,
    /// Quadratic potential strength V_0 (energy).
    pub quadratic: f64,
}

impl SpinorLatticeModel {
    pub fn new(sites: usize, rabi: f64, lamb_dicke: f64, quadratic: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "spinor lattice needs at least 2 sites, got {sites}"
            )));
        }
        if rabi <= 0.0 {
            return Err(Error::InvalidParameter("rabi must be positive".into()));
        }
        if !(0.0..1.0).contains(&lamb_dicke) || lamb_dicke == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lamb_dicke must lie in (0, 1), got {lamb_dicke}"
            )));
        }
        if quadratic < 0.0 {
            return Err(Error::InvalidParameter(
                "quadratic strength must be nonnegative".into(),
            ));
        }
        Ok(Self {
            sites,
            rabi,
            lamb_dicke,
            quadratic,
        })
    }

    /// Defaults used throughout: eta = 0.4, V_0 = 0.1 Omega_0.
    pub fn with_defaults(sites: usize, rabi: f64) -> Result<Self> {
        Self::new(sites, rabi, 0.4, 0.1 * rabi)
    }

    /// Left-hopping amplitude `Omega_0 exp(-(theta / 2 eta)^2)`.
    pub fn omega_left(&self, theta: f64) -> f64 {
        self.rabi * (-(theta / (2.0 * self.lamb_dicke)).powi(2)).exp()
    }

    /// Right-hopping amplitude `Omega_0 exp(-((theta - pi) / 2 eta)^2)`.
    pub fn omega_right(&self, theta: f64) -> f64 {
        self.rabi * (-((theta - PI) / (2.0 * self.lamb_dicke)).powi(2)).exp()
    }
}

/// Individually addressed 1D lattice with hard-wall boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasMicroscopeModel {
    /// Site count M (d = M).
    pub sites: usize,
    /// Characteristic hopping rate h_0 (energy).
    pub hopping_scale: f64,
    /// Allowed range for bond controls h^x (energy).
    pub hx_bounds: (f64, f64),
    /// Allowed range for site controls h^z (energy).
    pub hz_bounds: (f64, f64),
}

impl GasMicroscopeModel {
    pub fn new(
        sites: usize,
        hopping_scale: f64,
        hx_bounds: (f64, f64),
        hz_bounds: (f64, f64),
    ) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "microscope lattice needs at least 2 sites, got {sites}"
            )));
        }
        if hopping_scale <= 0.0 {
            return Err(Error::InvalidParameter(
                "hopping_scale must be positive".into(),
            ));
        }
        for (name, (lo, hi)) in [("hx", hx_bounds), ("hz", hz_bounds)] {
            if !(lo <= 0.0 && 0.0 <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "{name} bounds ({lo}, {hi}) must contain 0"
                )));
            }
        }
        Ok(Self {
            sites,
            hopping_scale,
            hx_bounds,
            hz_bounds,
        })
    }

    /// Default control range of +/- 10 h_0 per channel.
    pub fn with_defaults(sites: usize, hopping_scale: f64) -> Result<Self> {
        let b = 10.0 * hopping_scale;
        Self::new(sites, hopping_scale, (-b, b), (-b, b))
    }
}

/// Band half-widths and truncation threshold defining `Lambda'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    /// Relative threshold epsilon.
    pub epsilon: f64,
    /// Resulting total band half-width B.
    pub band: usize,
    /// Whether a wrap-around band was retained.
    pub cyclic: bool,
}

/// Norm used for the banding threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandNorm {
    Max,
    Frobenius,
}

/// Ring Hamiltonian `h_{l'l} = -J (delta_{l',l+1} + delta_{l',l-1})`,
/// periodic boundary conditions.
pub fn ring_hamiltonian(model: &UniformRing) -> ComplexMatrix {
    let m = model.sites;
    let j = model.hopping;
    let mut h = ComplexMatrix::zeros(m, m);
    for l in 0..m {
        for neighbor in [(l + 1) % m, (l + m - 1) % m] {
            let v = h.get(neighbor, l) - Complex::new(j, 0.0);
            h.set(neighbor, l, v);
        }
    }
    h
}

/// Ring propagator `e^{-i h t}` computed in the Bloch basis: the first
/// column is a DFT over the band structure and the matrix is circulant in
/// `(l - l') mod M`.
pub fn ring_propagator(model: &UniformRing, t: f64) -> UnitaryMatrix {
    let m = model.sites;
    let j = model.hopping;
    let mut column = Vec::with_capacity(m);
    for offset in 0..m {
        let mut acc = Complex::new(0.0, 0.0);
        for q in 0..m {
            let bloch = 2.0 * PI * q as f64 / m as f64;
            // Eigenvalue of h is -2 J cos(bloch); the propagator phase is
            // e^{+i 2 J t cos(bloch)}.
            let phase = 2.0 * j * t * bloch.cos() - offset as f64 * bloch;
            acc += Complex::new(0.0, phase).exp();
        }
        column.push(acc / m as f64);
    }
    let u = ComplexMatrix::from_fn(m, m, |l, lp| column[(l + m - lp) % m]);
    UnitaryMatrix::try_new(u).expect("Bloch propagator is unitary")
}

/// Zero all entries below `epsilon * ||Lambda||` and report the smallest
/// cyclic band containing the survivors. The truncation is not
/// re-unitarized.
pub fn band_truncate(
    lambda: &ComplexMatrix,
    epsilon: f64,
    norm: BandNorm,
) -> Result<(ComplexMatrix, BandSpec)> {
    if !lambda.is_square() {
        return Err(Error::NotSquare {
            rows: lambda.rows(),
            cols: lambda.cols(),
        });
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    let m = lambda.rows();
    let scale = match norm {
        BandNorm::Max => lambda.max_norm(),
        BandNorm::Frobenius => lambda.frobenius_norm(),
    };
    let threshold = epsilon * scale;
    let mut present = vec![false; m];
    let truncated = ComplexMatrix::from_fn(m, m, |i, j| {
        let v = lambda.get(i, j);
        if v.norm() < threshold {
            Complex::new(0.0, 0.0)
        } else {
            v
        }
    });
    for i in 0..m {
        for j in 0..m {
            if truncated.get(i, j) != Complex::new(0.0, 0.0) {
                present[(i + m - j) % m] = true;
            }
        }
    }
    let (lower, upper) = minimal_cyclic_halfwidths(&present, m);
    Ok((
        truncated,
        BandSpec {
            epsilon,
            band: lower + upper,
            cyclic: upper > 0,
        },
    ))
}

/// The three pieces of the spinor control Hamiltonian `H_0 + H_L + H_R`.
/// Index `l` is the (site `l+1`, down) state and `M + l` the (site `l+1`,
/// up) state; `H_R` couples (l, up) to (l+1, down) with site M+1 wrapped to
/// site 1. This index convention is shared with the controllability module.
pub fn spinor_hamiltonian_parts(
    model: &SpinorLatticeModel,
    theta: f64,
    phi: f64,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let m = model.sites;
    let d = 2 * m;
    let dx_down = (m as f64 + 1.0) / 2.0;
    let dx_up = dx_down + theta / (2.0 * PI);

    let mut h0 = ComplexMatrix::zeros(d, d);
    for l in 0..m {
        let site = (l + 1) as f64;
        h0.set(l, l, Complex::new(model.quadratic * (site - dx_down).powi(2), 0.0));
        h0.set(
            m + l,
            m + l,
            Complex::new(model.quadratic * (site - dx_up).powi(2), 0.0),
        );
    }

    let coupling = |amplitude: f64| Complex::new(0.5 * amplitude, 0.0) * Complex::new(0.0, phi).exp();
    let mut hl = ComplexMatrix::zeros(d, d);
    let om_l = coupling(model.omega_left(theta));
    for l in 0..m {
        hl.set(m + l, l, om_l);
        hl.set(l, m + l, om_l.conj());
    }
    let mut hr = ComplexMatrix::zeros(d, d);
    let om_r = coupling(model.omega_right(theta));
    for l in 0..m {
        let down = (l + 1) % m;
        hr.set(m + l, down, om_r);
        hr.set(down, m + l, om_r.conj());
    }
    (h0, hl, hr)
}

/// Full spinor control Hamiltonian at control angles `(theta, phi)`,
/// wrapped into `[0, 2 pi)`.
pub fn spinor_hamiltonian(model: &SpinorLatticeModel, theta: f64, phi: f64) -> ComplexMatrix {
    let theta = theta.rem_euclid(2.0 * PI);
    let phi = phi.rem_euclid(2.0 * PI);
    let (h0, hl, hr) = spinor_hamiltonian_parts(model, theta, phi);
    h0.add(&hl).add(&hr)
}

/// Gas-microscope Hamiltonian: `hx` on the M-1 bonds, `hz` on the M site
/// diagonals, hard-wall boundary conditions.
pub fn microscope_hamiltonian(
    model: &GasMicroscopeModel,
    hx: &[f64],
    hz: &[f64],
) -> Result<ComplexMatrix> {
    let m = model.sites;
    if hx.len() != m - 1 || hz.len() != m {
        return Err(Error::ChannelMismatch(format!(
            "expected {} bond and {} site controls, got {} and {}",
            m - 1,
            m,
            hx.len(),
            hz.len()
        )));
    }
    for (l, &v) in hx.iter().enumerate() {
        if v < model.hx_bounds.0 || v > model.hx_bounds.1 {
            return Err(Error::ControlOutOfBounds {
                channel: format!("hx_{}", l + 1),
                step: 0,
                value: v,
            });
        }
    }
    for (l, &v) in hz.iter().enumerate() {
        if v < model.hz_bounds.0 || v > model.hz_bounds.1 {
            return Err(Error::ControlOutOfBounds {
                channel: format!("hz_{}", l + 1),
                step: 0,
                value: v,
            });
        }
    }
    let mut h = ComplexMatrix::zeros(m, m);
    for l in 0..m - 1 {
        h.set(l, l + 1, Complex::new(hx[l], 0.0));
        h.set(l + 1, l, Complex::new(hx[l], 0.0));
    }
    for l in 0..m {
        h.set(l, l, Complex::new(hz[l], 0.0));
    }
    Ok(h)
}

/// One of the two controllable Hamiltonian families, with the control
/// interface used by the GRAPE optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LatticeModel {
    Spinor(SpinorLatticeModel),
    Microscope(GasMicroscopeModel),
}

impl LatticeModel {
    /// Hilbert-space dimension d.
    pub fn dim(&self) -> usize {
        match self {
            LatticeModel::Spinor(m) => 2 * m.sites,
            LatticeModel::Microscope(m) => m.sites,
        }
    }

    pub fn channel_names(&self) -> Vec<String> {
        match self {
            LatticeModel::Spinor(_) => vec!["theta".into(), "phi".into()],
            LatticeModel::Microscope(m) => {
                let mut names: Vec<String> =
                    (1..m.sites).map(|l| format!("hx_{l}")).collect();
                names.extend((1..=m.sites).map(|l| format!("hz_{l}")));
                names
            }
        }
    }

    pub fn num_channels(&self) -> usize {
        match self {
            LatticeModel::Spinor(_) => 2,
            LatticeModel::Microscope(m) => 2 * m.sites - 1,
        }
    }

    /// Default step count: K = d^2 for the spinor family, M steps per
    /// channel for the microscope (2M^2 - M parameters total).
    pub fn default_steps(&self) -> usize {
        match self {
            LatticeModel::Spinor(_) => self.dim() * self.dim(),
            LatticeModel::Microscope(m) => m.sites,
        }
    }

    /// Step duration fixing the natural units: Omega_0 dt = 2 pi or
    /// h_0 dt = 2 pi.
    pub fn natural_dt(&self) -> f64 {
        match self {
            LatticeModel::Spinor(m) => 2.0 * PI / m.rabi,
            LatticeModel::Microscope(m) => 2.0 * PI / m.hopping_scale,
        }
    }

    /// Hamiltonian at one step's control values (one value per channel).
    pub fn control_hamiltonian(&self, controls: &[f64]) -> Result<ComplexMatrix> {
        if controls.len() != self.num_channels() {
            return Err(Error::ChannelMismatch(format!(
                "expected {} control values, got {}",
                self.num_channels(),
                controls.len()
            )));
        }
        match self {
            LatticeModel::Spinor(m) => Ok(spinor_hamiltonian(m, controls[0], controls[1])),
            LatticeModel::Microscope(m) => {
                let (hx, hz) = controls.split_at(m.sites - 1);
                microscope_hamiltonian(m, hx, hz)
            }
        }
    }

    /// Analytic derivative of the step Hamiltonian with respect to one
    /// channel value.
    pub fn control_derivative(&self, controls: &[f64], channel: usize) -> Result<ComplexMatrix> {
        if controls.len() != self.num_channels() || channel >= self.num_channels() {
            return Err(Error::ChannelMismatch(format!(
                "channel {channel} of {}",
                self.num_channels()
            )));
        }
        match self {
            LatticeModel::Spinor(m) => {
                let theta = controls[0].rem_euclid(2.0 * PI);
                let phi = controls[1].rem_euclid(2.0 * PI);
                Ok(spinor_derivative(m, theta, phi, channel))
            }
            LatticeModel::Microscope(m) => {
                let sites = m.sites;
                let mut d = ComplexMatrix::zeros(sites, sites);
                if channel < sites - 1 {
                    d.set(channel, channel + 1, Complex::new(1.0, 0.0));
                    d.set(channel + 1, channel, Complex::new(1.0, 0.0));
                } else {
                    let l = channel - (sites - 1);
                    d.set(l, l, Complex::new(1.0, 0.0));
                }
                Ok(d)
            }
        }
    }
}

fn spinor_derivative(
    model: &SpinorLatticeModel,
    theta: f64,
    phi: f64,
    channel: usize,
) -> ComplexMatrix {
    let m = model.sites;
    let d = 2 * m;
    let mut out = ComplexMatrix::zeros(d, d);
    let eta = model.lamb_dicke;
    let phase = Complex::new(0.0, phi).exp();
    match channel {
        0 => {
            // d/dtheta: quadratic term through dx_up, Gaussians through
            // their exponents.
            let dx_up = (m as f64 + 1.0) / 2.0 + theta / (2.0 * PI);
            for l in 0..m {
                let site = (l + 1) as f64;
                out.set(
                    m + l,
                    m + l,
                    Complex::new(-model.quadratic * (site - dx_up) / PI, 0.0),
                );
            }
            let d_om_l = -model.omega_left(theta) * theta / (2.0 * eta * eta);
            let d_om_r = -model.omega_right(theta) * (theta - PI) / (2.0 * eta * eta);
            for l in 0..m {
                let v = Complex::new(0.5 * d_om_l, 0.0) * phase;
                out.set(m + l, l, v);
                out.set(l, m + l, v.conj());
                let down = (l + 1) % m;
                let v = Complex::new(0.5 * d_om_r, 0.0) * phase;
                out.set(m + l, down, out.get(m + l, down) + v);
                out.set(down, m + l, out.get(down, m + l) + v.conj());
            }
        }
        1 => {
            // d/dphi rotates both hopping phases by i.
            let om_l = Complex::new(0.0, 0.5 * model.omega_left(theta)) * phase;
            let om_r = Complex::new(0.0, 0.5 * model.omega_right(theta)) * phase;
            for l in 0..m {
                out.set(m + l, l, om_l);
                out.set(l, m + l, om_l.conj());
                let down = (l + 1) % m;
                out.set(m + l, down, out.get(m + l, down) + om_r);
                out.set(down, m + l, out.get(down, m + l) + om_r.conj());
            }
        }
        _ => unreachable!("spinor model has two channels"),
    }
    out
}

/// |amplitude|^2 profile of a circulant transition matrix as a function of
/// signed offset `l - l'`, offsets in `[-M/2, M/2)`.
pub fn propagator_profile(u: &UnitaryMatrix) -> Vec<(i64, f64)> {
    let m = u.dim();
    let half = m as i64 / 2;
    (-half..m as i64 - half)
        .map(|offset| {
            let idx = offset.rem_euclid(m as i64) as usize;
            (offset, u.get(idx, 0).norm_sqr())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{circulant_diagonalize, expm_hermitian, hermitian_eig, C64};

    #[test]
    fn ring_m3_all_offdiagonals() {
        let h = ring_hamiltonian(&UniformRing::new(3, 1.0).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { -1.0 };
                assert!((h.get(i, j) - Complex::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ring_m5_first_row() {
        let j = 0.8;
        let h = ring_hamiltonian(&UniformRing::new(5, j).unwrap());
        let expect = [0.0, -j, 0.0, 0.0, -j];
        for (col, &e) in expect.iter().enumerate() {
            assert!((h.get(0, col) - Complex::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ring_spectrum_matches_bloch_band() {
        let model = UniformRing::new(7, 1.3).unwrap();
        let h = ring_hamiltonian(&model);
        let (mut w, _) = hermitian_eig(&h).unwrap();
        let row: Vec<C64> = (0..7).map(|j| h.get(0, j)).collect();
        let mut bloch: Vec<f64> = circulant_diagonalize(&row).iter().map(|z| z.re).collect();
        w.sort_by(f64::total_cmp);
        bloch.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(bloch.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        // Band structure is -2 J cos(2 pi q / M).
        let mut expect: Vec<f64> = (0..7)
            .map(|q| -2.0 * 1.3 * (2.0 * PI * q as f64 / 7.0).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn propagator_t0_is_identity() {
        let model = UniformRing::new(12, 1.0).unwrap();
        let u = ring_propagator(&model, 0.0);
        assert!(
            u.matrix()
                .sub(&ComplexMatrix::identity(12))
                .max_norm()
                < 1e-12
        );
    }

    #[test]
    fn propagator_matches_dense_exponential() {
        let model = UniformRing::new(64, 1.0).unwrap();
        let t = 3.0;
        let u = ring_propagator(&model, t);
        let dense = expm_hermitian(&ring_hamiltonian(&model), t).unwrap();
        assert!(u.matrix().sub(dense.matrix()).max_norm() < 1e-9);
    }

    #[test]
    fn propagator_translation_invariance() {
        let model = UniformRing::new(21, 0.9).unwrap();
        let u = ring_propagator(&model, 2.5);
        let m = model.sites;
        for offset in 0..m {
            let reference = u.get(offset, 0);
            for lp in 0..m {
                let l = (lp + offset) % m;
                assert!((u.get(l, lp) - reference).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn band_truncate_epsilon_zero_is_identity_map() {
        let model = UniformRing::new(16, 1.0).unwrap();
        let u = ring_propagator(&model, 1.0).into_matrix();
        let (truncated, spec) = band_truncate(&u, 0.0, BandNorm::Max).unwrap();
        assert_eq!(truncated, u);
        assert!(spec.band <= 16);
    }

    #[test]
    fn band_truncate_diagonal_matrix() {
        let d = ComplexMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                Complex::new(2.0 + i as f64, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let (_, spec) = band_truncate(&d, 0.1, BandNorm::Max).unwrap();
        assert_eq!(spec.band, 0);
        assert!(!spec.cyclic);
    }

    #[test]
    fn band_grows_with_time() {
        let model = UniformRing::new(200, 1.0).unwrap();
        let mut last = 0;
        for t in [5.0, 10.0, 20.0] {
            let u = ring_propagator(&model, t).into_matrix();
            let (_, spec) = band_truncate(&u, 1e-3, BandNorm::Max).unwrap();
            assert!(spec.band >= last, "band shrank at t={t}");
            last = spec.band;
        }
    }

    #[test]
    fn spinor_couplings_at_theta_values() {
        let model = SpinorLatticeModel::with_defaults(4, 1.0).unwrap();
        // theta = pi/2: both Gaussians equal.
        let eq = model.omega_left(PI / 2.0) - model.omega_right(PI / 2.0);
        assert!(eq.abs() < 1e-14);
        let expect = (-(PI / (4.0 * 0.4)).powi(2)).exp();
        assert!((model.omega_left(PI / 2.0) - expect).abs() < 1e-14);
        // theta = 0: maximal left hopping, right hopping negligible.
        assert!((model.omega_left(0.0) - 1.0).abs() < 1e-14);
        assert!(model.omega_right(0.0) < 1e-6);
    }

    #[test]
    fn spinor_hamiltonian_is_hermitian() {
        let model = SpinorLatticeModel::with_defaults(3, 1.0).unwrap();
        for (theta, phi) in [(0.3, 1.2), (2.9, 5.5), (PI, 0.0)] {
            let h = spinor_hamiltonian(&model, theta, phi);
            assert!(h.hermiticity_deviation() <= 1e-12);
        }
    }

    #[test]
    fn microscope_zero_controls_zero_matrix() {
        let model = GasMicroscopeModel::with_defaults(4, 1.0).unwrap();
        let h = microscope_hamiltonian(&model, &[0.0; 3], &[0.0; 4]).unwrap();
        assert!(h.max_norm() < 1e-15);
    }

    #[test]
    fn microscope_m2_explicit() {
        let model = GasMicroscopeModel::with_defaults(2, 1.0).unwrap();
        let h = microscope_hamiltonian(&model, &[0.7], &[0.0, 0.0]).unwrap();
        assert!((h.get(0, 1) - Complex::new(0.7, 0.0)).norm() < 1e-15);
        assert!((h.get(1, 0) - Complex::new(0.7, 0.0)).norm() < 1e-15);
        assert!(h.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn microscope_open_chain_spectrum() {
        let m = 6;
        let j = 0.9;
        let model = GasMicroscopeModel::with_defaults(m, 1.0).unwrap();
        let h = microscope_hamiltonian(&model, &vec![j; m - 1], &vec![0.0; m]).unwrap();
        let (mut w, _) = hermitian_eig(&h).unwrap();
        let mut expect: Vec<f64> = (1..=m)
            .map(|k| 2.0 * j * (k as f64 * PI / (m as f64 + 1.0)).cos())
            .collect();
        w.sort_by(f64::total_cmp);
        expect.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn microscope_rejects_out_of_bounds() {
        let model = GasMicroscopeModel::new(3, 1.0, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let err = microscope_hamiltonian(&model, &[0.5, 2.0], &[0.0; 3]);
        match err {
            Err(Error::ControlOutOfBounds { channel, .. }) => assert_eq!(channel, "hx_2"),
            other => panic!("expected bounds error, got {other:?}"),
        }
    }

    #[test]
    fn spinor_derivative_matches_finite_difference() {
        let model = SpinorLatticeModel::with_defaults(3, 1.0).unwrap();
        let lattice = LatticeModel::Spinor(model);
        let controls = [1.1, 0.7];
        let eps = 1e-6;
        for channel in 0..2 {
            let analytic = lattice.control_derivative(&controls, channel).unwrap();
            let mut plus = controls;
            let mut minus = controls;
            plus[channel] += eps;
            minus[channel] -= eps;
            let fd = lattice
                .control_hamiltonian(&plus)
                .unwrap()
                .sub(&lattice.control_hamiltonian(&minus).unwrap())
                .scale(Complex::new(1.0 / (2.0 * eps), 0.0));
            assert!(
                analytic.sub(&fd).max_norm() < 1e-8,
                "channel {channel} derivative mismatch"
            );
        }
    }
}
