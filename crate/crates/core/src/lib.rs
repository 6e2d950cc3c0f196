//! Boson sampling on 1D lattices: transition matrices from tight-binding
//! Hamiltonians, output Fock distributions via matrix permanents (with banded
//! fast paths), GRAPE synthesis of target unitaries, and numerical
//! controllability certificates.

pub mod control;
pub mod controllability;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod permanent;
pub mod sampling;

pub use control::{
    ControlWaveform, GradientMethod, GrapeConfig, GrapeResult, ScanRow,
};
pub use controllability::{
    ClosureReport, GellMannBasis, GeneratorSet, IdentityCheck, IdentityReport,
};
pub use error::{Error, Result};
pub use lattice::{
    BandNorm, BandSpec, GasMicroscopeModel, LatticeModel, SpinorLatticeModel, UniformRing,
};
pub use linalg::{ComplexMatrix, RngSeed, UnitaryMatrix, C64};
pub use permanent::{BandedMatrix, FockState, PermanentMethod, PermanentResult};
pub use sampling::{FockDistribution, MultiplicativeGap};
