//! Numerical toolkit for critical elliptic equations with power weights
//! (Caffarelli-Kohn-Nirenberg type): explicit radial ground states, the
//! spectrum of the linearization per spherical-harmonic mode, degeneracy
//! curves and symmetry-breaking region maps, and a numerically executed
//! finite-dimensional reduction that produces certified approximate
//! solutions of radially perturbed problems.
//!
//! Everything is phrased in the Emden-Fowler cylinder variable `t = ln r`,
//! where the radial problem becomes an autonomous ODE on the line with a
//! sech²-well linearization. See the module docs for the conventions:
//!
//! * [`params`] — parameter domain and derived scalars;
//! * [`closed_form`] — explicit profiles, spectra and energies;
//! * [`grid`] — discretization, inner products, quadrature;
//! * [`tridiag`] — symmetric tridiagonal eigenvalue/solve kernels;
//! * [`spectral`] — mode spectra, non-degeneracy, symmetry breaking;
//! * [`perturbation`] — the perturbation families and their metadata;
//! * [`reduction`] — the constrained correction solve, `Γ`/`Φ_ε` and
//!   certified critical points.

pub mod closed_form;
pub mod grid;
pub mod params;
pub mod perturbation;
pub mod reduction;
pub mod spectral;
pub mod tridiag;

pub use grid::{Grid, RadialProfile};
pub use params::{derive, validate, DerivedConstants, ProblemParams, ValidatedParams};
