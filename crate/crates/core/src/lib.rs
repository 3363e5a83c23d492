//! Numerical engine for formal singular Yamabe expansions around an embedded
//! submanifold and the renormalized volumes / conformal energies they induce.
//!
//! The crate is organized around the blow-up picture: a tubular neighborhood of
//! a submanifold `Σⁿ ⊂ M^{n+k}` is resolved into `Σ × S^{k-1} × [0, δ)` and
//! every field of interest is expanded order-by-order in the distance `t`, with
//! coefficients that are functions on the normal sphere `S^{k-1}`.
//!
//! * [`fiber`] — spectral representation of functions on the fiber sphere
//!   (harmonic degrees, parity classes, products, quadrature).
//! * [`indicial`] — exceptional-codimension classification and the diagonal
//!   indicial operator `Δ + (s² - ns - (n - k + 2))` with its spectral inverse.
//! * [`geometry`] — Fermi-coordinate metric jets, model embeddings, and
//!   curvature invariants of parametrized surfaces.
//! * [`expansion`] — the order-by-order solution of the conformal factor jet,
//!   including log obstructions, and the conformal distance-ratio expansion.
//! * [`renorm`] — volume-form profiles, tail-volume fitting, closed-form
//!   energies, and the `n = 2` energy functionals.
//! * [`verify`] — the end-to-end anchor suite used by tests and the CLI.

pub mod expansion;
pub mod fiber;
pub mod geometry;
pub mod indicial;
pub mod quad;
pub mod renorm;
pub mod series;
pub mod special;
pub mod verify;
