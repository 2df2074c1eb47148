//! Exact-arithmetic derivation and verification of polynomial Bell
//! inequalities for classical causal networks.
//!
//! A *network scenario* consists of measurement parties and independent
//! hidden sources wired to subsets of the parties.  Classical models on such
//! a network (local response functions fed by independent sources) satisfy
//! linear inequalities — the facets of the familiar correlation polytope —
//! but the *independence* of the sources additionally imposes nonlinear
//! constraints on the observable correlators.  Eliminating the unobservable
//! quantities from the combined system yields polynomial inequalities in the
//! observable correlators.
//!
//! This crate implements the full derivation pipeline over exact rationals:
//!
//! * [`scenario`] — network descriptions, parsing, and the graphical
//!   independence analysis that finds factorizing party bipartitions;
//! * [`moment`] — correlator bases, moment vectors, transforms between
//!   probability and correlator coordinates, and the classification of
//!   basis coordinates into observables / parameters / eliminables;
//! * [`linear`] — exact linear inequality systems: the outcome-simplex
//!   system, Fourier–Motzkin elimination with certified redundancy removal,
//!   an exact-rational LP solver, and a double-description engine for
//!   vertex/facet enumeration;
//! * [`nonlinear`] — multivariate polynomials, the parametric elimination
//!   machinery (sign-cased pivoting, quadratic parameter elimination), and
//!   the end-to-end derivation pipeline producing certified polynomial
//!   inequalities;
//! * [`oracle`] — brute-force classical-model oracles used to verify derived
//!   inequalities independently: deterministic enumeration, seeded random
//!   models, and alternating maximization;
//! * [`ns`] — no-signalling systems generalized by observable independence
//!   requirements, with exact vertex enumeration.
//!
//! The crate is `no_std` (with `alloc`): every algorithm is deterministic
//! and allocation-backed, with all decisions taken in exact arithmetic.
//! IO, file formats, and the command-line front end live in the companion
//! `bellforge` crate.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod linalg;
pub mod linear;
pub mod moment;
pub mod nonlinear;
pub mod ns;
pub mod oracle;
pub mod ratio;
pub mod scenario;
