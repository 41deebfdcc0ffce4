//! Persistent homology as a differentiable pipeline.
//!
//! The crate goes from geometry to optimizable scalars in small steps, each
//! usable on its own:
//!
//! * [`filtration`] — simplicial complexes, monotone multi-parameter
//!   filtrations, the Rips construction and its derivative;
//! * [`persistence`] — one-parameter boundary reduction with simplex
//!   attribution, barcodes, and rank-based barcode extraction for abstract
//!   modules over a finite total order;
//! * [`grid`] — two-parameter persistence modules on finite grids, minimal
//!   projective resolutions relative to hooks, and signed barcodes;
//! * [`metrics`] — bottleneck, sum-matching, and signed bottleneck distances
//!   with witness matchings;
//! * [`lift`] — vectorization of (signed) barcodes, Jacobians of the lifted
//!   persistence map, and loss gradients;
//! * [`optim`] — stochastic subgradient descent with assumption monitoring
//!   and the point-cloud hole-creation experiment;
//! * [`io`] / [`svg`] — the JSON, CSV, and SVG formats used by the CLI;
//! * [`cli`] — the `persistlab` command-line front end.
//!
//! Homology is computed over GF(2) throughout ([`f2`]).
//!
//! Run `cargo run --example <name>` for a guided tour; each example covers
//! one capability end to end.

pub mod cli;
pub mod f2;
pub mod filtration;
pub mod grid;
pub mod homology;
pub mod io;
pub mod lift;
pub mod metrics;
pub mod optim;
pub mod persistence;
pub mod svg;
