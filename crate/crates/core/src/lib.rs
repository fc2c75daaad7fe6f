//! Numerical machinery for the multi-line Kakeya maximal operator.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: directions, δ-tubes, δ×1 rectangles, exact clipping.
//! * [`frostman`]: step measures on the line and on direction space, the
//!   dyadic Frostman construction and Riesz-type energies.
//! * [`tube_measures`]: (δ,e,s)-measures, the discretize-and-lift pipeline and
//!   exact correlation integrals.
//! * [`maximal`]: the maximal operator as best-rectangle search plus a linear
//!   program over tube weights.
//! * [`testsets`]: raster test sets (squares, discs, Cantor products, Perron
//!   trees) and δ-neighbourhoods.
//! * [`experiments`]: end-to-end experiments producing reports, CSV and SVG.

pub mod error;
pub mod experiments;
pub mod fit;
pub mod frostman;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod maximal;
pub mod testsets;
pub mod tube_measures;

pub use error::{Error, Result};
