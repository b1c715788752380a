//! Formal multiparameter quantum groups and multiparameter Lie bialgebras,
//! computed exactly at a finite ħ-truncation order.

#![allow(clippy::needless_range_loop)]

pub mod cartan;
pub mod liebialg;
pub mod linalg;
pub mod quea;
pub mod report;
pub mod semiclassical;
pub mod series;
