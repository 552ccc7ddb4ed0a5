//! Exact and numerical machinery for (k,l)-sum-free sets.
//!
//! A set A of positive integers is (k,l)-sum-free when no sum of k elements
//! equals a sum of l elements (repetition allowed); the restricted variant
//! only counts sums of distinct elements.

pub mod bitset;
pub mod charfns;
pub mod densitylab;
pub mod error;
pub mod exact;
pub mod intset;
pub mod littlewood;
pub mod params;
pub mod rational;
pub mod series;
pub mod sumset;
pub mod torus;
pub mod trigdet;

pub use bitset::SumBitset;
pub use error::{Error, Result};
pub use exact::{ExtremalResult, SolveMode, SolveResult};
pub use intset::IntSet;
pub use params::KLParams;
pub use rational::Rational;
pub use densitylab::{FolnerReport, FolnerSpec, ResidueSet};
pub use littlewood::{HSeriesSpec, InvariantLedger, TestFunction, TestFunctionSpec, TrigPoly};
pub use series::{BalancedFn, Series, UVParams};
pub use torus::{Arc, DilationResult, Fold};
