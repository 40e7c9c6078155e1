//! Exact local factors of unramified Weil–Deligne representations, Plancherel
//! densities for `GL_d`, orbit classification of bilinear forms over p-adic
//! fields, and a numerical check of a singular spectral-limit identity.
//!
//! Everything here is `no_std` with `alloc`; parallel execution and file
//! formats live in the companion `planch` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arith;
pub mod factor_algebra;
pub mod field_model;
pub mod linalg;
pub mod wd_engine;
pub mod temp_spectrum;
pub mod forms_orbits;
pub mod spectral_limit;
