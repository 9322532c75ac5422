//! Relativistic BGK (Marle) relaxation for polyatomic gases.
//!
//! The crate covers the whole pipeline from a sampled distribution function
//! `f(p, I)` on a discrete phase space to its Jüttner equilibrium and the
//! relaxation dynamics towards it:
//!
//! * [`spacetime`]: physical constants, Minkowski four-vectors and the explicit
//!   boost into the local rest frame.
//! * [`quadrature`]: the momentum × internal-energy grid and deterministic
//!   pairwise reductions over it.
//! * [`moments`]: particle flux, energy-momentum tensor, entropy flux and the
//!   Eckart decomposition.
//! * [`juttner`]: radial reductions `M`, `M̃`, `M₁..M₃`, the monotone ratio
//!   `M̃/M`, the coldness solver and the equilibrium determination.
//! * [`closure`]: the discrete Jüttner fit that matches the collision
//!   invariants on the grid to roundoff.
//! * [`dynamics`]: the collision operator, homogeneous relaxation, slab
//!   transport and entropy/conservation diagnostics.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod closure;
pub mod dynamics;
mod error;
pub mod integrate;
pub mod juttner;
pub mod moments;
pub mod quadrature;
pub mod spacetime;
pub mod sum;

pub use error::{Error, Result};
pub use spacetime::{Boost, Constants, FourVector};
