//! Geodesics of the `(2n+1)`-dimensional Heisenberg group.

pub mod contact;
pub mod error;
pub mod exact;
pub mod export;
pub mod group;
pub mod numerics;
pub mod poly;
pub mod riemannian;
pub mod special;
pub mod sr;
pub mod verify;

pub use error::{Error, Result};
pub use group::{frame_field, lie_bracket, pair, Frame, GroupPoint, PolyOneForm, PolyVectorField};
pub use poly::{Polynomial, Rational};
