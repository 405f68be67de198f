//! Spectral contour dynamics for a closed elastic string immersed in 2-D Stokes flow.
//!
//! The string `X(s, t)` moves with the fluid velocity it induces,
//!
//! ```text
//! X_t = -(1/4)(-Δ)^{1/2} X + g_X,
//! ```
//!
//! where the first term is the stiff, dissipative principal part and `g_X`
//! collects the smooth remainder of the boundary integral. The crate provides
//! the Fourier toolkit ([`spectral`]), curve geometry ([`curve`]), the
//! boundary-integral kernels ([`stokeslet`]), time integration ([`dynamics`]),
//! closest-circle fitting and the linearized spectrum ([`equilibrium`]), and the
//! file formats and command-line front end ([`cli_io`]).
//!
//! ```
//! use ibstring::{curve, stokeslet};
//!
//! let circle = curve::make_circle(64, 1.0, 0.0, ibstring::Vec2::zeros()).unwrap();
//! let u = stokeslet::on_curve_velocity(&circle).unwrap();
//! assert!(u.max_norm() < 1e-12);
//! ```

pub mod cli_io;
pub mod curve;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod spectral;
pub mod stokeslet;

pub use error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/curve.md")]
    mod curve {}
    #[doc = include_str!("../../../book/src/boundary_integrals.md")]
    mod boundary_integrals {}
    #[doc = include_str!("../../../book/src/time_stepping.md")]
    mod time_stepping {}
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    mod equilibrium {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
