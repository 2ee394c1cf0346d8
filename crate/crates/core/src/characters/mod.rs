//! Exact truncated q-series: eta and theta functions, affine Weyl numerator sums, the vacuum
//! character of the simple Bershadsky–Polyakov algebra, minimal-model characters of W(sl_n),
//! and the decomposition of the former into the latter times lattice characters.

mod functions;
mod lie;
mod series;
mod verify;

pub use functions::*;
pub use lie::{act, fundamental, inner, lattice_points, norm2, permutations, rho, AffineWeight};
pub use series::{cyclotomic_polynomial, exp, Coeff, Cyclotomic, Exp, JacobiSeries, LaurentZ, QSeries};
pub use verify::*;
