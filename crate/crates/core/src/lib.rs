//! Rational points on `y² = x³ + ax² + bx` by explicit 4-descent and 8-descent.
//!
//! The pipeline: pick a squarefree `d | b` and find a point on the conic
//! `h² = d f² + a f g + (b/d) g²`; turn it into the pair of quadratics
//! `k u² = g₀p² − g₀d q²`, `k v² = f₀p² − 2h₀pq + (a g₀ + d f₀) q²`;
//! parameterize the first and substitute into the second to get a binary
//! quartic that must be a square. The 8-descent factors that quartic as
//! `u·v`, solves `k₁t² = v(r, s)`, and searches the resulting second
//! quartic instead. Every stage is exact and re-checkable.
//!
//! ```
//! use ecdescent::descent::{Descent, DescentOptions, Mode, variants_for};
//! use ecdescent::{arith::Factorizer, forms::Curve, point::TorsionList, search::Engine};
//!
//! let curve = Curve::new(0, -157 * 157).unwrap();
//! let opts = DescentOptions { mode: Mode::Eight, ..Default::default() };
//! let (engine, factorizer) = (Engine::serial(), Factorizer::default());
//! let descent = Descent::new(&curve, variants_for(&curve, false, false), &TorsionList::default(),
//!                            &opts, &engine, &factorizer).unwrap();
//! let out = descent.run(None, &mut |_| {}).unwrap();
//! assert_eq!(ecdescent::point::format_rational(out.point.unwrap().x()),
//!            "-166136231668185267540804/2825630694251145858025");
//! ```

pub mod arith;
mod bigser;
pub mod cli;
pub mod descent;
pub mod error;
pub mod forms;
pub mod point;
pub mod search;
pub mod solubility;

pub use error::{Error, Result};
