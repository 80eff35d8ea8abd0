//! Numerical minimal surfaces.
//!
//! * [`expr`]: meromorphic expressions with exact derivative trees.
//! * [`weierstrass`]: minimal immersions from Weierstrass data.
//! * [`mesh`]: triangle meshes in R³/R⁴ and their measures.
//! * [`plateau`]: disk-type Plateau solver by Dirichlet-energy minimization.
//! * [`verify`]: discrete checks of the variational and monotonicity identities.

pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod plateau;
pub mod quadrature;
pub mod verify;
pub mod weierstrass;

pub use expr::{ComplexExpr, ComplexValue, ExprError, PointKind, SpecialPoint};
