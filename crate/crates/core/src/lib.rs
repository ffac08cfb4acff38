//! Exact formal germ dynamics on `(C,0)`, twisted cohomology of triangulated
//! surfaces, and order-by-order construction of formal foliations from
//! transition data.

pub mod cech;
pub mod classify;
pub mod error;
pub mod field;
pub mod forms;
pub mod germ;
pub mod json;
pub mod linalg;
pub mod series;
pub mod ueda;

pub use error::{Error, Result};
pub use field::{BigComplex, Cyclotomic, Field};
pub use series::{LaurentSeries, PowerSeries};
pub use germ::{GermDiffeo, Tangency, VectorFieldGerm};
