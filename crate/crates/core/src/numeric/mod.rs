//! Small numerical building blocks shared by the analytic modules.

pub mod contour;
pub mod poly;
pub mod quadrature;
pub mod roots;
