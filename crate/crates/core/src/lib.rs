pub mod ring;
pub mod symalg;
pub mod clifford;
pub mod conformal;
pub mod diffop;
pub mod expr;
pub mod solver;
pub mod applications;
