pub mod numerics;
pub mod solvers;
pub mod network;
pub mod training;
pub mod diagnostics;
pub mod problems;
