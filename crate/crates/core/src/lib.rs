//! Quantitative model checking of natural strategy logic over weighted
//! concurrent game structures, with a GSP keyword-auction toolkit.

pub mod checker;
pub mod formula;
pub mod func;
pub mod gsp;
pub mod random;
pub mod regex;
pub mod strategy;
pub mod syntax;
pub mod value;
pub mod wcgs;
pub mod we;

pub use value::Value;
