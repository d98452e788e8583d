pub mod augment;
pub mod eval;
pub mod scale;
pub mod transport;
