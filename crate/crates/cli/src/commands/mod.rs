pub mod curves;
pub mod mc;
pub mod pool_gen;
pub mod price;
pub mod validate;
