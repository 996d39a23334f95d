//! Finsler geometry engine: Cartan connection curvature, the derived
//! special tensors, and numerical classification of special Finsler spaces.
//!
//! All numerical code is generic over the base float type through
//! [`scalar::Real`]; the `*64` aliases below fix it to `f64`.

pub mod cartan;
pub mod classify;
pub mod dsl;
pub mod fd;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod sample;
pub mod scalar;
pub mod special;
pub mod tensor;
pub mod theorems;

pub type Jet64 = jet::Jet<f64>;
pub type TangentPoint64 = tensor::TangentPoint<f64>;
pub type Tensor64 = tensor::ComponentTensor<f64>;
pub type ConnectionData64 = cartan::ConnectionData<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
