//! Words, the coefficient recursions `D^{k,j}_w`, `C^{k,j}_w`, generalized
//! Taylor remainders `Ω_w`, and their concrete counterparts for iterated
//! paraproducts.

mod concrete;
mod context;
mod word;

pub use concrete::{d2, omega2, omega3, r_seq, Omega2, Omega3};
pub use context::CalcContext;
pub use word::Word;
