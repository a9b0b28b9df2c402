pub mod gamma;
pub mod nodes;
pub mod quadrature;

pub use gamma::{
    binomial, factorial, gamma_fn, gamma_p_int, gamma_q_int, upper_incomplete_gamma, upper_incomplete_gamma_scaled,
};
pub use nodes::{position_nodes, PositionNodes};
pub use quadrature::{
    integrate_adaptive, integrate_finite, integrate_finite_with, integrate_semi_infinite,
    integrate_semi_infinite_with, Integral, QuadOptions,
};
