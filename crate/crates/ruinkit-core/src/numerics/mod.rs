//! Numerical building blocks: root finding, adaptive quadrature, and an
//! embedded Runge-Kutta integrator with dense output and event detection.

pub mod ode;
pub mod quad;
pub mod roots;
