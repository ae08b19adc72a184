//! Numerical companion to the systolic inequality for the Klein surface
//! `3RP^2`: real genus-2 curves and their companions, period lattices of the
//! associated elliptic curves, flat torus and Klein bottle systoles, an
//! interval-arithmetic certificate for the main bound, and a mesh-based
//! oracle for cross-checking.

pub mod flat_systoles;
pub mod interval;
pub mod mesh_oracle;
pub mod periods;
pub mod proof_chain;
pub mod real_curves;
