//! Exact computations with the tensor-density modules `F^alpha_b(V)` over the
//! Witt algebras `W_d`.

pub mod exactlinalg;
pub mod glmodules;
pub mod wittaction;
pub mod structure;
