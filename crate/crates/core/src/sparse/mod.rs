//! Compressed sparse row storage, fill-reducing orderings and a simplicial
//! LDLᵀ factorization with inertia.

mod csr;
mod ldlt;
mod ordering;

pub use csr::{read_coo, write_coo, CsrMatrix, TripletBuilder};
pub use ldlt::Ldlt;
pub use ordering::{nested_dissection, reverse_cuthill_mckee, Ordering};
