//! Instance generators built from the hardness reductions and the
//! diffracting-queue example.

pub mod parikh;
pub mod pcp;
pub mod queue;
pub mod sat;
