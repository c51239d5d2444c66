pub mod benchmark;
pub mod milp;
pub mod harness;
pub mod model;
pub mod pipeline;
pub mod sim;
pub mod step1;
pub mod step2;
