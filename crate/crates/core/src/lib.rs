pub mod cli;
pub mod codecs;
pub mod editops;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod retrieval;
pub mod synthgen;
pub mod xml;
