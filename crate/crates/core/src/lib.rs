pub mod clustering;
pub mod extremes;
pub mod lp;
pub mod pipeline;
pub mod plot;
pub mod resys;
pub mod synthgen;
pub mod timeseries;
