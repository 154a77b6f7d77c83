pub mod analysis;
pub mod closure;
pub mod corpus;
pub mod counting;
pub mod game;
pub mod logic;
pub mod plan;
pub mod tree;

pub use counting::IntPoly;

pub type LimitReportF64 = counting::LimitReport<f64>;
pub type AsymptoticReportF64 = logic::AsymptoticReport<f64>;
