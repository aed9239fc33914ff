pub mod algebra;
pub mod f2;
pub mod pmc;
pub mod strand;
pub mod bimodule;
pub mod table;
pub mod morphism;
pub mod random;
pub mod boxtensor;
pub mod canon;
pub mod clf;
pub mod doc;
pub mod cli;
