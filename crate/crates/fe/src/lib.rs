pub mod bc;
pub mod case;
pub mod element;
pub mod error;
pub mod generate;
pub mod hydrogen;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod norms;
pub mod output;
pub mod run;
pub mod solver;
