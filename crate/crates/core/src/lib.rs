//! Best constants in weighted inequalities `int V |grad u|^2 >= c int W u^2`
//! on balls, for radial pairs `(V, W)`.

pub mod potentials;
pub mod cli;
pub mod constants;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod sturm;
pub mod weights;
