//! Best linear Chebyshev (minimax) approximation on finite node sets.
//!
//! The minimax problem `min_p max_j |f_j - p(x_j)|` is attacked through its
//! L2-weighted Lagrange dual `max_{w in S} sum_j w_j |f_j - p_w(x_j)|^2`,
//! where `p_w` is the weighted least-squares fit. Two solvers are provided:
//! Lawson's multiplicative reweighting ([`lawson`]) and a primal-dual
//! interior-point method ([`ipm`]). [`refcheck`] holds an LP oracle for real
//! data plus diagnostics.
//!
//! ```
//! use minimax_dual::{ipm_solve, BasisSpec, IpmConfig, Problem};
//!
//! let p = Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(1)).unwrap();
//! let report = ipm_solve(&p, &IpmConfig::default()).unwrap();
//! assert!((report.eta - 0.5).abs() < 1e-8);
//! ```

pub mod cli;
pub mod error;
pub mod ipm;
pub mod lawson;
pub mod linalg;
pub mod orthobasis;
pub mod problem;
pub mod refcheck;
pub mod wls;

pub use error::{Error, Result};
pub use ipm::{ipm_solve, IpmConfig, Z0Mode};
pub use lawson::{lawson_solve, LawsonConfig, SolveReport, Status};
pub use problem::{builtin_problem, BasisSpec, Builtin, Mode, Problem, Scalar, WeightVector};
pub use refcheck::{lp_reference, LpSolution, ReferenceSet};
pub use wls::{solve_wls, WlsSolution};
