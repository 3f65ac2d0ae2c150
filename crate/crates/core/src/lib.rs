//! Piecewise-linear finite elements for Poisson problems whose Dirichlet
//! condition lives on a curve embedded in a non-fitted mesh. The condition
//! is imposed on every element meeting a layer of half-width `eps` around
//! the curve, which turns the interface problem into a standard Dirichlet
//! problem on a polygonal domain aligned with the mesh.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: level sets, the regularized indicator, the test problem
//! - [`mesh`]: criss-cross meshes, red refinement, newest-vertex bisection
//! - [`layer`]: discrete layer classification and the parameters `delta`, `kappa`
//! - [`linalg`]: CSR matrices and preconditioned conjugate gradients
//! - [`fem`]: assembly, constraint elimination and the Galerkin solve
//! - [`analysis`]: error norms and rate fits
//! - [`experiment`]: the three convergence studies
//! - [`report`]: CSV tables, SVG plots and text dumps

pub mod analysis;
pub mod experiment;
pub mod fem;
pub mod geometry;
pub mod layer;
pub mod linalg;
pub mod mesh;
pub mod report;

pub use analysis::{error_norms, fit_rate, ConvergenceTable, ErrorReport, Norm};
pub use fem::{solve_diffuse, FemSolution};
pub use geometry::{Circle, LevelSet, Point, TestProblem};
pub use layer::{classify, ElementClass, LayerClassification};
pub use linalg::{CgConfig, CsrMatrix};
pub use mesh::{Mesh, MeshMetrics};
