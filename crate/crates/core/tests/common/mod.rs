#![allow(dead_code)]

use std::collections::HashMap;

use diffuse_core::geometry::InterfaceProblem;
use diffuse_core::layer::mark_layer_boundary;
use diffuse_core::{Mesh, TestProblem};

/// Stiffness matrix from reference-element gradients mapped through the
/// inverse Jacobian and a three-point edge-midpoint rule.
pub fn reference_stiffness(mesh: &Mesh) -> HashMap<(usize, usize), f64> {
    const REF_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [p0, p1, p2] = mesh.corners(t);
        let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // J^{-T}
        let jit = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        let grad: Vec<[f64; 2]> = REF_GRAD
            .iter()
            .map(|g| [jit[0][0] * g[0] + jit[0][1] * g[1], jit[1][0] * g[0] + jit[1][1] * g[1]])
            .collect();
        let area = 0.5 * det.abs();
        for a in 0..3 {
            for b in 0..3 {
                let integrand = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
                let value: f64 = (0..3).map(|_| area / 3.0 * integrand).sum();
                *out.entry((tri[a], tri[b])).or_insert(0.0) += value;
            }
        }
    }
    out
}

pub fn locally_refined(n: usize, eps: f64, passes: usize) -> Mesh {
    let problem = TestProblem::default();
    let mut mesh = Mesh::uniform(n).unwrap();
    for _ in 0..passes {
        let marked = mark_layer_boundary(&mesh, problem.level_set(), eps);
        mesh = mesh.refine_marked(&marked).unwrap();
    }
    mesh
}

/// Largest entrywise difference between the assembled stiffness matrix and
/// the reference assembler, over the union of both sparsity patterns.
pub fn stiffness_deviation(mesh: &Mesh) -> f64 {
    let a = diffuse_core::fem::assemble_stiffness(mesh).unwrap();
    let reference = reference_stiffness(mesh);
    let mut worst: f64 = 0.0;
    for i in 0..a.dim() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            worst = worst.max((v - reference.get(&(i, j)).copied().unwrap_or(0.0)).abs());
        }
    }
    for (&(i, j), &r) in &reference {
        worst = worst.max((a.get(i, j) - r).abs());
    }
    worst
}

/// Number of unknowns and relative max-norm difference between the CG and
/// dense solutions of the reduced system.
pub fn cg_dense_deviation(mesh: &Mesh, eps: f64) -> (usize, f64) {
    use diffuse_core::linalg::{solve_cg, solve_dense_oracle, CgConfig};
    let sys = diffuse_core::fem::assemble_diffuse(&TestProblem::default(), mesh, eps).unwrap();
    let cg = solve_cg(&sys.reduced.matrix, &sys.reduced.rhs, &CgConfig::default()).unwrap();
    let dense = solve_dense_oracle(&sys.reduced.matrix, &sys.reduced.rhs).unwrap();
    let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = cg.x.iter().zip(&dense).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (dense.len(), diff / scale)
}

/// Meshes for the solver comparison, all below 5000 unknowns.
pub fn oracle_cases() -> Vec<(Mesh, f64)> {
    vec![
        (Mesh::uniform(24).unwrap(), 0.25),
        (Mesh::uniform(48).unwrap(), 0.125),
        (locally_refined(16, 1.0 / 64.0, 3), 1.0 / 64.0),
    ]
}
