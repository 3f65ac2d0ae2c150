//! Piecewise-linear finite elements: quadrature, nodal interpolation,
//! stiffness and load assembly, elimination of the layer and boundary
//! constraints, and the Galerkin solve of the diffuse interface problem.

use thiserror::Error;

use crate::geometry::{InterfaceProblem, Point};
use crate::layer::{classify, LayerClassification, LayerError, VertexConstraint};
use crate::linalg::{norm_inf, solve_cg, CgConfig, CsrMatrix, LinalgError};
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("triangle {0} is degenerate (zero area)")]
    DegenerateTriangle(usize),
    #[error("expected {expected} nodal values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no free degrees of freedom remain after applying constraints")]
    NoFreeDofs,
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Symmetric quadrature rule on a triangle in barycentric coordinates.
/// Weights sum to one and are scaled by the area at use.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl QuadratureRule {
    /// Edge midpoints, exact for quadratics.
    pub fn degree2() -> Self {
        QuadratureRule {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Six-point rule exact for polynomials of degree four.
    pub fn degree4() -> Self {
        const A: f64 = 0.445_948_490_915_965;
        const WA: f64 = 0.223_381_589_678_011;
        const B: f64 = 0.091_576_213_509_771;
        const WB: f64 = 0.109_951_743_655_322;
        let a2 = 1.0 - 2.0 * A;
        let b2 = 1.0 - 2.0 * B;
        QuadratureRule {
            points: vec![
                [a2, A, A],
                [A, a2, A],
                [A, A, a2],
                [b2, B, B],
                [B, b2, B],
                [B, B, b2],
            ],
            weights: vec![WA, WA, WA, WB, WB, WB],
            degree: 4,
        }
    }

    /// Integral of `f` over the triangle with the given corners.
    pub fn integrate<F: FnMut(Point) -> f64>(&self, corners: &[Point; 3], mut f: F) -> f64 {
        let area = 0.5 * signed_area2(corners).abs();
        let s: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * f(barycentric_to_point(corners, *l)))
            .sum();
        area * s
    }
}

pub fn barycentric_to_point(corners: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * corners[0][0] + l[1] * corners[1][0] + l[2] * corners[2][0],
        l[0] * corners[0][1] + l[1] * corners[1][1] + l[2] * corners[2][1],
    ]
}

fn signed_area2(c: &[Point; 3]) -> f64 {
    (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[1][1] - c[0][1]) * (c[2][0] - c[0][0])
}

/// Gradients of the three barycentric coordinates and the triangle area,
/// or `None` for a degenerate triangle.
pub fn hat_gradients(corners: &[Point; 3]) -> Option<([[f64; 2]; 3], f64)> {
    let a2 = signed_area2(corners);
    if a2 == 0.0 || !a2.is_finite() {
        return None;
    }
    let [p0, p1, p2] = *corners;
    let g = [
        [(p1[1] - p2[1]) / a2, (p2[0] - p1[0]) / a2],
        [(p2[1] - p0[1]) / a2, (p0[0] - p2[0]) / a2],
        [(p0[1] - p1[1]) / a2, (p1[0] - p0[0]) / a2],
    ];
    Some((g, 0.5 * a2.abs()))
}

/// Element stiffness matrix `∫ ∇φ_i · ∇φ_j` of the P1 hat functions.
pub fn local_stiffness(corners: &[Point; 3]) -> Option<[[f64; 3]; 3]> {
    let (g, area) = hat_gradients(corners)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Some(k)
}

/// Nodal interpolant: the field evaluated at every vertex.
pub fn interpolate_nodal<F: Fn(Point) -> f64>(mesh: &Mesh, field: F) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| field(p)).collect()
}

/// Nodal interpolant of a fallible field; the first failure is returned.
pub fn try_interpolate_nodal<F, E>(mesh: &Mesh, field: F) -> Result<Vec<f64>, E>
where
    F: Fn(Point) -> Result<f64, E>,
{
    mesh.vertices().iter().map(|&p| field(p)).collect()
}

/// Value of the P1 function with coefficients `coeffs` at barycentric
/// coordinates `l` of triangle `t`.
pub fn evaluate_p1(mesh: &Mesh, coeffs: &[f64], t: usize, l: [f64; 3]) -> f64 {
    let [a, b, c] = mesh.triangles()[t];
    l[0] * coeffs[a] + l[1] * coeffs[b] + l[2] * coeffs[c]
}

fn vertex_neighbors(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::with_capacity(7); mesh.vertex_count()];
    for tri in mesh.triangles() {
        for &i in tri {
            rows[i].extend_from_slice(tri);
        }
    }
    rows
}

/// Global stiffness matrix over the whole square.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<CsrMatrix, FemError> {
    let mut a = CsrMatrix::from_pattern(vertex_neighbors(mesh));
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let k = local_stiffness(&mesh.corners(t)).ok_or(FemError::DegenerateTriangle(t))?;
        for i in 0..3 {
            for j in 0..3 {
                a.add(tri[i], tri[j], k[i][j])?;
            }
        }
    }
    Ok(a)
}

/// Load vector `∫ (I_h f) φ_i`, integrated exactly with the P1 mass matrix.
pub fn assemble_load(mesh: &Mesh, f_nodal: &[f64]) -> Result<Vec<f64>, FemError> {
    if f_nodal.len() != mesh.vertex_count() {
        return Err(FemError::DimensionMismatch { expected: mesh.vertex_count(), got: f_nodal.len() });
    }
    let mut b = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.area(t);
        let sum: f64 = tri.iter().map(|&v| f_nodal[v]).sum();
        for &v in tri {
            // (area / 12) (2 f_i + f_j + f_k)
            b[v] += area / 12.0 * (f_nodal[v] + sum);
        }
    }
    Ok(b)
}

/// Linear system on the free vertices.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global vertex index of each free unknown.
    pub dof_map: Vec<usize>,
    /// Prescribed values at constrained vertices, zero at free ones.
    pub prescribed: Vec<f64>,
}

impl ReducedSystem {
    /// Global coefficient vector from the free unknowns.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut u = self.prescribed.clone();
        for (&g, &v) in self.dof_map.iter().zip(free) {
            u[g] = v;
        }
        u
    }
}

/// Prescribed vertex values: `g` on layer vertices, `boundary` on outer
/// boundary vertices, zero elsewhere.
pub fn prescribed_values(
    classification: &LayerClassification,
    g_nodal: &[f64],
    boundary_nodal: Option<&[f64]>,
) -> Vec<f64> {
    classification
        .vertex_constraint
        .iter()
        .enumerate()
        .map(|(v, c)| match c {
            VertexConstraint::Free => 0.0,
            VertexConstraint::Layer => g_nodal[v],
            VertexConstraint::Boundary => boundary_nodal.map_or(0.0, |b| b[v]),
        })
        .collect()
}

/// Eliminates the constrained vertices symmetrically: zero on the outer
/// boundary and `g_nodal` on layer vertices.
pub fn apply_constraints(
    a: &CsrMatrix,
    b: &[f64],
    classification: &LayerClassification,
    g_nodal: &[f64],
) -> Result<ReducedSystem, FemError> {
    apply_constraints_with_boundary(a, b, classification, g_nodal, None)
}

/// Like [`apply_constraints`], with explicit outer boundary values.
pub fn apply_constraints_with_boundary(
    a: &CsrMatrix,
    b: &[f64],
    classification: &LayerClassification,
    g_nodal: &[f64],
    boundary_nodal: Option<&[f64]>,
) -> Result<ReducedSystem, FemError> {
    let n = a.dim();
    for len in [b.len(), g_nodal.len(), classification.vertex_constraint.len()]
        .into_iter()
        .chain(boundary_nodal.map(<[f64]>::len))
    {
        if len != n {
            return Err(FemError::DimensionMismatch { expected: n, got: len });
        }
    }
    let prescribed = prescribed_values(classification, g_nodal, boundary_nodal);
    let mut keep = vec![None; n];
    let mut dof_map = Vec::new();
    for v in 0..n {
        if !classification.is_constrained(v) {
            keep[v] = Some(dof_map.len());
            dof_map.push(v);
        }
    }
    if dof_map.is_empty() {
        return Err(FemError::NoFreeDofs);
    }
    let rhs = dof_map
        .iter()
        .map(|&i| {
            let (cols, vals) = a.row(i);
            let lift: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(&j, _)| keep[j].is_none())
                .map(|(&j, &v)| v * prescribed[j])
                .sum();
            b[i] - lift
        })
        .collect();
    let matrix = a.restrict(&keep, dof_map.len());
    Ok(ReducedSystem { matrix, rhs, dof_map, prescribed })
}

/// Assembled data of one diffuse interface solve.
#[derive(Debug, Clone)]
pub struct DiffuseSystem {
    pub classification: LayerClassification,
    pub stiffness: CsrMatrix,
    pub load: Vec<f64>,
    pub g_nodal: Vec<f64>,
    pub reduced: ReducedSystem,
}

/// Discrete solution over all mesh vertices.
#[derive(Debug, Clone)]
pub struct FemSolution<'m> {
    pub mesh: &'m Mesh,
    pub coefficients: Vec<f64>,
    pub classification: LayerClassification,
    pub cg_iterations: usize,
    pub cg_relative_residual: f64,
}

impl FemSolution<'_> {
    pub fn free_dofs(&self) -> usize {
        self.classification.free_count()
    }
}

/// Classifies the layer, interpolates `g` and `f`, assembles and reduces.
pub fn assemble_diffuse<P: InterfaceProblem + ?Sized>(
    problem: &P,
    mesh: &Mesh,
    eps: f64,
) -> Result<DiffuseSystem, FemError> {
    let classification = classify(mesh, problem.level_set(), eps)?;
    let g_nodal = interpolate_nodal(mesh, |x| problem.interface_data(x));
    let f_nodal = interpolate_nodal(mesh, |x| problem.source(x));
    let boundary_nodal: Vec<f64> = mesh
        .vertices()
        .iter()
        .zip(mesh.boundary_vertices())
        .map(|(&p, &b)| if b { problem.outer_boundary_value(p) } else { 0.0 })
        .collect();
    let stiffness = assemble_stiffness(mesh)?;
    let load = assemble_load(mesh, &f_nodal)?;
    let reduced = apply_constraints_with_boundary(
        &stiffness,
        &load,
        &classification,
        &g_nodal,
        Some(&boundary_nodal),
    )?;
    Ok(DiffuseSystem { classification, stiffness, load, g_nodal, reduced })
}

impl DiffuseSystem {
    pub fn solve<'m>(&self, mesh: &'m Mesh, config: &CgConfig) -> Result<FemSolution<'m>, FemError> {
        let cg = solve_cg(&self.reduced.matrix, &self.reduced.rhs, config)?;
        Ok(FemSolution {
            mesh,
            coefficients: self.reduced.expand(&cg.x),
            classification: self.classification.clone(),
            cg_iterations: cg.iterations,
            cg_relative_residual: cg.relative_residual,
        })
    }

    /// Largest Galerkin residual `|a(u, φ_i) - (I_h f, φ_i)|` over free
    /// vertices, and `‖b‖∞` of the reduced right-hand side it is measured
    /// against.
    pub fn galerkin_residual(&self, coefficients: &[f64]) -> Result<(f64, f64), FemError> {
        let au = self.stiffness.matvec(coefficients)?;
        let max = self
            .reduced
            .dof_map
            .iter()
            .map(|&i| (au[i] - self.load[i]).abs())
            .fold(0.0, f64::max);
        Ok((max, norm_inf(&self.reduced.rhs)))
    }
}

/// Galerkin approximation of the diffuse interface problem with layer
/// half-width `eps`.
pub fn solve_diffuse<'m, P: InterfaceProblem + ?Sized>(
    problem: &P,
    mesh: &'m Mesh,
    eps: f64,
    config: &CgConfig,
) -> Result<FemSolution<'m>, FemError> {
    assemble_diffuse(problem, mesh, eps)?.solve(mesh, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, LevelSet, TestProblem};
    use crate::layer::classify;
    use crate::linalg::{dot, solve_dense_oracle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    /// Data with zero source, a chosen interface value and optionally the
    /// same value on the outer boundary.
    struct Harmonic<G: Fn(Point) -> f64 + Sync> {
        circle: Circle,
        g: G,
        outer_from_g: bool,
    }

    impl<G: Fn(Point) -> f64 + Sync> InterfaceProblem for Harmonic<G> {
        fn level_set(&self) -> &dyn LevelSet {
            &self.circle
        }
        fn source(&self, _x: Point) -> f64 {
            0.0
        }
        fn interface_data(&self, x: Point) -> f64 {
            (self.g)(x)
        }
        fn outer_boundary_value(&self, x: Point) -> f64 {
            if self.outer_from_g {
                (self.g)(x)
            } else {
                0.0
            }
        }
    }

    #[test]
    fn quadrature_weights_sum_to_one() {
        for q in [QuadratureRule::degree2(), QuadratureRule::degree4()] {
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for p in &q.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degree4_rule_integrates_quartics() {
        // ∫_T x^a y^b over the unit triangle = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let q = QuadratureRule::degree4();
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let got = q.integrate(&UNIT, |p| p[0].powi(a as i32) * p[1].powi(b as i32));
                assert!((got - exact).abs() < 1e-14, "x^{a} y^{b}: {got} vs {exact}");
            }
        }
        assert!((q.integrate(&UNIT, |p| p[0].powi(4)) - 1.0 / 30.0).abs() < 1e-15);
        let q2 = QuadratureRule::degree2();
        assert!((q2.integrate(&UNIT, |p| p[0] * p[1]) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn unit_triangle_stiffness() {
        let k = local_stiffness(&UNIT).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        assert_eq!(k, expected);
        assert!(local_stiffness(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_none());
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_symmetric() {
        let m = Mesh::uniform(6).unwrap().refine_marked(&[3, 10, 40]).unwrap();
        let a = assemble_stiffness(&m).unwrap();
        assert!(a.is_symmetric(1e-14));
        for i in 0..a.dim() {
            let (_, vals) = a.row(i);
            let s: f64 = vals.iter().sum();
            assert!(s.abs() < 1e-13, "row {i} sums to {s}");
            assert!(a.get(i, i) > 0.0);
        }
    }

    #[test]
    fn interpolation_examples() {
        let m = Mesh::uniform(2).unwrap();
        assert_eq!(interpolate_nodal(&m, |_| 1.0), vec![1.0; 9]);
        let affine = |p: Point| 0.5 + 2.0 * p[0] - 3.0 * p[1];
        let coeffs = interpolate_nodal(&m, affine);
        let q = QuadratureRule::degree4();
        for t in 0..m.triangle_count() {
            let c = m.corners(t);
            for l in &q.points {
                let x = barycentric_to_point(&c, *l);
                assert!((evaluate_p1(&m, &coeffs, t, *l) - affine(x)).abs() < 1e-14);
            }
        }
        let p = TestProblem::new();
        let g = interpolate_nodal(&m, |x| p.boundary_extension(x));
        assert_eq!(g.len(), 9);
        for (v, x) in m.vertices().iter().enumerate() {
            assert_eq!(g[v], p.boundary_extension(*x));
        }
        let failing: Result<Vec<f64>, &str> = try_interpolate_nodal(&m, |x| if x[0] > 1.0 { Err("bad") } else { Ok(0.0) });
        assert_eq!(failing, Err("bad"));
    }

    #[test]
    fn load_examples() {
        let m = Mesh::uniform(4).unwrap();
        let ones = assemble_load(&m, &vec![1.0; m.vertex_count()]).unwrap();
        assert!((ones.iter().sum::<f64>() - 16.0).abs() < 1e-13);
        // interior vertex: six triangles of area 1/2 around it
        let center = 2 * 5 + 2;
        assert!((ones[center] - 6.0 * 0.5 / 3.0).abs() < 1e-15);
        assert_eq!(assemble_load(&m, &vec![0.0; m.vertex_count()]).unwrap(), vec![0.0; 25]);
        assert!(matches!(assemble_load(&m, &[1.0]), Err(FemError::DimensionMismatch { .. })));

        let single = Mesh::from_triangles(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]], vec![[0, 1, 2]]).unwrap();
        let b = assemble_load(&single, &[1.0, 0.0, 0.0]).unwrap();
        let area: f64 = 3.0;
        for (got, k) in b.iter().zip([2.0, 1.0, 1.0]) {
            assert!((got - area / 12.0 * k).abs() < 1e-15);
        }
    }

    #[test]
    fn load_matches_quadrature_of_interpolant() {
        let m = Mesh::uniform(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f: Vec<f64> = (0..m.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = assemble_load(&m, &f).unwrap();
        let q = QuadratureRule::degree2();
        let mut oracle = vec![0.0; m.vertex_count()];
        for t in 0..m.triangle_count() {
            let tri = m.triangles()[t];
            let area = m.area(t);
            for (p, w) in q.points.iter().zip(&q.weights) {
                let fval = evaluate_p1(&m, &f, t, *p);
                for k in 0..3 {
                    oracle[tri[k]] += area * w * fval * p[k];
                }
            }
        }
        for (a, b) in b.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constraint_examples() {
        let m = Mesh::uniform(8).unwrap();
        let a = assemble_stiffness(&m).unwrap();
        let b = assemble_load(&m, &vec![1.0; m.vertex_count()]).unwrap();
        let mut c = classify(&m, &Circle::unit(), 0.25).unwrap();
        // only the outer boundary constrained
        for vc in c.vertex_constraint.iter_mut() {
            if *vc == VertexConstraint::Layer {
                *vc = VertexConstraint::Free;
            }
        }
        let g: Vec<f64> = (0..m.vertex_count()).map(|v| v as f64).collect();
        let red = apply_constraints(&a, &b, &c, &g).unwrap();
        assert_eq!(red.dof_map.len(), 49);
        for (k, &i) in red.dof_map.iter().enumerate() {
            assert_eq!(red.rhs[k], b[i]);
        }
        for vc in c.vertex_constraint.iter_mut() {
            *vc = VertexConstraint::Layer;
        }
        assert!(matches!(apply_constraints(&a, &b, &c, &g), Err(FemError::NoFreeDofs)));
    }

    #[test]
    fn reduced_solution_satisfies_variational_identity() {
        let m = Mesh::uniform(8).unwrap();
        let p = TestProblem::new();
        let sys = assemble_diffuse(&p, &m, 0.25).unwrap();
        let dense = solve_dense_oracle(&sys.reduced.matrix, &sys.reduced.rhs).unwrap();
        let u = sys.reduced.expand(&dense);
        let (res, scale) = sys.galerkin_residual(&u).unwrap();
        assert!(res <= 1e-10 * scale.max(1.0), "residual {res}");
        // constrained values are exact
        for (v, c) in sys.classification.vertex_constraint.iter().enumerate() {
            match c {
                VertexConstraint::Layer => assert_eq!(u[v], sys.g_nodal[v]),
                VertexConstraint::Boundary => assert_eq!(u[v], 0.0),
                VertexConstraint::Free => {}
            }
        }
    }

    #[test]
    fn reduced_matrix_is_positive_definite() {
        let m = Mesh::uniform(12).unwrap();
        let sys = assemble_diffuse(&TestProblem::new(), &m, 0.1).unwrap();
        let a = &sys.reduced.matrix;
        assert!(a.is_symmetric(1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let x: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(dot(&x, &a.matvec(&x).unwrap()) > 0.0);
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let m = Mesh::uniform(10).unwrap();
        let zero = Harmonic { circle: Circle::unit(), g: |_| 0.0, outer_from_g: false };
        let sol = solve_diffuse(&zero, &m, 0.2, &CgConfig::default()).unwrap();
        assert!(sol.coefficients.iter().all(|&u| u == 0.0));
        assert_eq!(sol.cg_iterations, 0);
    }

    #[test]
    fn affine_data_reproduced_exactly() {
        let affine = |p: Point| 1.0 + 0.3 * p[0] - 0.7 * p[1];
        let problem = Harmonic { circle: Circle::unit(), g: affine, outer_from_g: true };
        let m = Mesh::uniform(16).unwrap().refine_marked(&[100, 200, 300]).unwrap();
        let tight = CgConfig { rel_tolerance: 1e-14, max_iterations: None };
        let sol = solve_diffuse(&problem, &m, 0.1, &tight).unwrap();
        for (v, p) in m.vertices().iter().enumerate() {
            let err = (sol.coefficients[v] - affine(*p)).abs();
            assert!(err <= 1e-12, "vertex {v}: {err:e}");
        }
    }

    #[test]
    fn discrete_maximum_principle() {
        let problem = Harmonic {
            circle: Circle::unit(),
            g: |p: Point| (3.0 * p[0]).sin() + p[1] * p[1],
            outer_from_g: false,
        };
        for (n, eps) in [(16, 0.2), (24, 0.05), (32, 0.3)] {
            let m = Mesh::uniform(n).unwrap();
            let sol = solve_diffuse(&problem, &m, eps, &CgConfig::default()).unwrap();
            let c = &sol.classification;
            let constrained: Vec<f64> = (0..m.vertex_count())
                .filter(|&v| c.is_constrained(v))
                .map(|v| sol.coefficients[v])
                .collect();
            let lo = constrained.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = constrained.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for v in (0..m.vertex_count()).filter(|&v| !c.is_constrained(v)) {
                let u = sol.coefficients[v];
                assert!(u >= lo - 1e-10 && u <= hi + 1e-10);
            }
        }
    }
}
