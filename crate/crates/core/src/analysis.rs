//! Error norms of discrete solutions against a reference solution and
//! least-squares convergence rates.

use thiserror::Error;

use crate::fem::{barycentric_to_point, evaluate_p1, hat_gradients, FemSolution, QuadratureRule};
use crate::geometry::{ExactSolution, Point};
use crate::layer::ElementClass;
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("rate fit needs at least 2 rows, got {0}")]
    WindowTooSmall(usize),
    #[error("non-positive value {0} in the fit window")]
    NonPositive(f64),
    #[error("parameter values must be strictly monotone")]
    NotMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub eps: f64,
    pub h: f64,
    pub delta: f64,
    pub kappa: f64,
    pub l2: f64,
    pub h1_semi: f64,
    /// `sqrt(l2^2 + h1_semi^2)`.
    pub h1_full: f64,
    /// Largest sampled pointwise error over the whole square.
    pub linf_omega: f64,
    /// Largest sampled pointwise error outside the layer elements.
    pub linf_outside: f64,
    pub free_dofs: usize,
    pub vertices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    H1Semi,
    H1Full,
    LinfOmega,
    LinfOutside,
}

impl Norm {
    pub fn of(self, r: &ErrorReport) -> f64 {
        match self {
            Norm::L2 => r.l2,
            Norm::H1Semi => r.h1_semi,
            Norm::H1Full => r.h1_full,
            Norm::LinfOmega => r.linf_omega,
            Norm::LinfOutside => r.linf_outside,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Norm::L2 => "L2",
            Norm::H1Semi => "H1 seminorm",
            Norm::H1Full => "H1",
            Norm::LinfOmega => "Linf",
            Norm::LinfOutside => "Linf outside layer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Eps,
    H,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Eps => "eps",
            Parameter::H => "h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub param: f64,
    pub report: ErrorReport,
}

/// Error reports ordered by a strictly monotone parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub parameter: Parameter,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn new(parameter: Parameter) -> Self {
        ConvergenceTable { parameter, rows: Vec::new() }
    }

    pub fn push(&mut self, param: f64, report: ErrorReport) -> Result<(), AnalysisError> {
        if self.rows.len() >= 2 {
            let a = self.rows[self.rows.len() - 2].param;
            let b = self.rows[self.rows.len() - 1].param;
            if (b - a).signum() != (param - b).signum() || param == b {
                return Err(AnalysisError::NotMonotone);
            }
        } else if let Some(last) = self.rows.last() {
            if last.param == param {
                return Err(AnalysisError::NotMonotone);
            }
        }
        self.rows.push(TableRow { param, report });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn errors(&self, norm: Norm) -> Vec<f64> {
        self.rows.iter().map(|r| norm.of(&r.report)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorOptions {
    /// Maximal recursion depth of the red subdivision applied to elements
    /// that may be cut by the interface.
    pub cut_depth: u32,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        ErrorOptions { cut_depth: 3 }
    }
}

/// Sum with pairwise (cascade) splitting; the result depends only on the
/// order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

struct ElementErrors {
    l2_sq: f64,
    h1_sq: f64,
    linf: f64,
}

/// Integrates the error of the affine function `u_h` (value `uh(l)` at
/// barycentric `l` of the parent, constant gradient `grad_h`) over the
/// sub-triangle `sub` given in parent barycentric coordinates.
#[allow(clippy::too_many_arguments)]
fn integrate_sub<E: ExactSolution + ?Sized>(
    exact: &E,
    parent: &[Point; 3],
    sub: [[f64; 3]; 3],
    uh: &dyn Fn([f64; 3]) -> f64,
    grad_h: [f64; 2],
    depth_left: u32,
    rule: &QuadratureRule,
    acc: &mut ElementErrors,
) {
    let corners = sub.map(|l| barycentric_to_point(parent, l));
    if depth_left > 0 && possibly_cut(exact, &corners) {
        let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
        let [a, b, c] = sub;
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            integrate_sub(exact, parent, child, uh, grad_h, depth_left - 1, rule, acc);
        }
        return;
    }
    let area = 0.5 * ((corners[1][0] - corners[0][0]) * (corners[2][1] - corners[0][1])
        - (corners[1][1] - corners[0][1]) * (corners[2][0] - corners[0][0]))
        .abs();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for (q, w) in rule.points.iter().zip(&rule.weights) {
        let lp = [
            q[0] * sub[0][0] + q[1] * sub[1][0] + q[2] * sub[2][0],
            q[0] * sub[0][1] + q[1] * sub[1][1] + q[2] * sub[2][1],
            q[0] * sub[0][2] + q[1] * sub[1][2] + q[2] * sub[2][2],
        ];
        let x = barycentric_to_point(parent, lp);
        let (u, gu) = exact.value_gradient(x);
        let e = u - uh(lp);
        let ex = gu[0] - grad_h[0];
        let ey = gu[1] - grad_h[1];
        l2 += w * e * e;
        h1 += w * (ex * ex + ey * ey);
        acc.linf = acc.linf.max(e.abs());
    }
    acc.l2_sq += area * l2;
    acc.h1_sq += area * h1;
}

/// Whether the interface may pass through the triangle. Uses that the
/// signed distance is 1-Lipschitz: a vertex farther from the interface
/// than the diameter certifies a constant sign.
fn possibly_cut<E: ExactSolution + ?Sized>(exact: &E, corners: &[Point; 3]) -> bool {
    let ls = exact.level_set();
    let d = corners.map(|p| ls.distance(p));
    let diam = (0..3)
        .map(|k| {
            let p = corners[k];
            let q = corners[(k + 1) % 3];
            (p[0] - q[0]).hypot(p[1] - q[1])
        })
        .fold(0.0, f64::max);
    !d.iter().any(|&v| v.abs() > diam)
}

fn element_errors<E: ExactSolution + ?Sized>(
    mesh: &Mesh,
    coeffs: &[f64],
    exact: &E,
    t: usize,
    rule: &QuadratureRule,
    options: &ErrorOptions,
) -> ElementErrors {
    let corners = mesh.corners(t);
    let tri = mesh.triangles()[t];
    let (grads, _) = hat_gradients(&corners).expect("valid mesh has no degenerate triangles");
    let mut grad_h = [0.0; 2];
    for k in 0..3 {
        grad_h[0] += coeffs[tri[k]] * grads[k][0];
        grad_h[1] += coeffs[tri[k]] * grads[k][1];
    }
    let uh = |l: [f64; 3]| evaluate_p1(mesh, coeffs, t, l);
    let mut acc = ElementErrors { l2_sq: 0.0, h1_sq: 0.0, linf: 0.0 };
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    integrate_sub(exact, &corners, identity, &uh, grad_h, options.cut_depth, rule, &mut acc);
    // vertices and edge midpoints
    let samples = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
    ];
    for l in samples {
        let x = barycentric_to_point(&corners, l);
        let e = exact.value_gradient(x).0 - uh(l);
        acc.linf = acc.linf.max(e.abs());
    }
    acc
}

/// Raw norms of `u - u_h` for the P1 function `coeffs` on `mesh`:
/// `(l2, h1_semi, linf_all, linf_outside)`, where `linf_outside` only
/// samples elements for which `in_layer` is false.
pub fn error_norms_raw<E: ExactSolution + ?Sized>(
    mesh: &Mesh,
    coeffs: &[f64],
    exact: &E,
    in_layer: impl Fn(usize) -> bool,
    options: &ErrorOptions,
) -> (f64, f64, f64, f64) {
    let rule = QuadratureRule::degree4();
    let n = mesh.triangle_count();
    let mut l2 = Vec::with_capacity(n);
    let mut h1 = Vec::with_capacity(n);
    let mut linf_all: f64 = 0.0;
    let mut linf_out: f64 = 0.0;
    for t in 0..n {
        let e = element_errors(mesh, coeffs, exact, t, &rule, options);
        l2.push(e.l2_sq);
        h1.push(e.h1_sq);
        linf_all = linf_all.max(e.linf);
        if !in_layer(t) {
            linf_out = linf_out.max(e.linf);
        }
    }
    (pairwise_sum(&l2).sqrt(), pairwise_sum(&h1).sqrt(), linf_all, linf_out)
}

/// L2, H1 and sampled L∞ errors of a diffuse interface solution.
pub fn error_norms<E: ExactSolution + ?Sized>(solution: &FemSolution<'_>, exact: &E) -> ErrorReport {
    error_norms_with(solution, exact, &ErrorOptions::default())
}

pub fn error_norms_with<E: ExactSolution + ?Sized>(
    solution: &FemSolution<'_>,
    exact: &E,
    options: &ErrorOptions,
) -> ErrorReport {
    let mesh = solution.mesh;
    let class = &solution.classification;
    let (l2, h1_semi, linf_omega, linf_outside) = error_norms_raw(
        mesh,
        &solution.coefficients,
        exact,
        |t| class.element_class[t] == ElementClass::Layer,
        options,
    );
    ErrorReport {
        eps: class.eps,
        h: mesh.metrics().h,
        delta: class.delta,
        kappa: class.kappa,
        l2,
        h1_semi,
        h1_full: l2.hypot(h1_semi),
        linf_omega,
        linf_outside,
        free_dofs: solution.free_dofs(),
        vertices: mesh.vertex_count(),
    }
}

/// Least-squares slope of `log(error)` against `log(param)` over the last
/// `k` rows of the table.
pub fn fit_rate(table: &ConvergenceTable, norm: Norm, k: usize) -> Result<f64, AnalysisError> {
    if k < 2 || table.len() < k {
        return Err(AnalysisError::WindowTooSmall(k.min(table.len())));
    }
    fit_rows(&table.rows[table.len() - k..], norm)
}

/// Number of leading rows before the error saturates. A row is saturated
/// when its error decreased by less than 10% relative to the previous row.
pub fn pre_saturation_len(table: &ConvergenceTable, norm: Norm) -> usize {
    let errors = table.errors(norm);
    (1..errors.len())
        .find(|&i| errors[i] > 0.9 * errors[i - 1])
        .unwrap_or(errors.len())
}

/// Rate fitted over the rows preceding saturation.
pub fn fit_rate_pre_saturation(table: &ConvergenceTable, norm: Norm) -> Result<f64, AnalysisError> {
    let len = pre_saturation_len(table, norm);
    if len < 2 {
        return Err(AnalysisError::WindowTooSmall(len));
    }
    fit_rows(&table.rows[..len], norm)
}

fn fit_rows(rows: &[TableRow], norm: Norm) -> Result<f64, AnalysisError> {
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        let e = norm.of(&r.report);
        for v in [r.param, e] {
            if !(v > 0.0) {
                return Err(AnalysisError::NonPositive(v));
            }
        }
        xs.push(r.param.ln());
        ys.push(e.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, LevelSet};
    use proptest::prelude::*;

    struct Quadratic {
        far: Circle,
    }

    impl ExactSolution for Quadratic {
        fn value_gradient(&self, x: Point) -> (f64, [f64; 2]) {
            (x[0] * x[0], [2.0 * x[0], 0.0])
        }
        fn level_set(&self) -> &dyn LevelSet {
            &self.far
        }
    }

    struct Zero(Circle);

    impl ExactSolution for Zero {
        fn value_gradient(&self, _x: Point) -> (f64, [f64; 2]) {
            (0.0, [0.0, 0.0])
        }
        fn level_set(&self) -> &dyn LevelSet {
            &self.0
        }
    }

    fn report(e: f64) -> ErrorReport {
        ErrorReport {
            eps: 0.0,
            h: 0.0,
            delta: 0.0,
            kappa: 0.0,
            l2: e,
            h1_semi: e,
            h1_full: e,
            linf_omega: e,
            linf_outside: e,
            free_dofs: 0,
            vertices: 0,
        }
    }

    fn table(params: &[f64], errors: &[f64]) -> ConvergenceTable {
        let mut t = ConvergenceTable::new(Parameter::Eps);
        for (&p, &e) in params.iter().zip(errors) {
            t.push(p, report(e)).unwrap();
        }
        t
    }

    #[test]
    fn interpolation_error_of_quadratic() {
        // I_h x^2 = x on the unit triangle; ∫(x^2 - x)^2 = 1/60, ∫(2x - 1)^2 = 1/6
        let mesh = Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let exact = Quadratic { far: Circle { center: [50.0, 50.0], radius: 1.0 } };
        let coeffs = vec![0.0, 1.0, 0.0];
        let (l2, h1, linf, _) = error_norms_raw(&mesh, &coeffs, &exact, |_| false, &ErrorOptions::default());
        assert!((l2 - (1.0f64 / 60.0).sqrt()).abs() < 1e-13);
        assert!((h1 - (1.0f64 / 6.0).sqrt()).abs() < 1e-13);
        // max |x^2 - x| on the samples is at the midpoint x = 1/2
        assert!((linf - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_error_for_zero_data() {
        let mesh = Mesh::uniform(4).unwrap();
        let (l2, h1, a, b) = error_norms_raw(
            &mesh,
            &vec![0.0; mesh.vertex_count()],
            &Zero(Circle::unit()),
            |_| false,
            &ErrorOptions::default(),
        );
        assert_eq!((l2, h1, a, b), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn fit_rate_examples() {
        let t = table(&[1.0, 0.5, 0.25], &[1.0, 0.5, 0.25]);
        assert!((fit_rate(&t, Norm::L2, 3).unwrap() - 1.0).abs() < 1e-14);
        let c = table(&[1.0, 0.5, 0.25], &[3.0, 3.0, 3.0]);
        assert_eq!(fit_rate(&c, Norm::L2, 3).unwrap(), 0.0);
        assert_eq!(fit_rate(&t, Norm::L2, 1), Err(AnalysisError::WindowTooSmall(1)));
        let z = table(&[1.0, 0.5], &[1.0, 0.0]);
        assert_eq!(fit_rate(&z, Norm::L2, 2), Err(AnalysisError::NonPositive(0.0)));
        let last = table(&[1.0, 0.5, 0.25], &[7.0, 1.0, 0.25]);
        assert!((fit_rate(&last, Norm::L2, 2).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn saturation_window() {
        let t = table(&[1.0, 0.5, 0.25, 0.125, 0.0625], &[1.0, 0.5, 0.25, 0.24, 0.239]);
        assert_eq!(pre_saturation_len(&t, Norm::L2), 3);
        assert!((fit_rate_pre_saturation(&t, Norm::L2).unwrap() - 1.0).abs() < 1e-14);
        let flat = table(&[1.0, 0.5], &[1.0, 0.95]);
        assert_eq!(fit_rate_pre_saturation(&flat, Norm::L2), Err(AnalysisError::WindowTooSmall(1)));
    }

    #[test]
    fn table_requires_monotone_parameters() {
        let mut t = ConvergenceTable::new(Parameter::H);
        t.push(1.0, report(1.0)).unwrap();
        assert_eq!(t.push(1.0, report(1.0)), Err(AnalysisError::NotMonotone));
        t.push(0.5, report(1.0)).unwrap();
        assert_eq!(t.push(0.7, report(1.0)), Err(AnalysisError::NotMonotone));
        t.push(0.25, report(1.0)).unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (1..=1000).map(|i| 1.0 / i as f64).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    proptest! {
        #[test]
        fn rate_invariant_under_scaling(scale in 1e-6f64..1e6, r in 0.2f64..3.0) {
            let params = [1.0, 0.5, 0.25, 0.125];
            let errors: Vec<f64> = params.iter().map(|p: &f64| p.powf(r) * (1.0 + 0.1 * p.sin())).collect();
            let scaled: Vec<f64> = errors.iter().map(|e| e * scale).collect();
            let a = fit_rate(&table(&params, &errors), Norm::L2, 4).unwrap();
            let b = fit_rate(&table(&params, &scaled), Norm::L2, 4).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
