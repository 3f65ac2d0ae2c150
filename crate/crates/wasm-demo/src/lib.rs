//! Browser bindings for three views of the method: the layer classification
//! of a uniform mesh, the discrete solution, and a mesh refined near the
//! layer boundary. Every view is a flat triangle soup that the page draws on
//! a canvas.

use diffuse_core::experiment::refine_to_target;
use diffuse_core::geometry::InterfaceProblem;
use diffuse_core::{classify, error_norms, solve_diffuse, CgConfig, ElementClass, Mesh, TestProblem};
use wasm_bindgen::prelude::*;

/// Flattened mesh with one label per triangle and optional nodal values.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct View {
    coords: Vec<f64>,
    triangles: Vec<u32>,
    labels: Vec<u8>,
    values: Vec<f64>,
    stats: Vec<f64>,
}

#[wasm_bindgen]
impl View {
    /// `x0, y0, x1, y1, ...`
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Three vertex indices per triangle.
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    /// 0 inside, 1 layer, 2 outside.
    pub fn labels(&self) -> Vec<u8> {
        self.labels.clone()
    }

    /// Nodal values; empty for views without a solution.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// `[delta, kappa, vertices, triangles, l2, h1, linf]`; error entries are
    /// NaN when nothing was solved.
    pub fn stats(&self) -> Vec<f64> {
        self.stats.clone()
    }
}

fn label_code(c: ElementClass) -> u8 {
    match c {
        ElementClass::Inside => 0,
        ElementClass::Layer => 1,
        ElementClass::Outside => 2,
    }
}

fn flatten(mesh: &Mesh, labels: &[ElementClass], delta: f64, kappa: f64) -> View {
    View {
        coords: mesh.vertices().iter().flat_map(|p| [p[0], p[1]]).collect(),
        triangles: mesh.triangles().iter().flatten().map(|&v| v as u32).collect(),
        labels: labels.iter().map(|&c| label_code(c)).collect(),
        values: Vec::new(),
        stats: vec![
            delta,
            kappa,
            mesh.vertex_count() as f64,
            mesh.triangle_count() as f64,
            f64::NAN,
            f64::NAN,
            f64::NAN,
        ],
    }
}

/// Layer labels of the uniform `n` mesh for half-width `eps`.
pub fn layer(n: usize, eps: f64) -> Result<View, String> {
    let problem = TestProblem::default();
    let mesh = Mesh::uniform(n).map_err(|e| e.to_string())?;
    let c = classify(&mesh, problem.level_set(), eps).map_err(|e| e.to_string())?;
    Ok(flatten(&mesh, &c.element_class, c.delta, c.kappa))
}

/// Discrete solution on the uniform `n` mesh with its errors.
pub fn solution(n: usize, eps: f64) -> Result<View, String> {
    let problem = TestProblem::default();
    let mesh = Mesh::uniform(n).map_err(|e| e.to_string())?;
    let sol = solve_diffuse(&problem, &mesh, eps, &CgConfig::default()).map_err(|e| e.to_string())?;
    let r = error_norms(&sol, &problem);
    let mut view = flatten(&mesh, &sol.classification.element_class, r.delta, r.kappa);
    view.stats[4..].copy_from_slice(&[r.l2, r.h1_full, r.linf_omega]);
    view.values = sol.coefficients;
    Ok(view)
}

/// Uniform `n` mesh refined until `delta <= h^2` and `kappa <= 4 delta`.
pub fn refined(n: usize, eps: f64) -> Result<View, String> {
    let problem = TestProblem::default();
    let base = Mesh::uniform(n).map_err(|e| e.to_string())?;
    let h = base.metrics().h;
    let (mesh, _) = refine_to_target(&base, &problem, eps, h * h, 40).map_err(|e| e.to_string())?;
    let c = classify(&mesh, problem.level_set(), eps).map_err(|e| e.to_string())?;
    Ok(flatten(&mesh, &c.element_class, c.delta, c.kappa))
}

#[wasm_bindgen(js_name = layerView)]
pub fn layer_view(n: usize, eps: f64) -> Result<View, JsError> {
    layer(n, eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solutionView)]
pub fn solution_view(n: usize, eps: f64) -> Result<View, JsError> {
    solution(n, eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = refinedView)]
pub fn refined_view(n: usize, eps: f64) -> Result<View, JsError> {
    refined(n, eps).map_err(|e| JsError::new(&e))
}
