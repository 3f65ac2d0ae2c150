//! Discrete diffuse layer: which elements carry the interface constraint,
//! which straddle the layer boundary, and the resulting resolution
//! parameters `delta` and `kappa`.
//!
//! All decisions use the nodal interpolant of the signed distance only.

use std::fmt;

use thiserror::Error;

use crate::geometry::LevelSet;
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("layer width must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("layer width {eps} leaves no element on the {side} side of the layer")]
    Degenerate { eps: f64, side: &'static str },
    #[error("classifications belong to different meshes")]
    MeshMismatch,
    #[error("monotonicity check needs eps1 <= eps2, got {0} > {1}")]
    EpsOrder(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    /// All nodal distances at or below `-eps`.
    Inside,
    /// The interpolated indicator is non-constant on the element.
    Layer,
    /// All nodal distances at or above `eps`.
    Outside,
}

impl ElementClass {
    pub fn label(self) -> &'static str {
        match self {
            ElementClass::Inside => "INSIDE",
            ElementClass::Layer => "LAYER",
            ElementClass::Outside => "OUTSIDE",
        }
    }
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Constraint status of a vertex. The outer boundary wins over the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexConstraint {
    Free,
    Layer,
    Boundary,
}

/// Strict rule: layer iff `min < eps` and `max > -eps`.
pub fn classify_values(values: [f64; 3], eps: f64) -> ElementClass {
    let (lo, hi) = min_max(values);
    if lo < eps && hi > -eps {
        ElementClass::Layer
    } else if hi <= -eps {
        ElementClass::Inside
    } else {
        ElementClass::Outside
    }
}

/// Whether the affine interpolant of `values` attains `level`.
pub fn straddles(values: [f64; 3], level: f64) -> bool {
    let (lo, hi) = min_max(values);
    lo <= level && level <= hi
}

/// Whether an element meets the layer boundary `{|d| = width}`.
pub fn meets_layer_boundary(values: [f64; 3], width: f64) -> bool {
    straddles(values, width) || straddles(values, -width)
}

fn min_max(v: [f64; 3]) -> (f64, f64) {
    (v[0].min(v[1]).min(v[2]), v[0].max(v[1]).max(v[2]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerClassification {
    pub element_class: Vec<ElementClass>,
    pub vertex_constraint: Vec<VertexConstraint>,
    pub eps: f64,
    /// Largest diameter of an element meeting `{|d| = eps}`.
    pub delta: f64,
    /// Largest diameter of an element meeting `{|d| = eps + delta}`.
    pub kappa: f64,
    /// Nodal values of the signed distance.
    pub nodal_distance: Vec<f64>,
    /// Layer vertices overridden by the outer boundary condition.
    pub boundary_conflicts: usize,
}

impl LayerClassification {
    pub fn is_constrained(&self, v: usize) -> bool {
        self.vertex_constraint[v] != VertexConstraint::Free
    }

    pub fn count(&self, class: ElementClass) -> usize {
        self.element_class.iter().filter(|&&c| c == class).count()
    }

    pub fn layer_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.element_class
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == ElementClass::Layer)
            .map(|(t, _)| t)
    }

    pub fn free_count(&self) -> usize {
        self.vertex_constraint
            .iter()
            .filter(|&&c| c == VertexConstraint::Free)
            .count()
    }
}

/// Nodal interpolant of the signed distance.
pub fn nodal_distance<L: LevelSet + ?Sized>(mesh: &Mesh, level_set: &L) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| level_set.distance(p)).collect()
}

fn element_values(mesh: &Mesh, nodal: &[f64], t: usize) -> [f64; 3] {
    let [a, b, c] = mesh.triangles()[t];
    [nodal[a], nodal[b], nodal[c]]
}

/// Classifies every element of `mesh` for the layer of half-width `eps`
/// around the zero set of `level_set`.
pub fn classify<L: LevelSet + ?Sized>(
    mesh: &Mesh,
    level_set: &L,
    eps: f64,
) -> Result<LayerClassification, LayerError> {
    classify_nodal(mesh, nodal_distance(mesh, level_set), eps)
}

/// Classification from precomputed nodal distances.
pub fn classify_nodal(
    mesh: &Mesh,
    nodal_distance: Vec<f64>,
    eps: f64,
) -> Result<LayerClassification, LayerError> {
    if !(eps > 0.0) {
        return Err(LayerError::NonPositiveEps(eps));
    }
    assert_eq!(nodal_distance.len(), mesh.vertex_count());
    let element_class: Vec<ElementClass> = (0..mesh.triangle_count())
        .map(|t| classify_values(element_values(mesh, &nodal_distance, t), eps))
        .collect();
    if !element_class.contains(&ElementClass::Inside) {
        return Err(LayerError::Degenerate { eps, side: "inside" });
    }
    if !element_class.contains(&ElementClass::Outside) {
        return Err(LayerError::Degenerate { eps, side: "outside" });
    }

    let mut vertex_constraint: Vec<VertexConstraint> = mesh
        .boundary_vertices()
        .iter()
        .map(|&b| if b { VertexConstraint::Boundary } else { VertexConstraint::Free })
        .collect();
    let mut boundary_conflicts = 0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if element_class[t] != ElementClass::Layer {
            continue;
        }
        for &v in tri {
            match vertex_constraint[v] {
                VertexConstraint::Free => vertex_constraint[v] = VertexConstraint::Layer,
                VertexConstraint::Boundary => boundary_conflicts += 1,
                VertexConstraint::Layer => {}
            }
        }
    }
    if boundary_conflicts > 0 {
        log::warn!(
            "{boundary_conflicts} layer element vertices lie on the outer boundary; the boundary value is kept"
        );
    }

    let delta = max_diameter_meeting(mesh, &nodal_distance, eps);
    let kappa = max_diameter_meeting(mesh, &nodal_distance, eps + delta);
    Ok(LayerClassification {
        element_class,
        vertex_constraint,
        eps,
        delta,
        kappa,
        nodal_distance,
        boundary_conflicts,
    })
}

fn max_diameter_meeting(mesh: &Mesh, nodal: &[f64], width: f64) -> f64 {
    (0..mesh.triangle_count())
        .filter(|&t| meets_layer_boundary(element_values(mesh, nodal, t), width))
        .map(|t| mesh.diameter(t))
        .fold(0.0, f64::max)
}

/// Elements whose nodal distance values reach `eps` or `-eps`, in
/// increasing order.
pub fn mark_layer_boundary<L: LevelSet + ?Sized>(mesh: &Mesh, level_set: &L, eps: f64) -> Vec<usize> {
    mark_nodal(mesh, &nodal_distance(mesh, level_set), eps)
}

pub fn mark_nodal(mesh: &Mesh, nodal: &[f64], width: f64) -> Vec<usize> {
    (0..mesh.triangle_count())
        .filter(|&t| meets_layer_boundary(element_values(mesh, nodal, t), width))
        .collect()
}

/// Checks `LAYER(c1) ⊆ LAYER(c2)` for two classifications of the same mesh
/// with `c1.eps <= c2.eps`.
pub fn layer_monotonicity_check(
    c1: &LayerClassification,
    c2: &LayerClassification,
) -> Result<bool, LayerError> {
    if c1.element_class.len() != c2.element_class.len() || c1.nodal_distance != c2.nodal_distance {
        return Err(LayerError::MeshMismatch);
    }
    if c1.eps > c2.eps {
        return Err(LayerError::EpsOrder(c1.eps, c2.eps));
    }
    Ok(c1
        .element_class
        .iter()
        .zip(&c2.element_class)
        .all(|(&a, &b)| a != ElementClass::Layer || b == ElementClass::Layer))
}
