//! Level-set description of the interface, the clamp profile and the
//! regularized indicator, and the manufactured test problem on `(-2, 2)^2`.
//!
//! Sign convention: the signed distance is negative in the inner region
//! `D1` and positive in the outer region `D2`.

use thiserror::Error;

/// A point of the plane.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("layer width must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("point ({0}, {1}) lies outside the domain")]
    OutsideDomain(f64, f64),
    #[error("point ({0}, {1}) lies on the medial axis; the closest interface point is not unique")]
    MedialAxis(f64, f64),
}

/// Signed distance to an interface curve.
pub trait LevelSet: Sync {
    /// Signed distance `d(x)`, negative inside `D1`.
    fn distance(&self, x: Point) -> f64;

    /// Unit gradient of the distance; `None` where it is undefined.
    fn gradient(&self, x: Point) -> Option<[f64; 2]>;

    /// Closest point on the zero level set, `x - d(x) grad d(x)`.
    fn project(&self, x: Point) -> Option<Point> {
        let d = self.distance(x);
        self.gradient(x).map(|g| [x[0] - d * g[0], x[1] - d * g[1]])
    }
}

/// Circle of given center and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn unit() -> Self {
        Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

impl LevelSet for Circle {
    fn distance(&self, x: Point) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        dx.hypot(dy) - self.radius
    }

    fn gradient(&self, x: Point) -> Option<[f64; 2]> {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let r = dx.hypot(dy);
        if r == 0.0 {
            None
        } else {
            Some([dx / r, dy / r])
        }
    }
}

/// `S(t) = t` for `|t| < 1`, `sign(t)` otherwise.
pub fn clamp_profile(t: f64) -> f64 {
    t.clamp(-1.0, 1.0)
}

/// Regularized indicator of the inner region, `(1 + S(-d / eps)) / 2`.
pub fn omega_eps(d: f64, eps: f64) -> Result<f64, GeometryError> {
    if !(eps > 0.0) {
        return Err(GeometryError::NonPositiveEps(eps));
    }
    Ok(0.5 * (1.0 + clamp_profile(-d / eps)))
}

/// Signed distance to the unit circle, `|x| - 1`.
pub fn circle_signed_distance(x: Point) -> f64 {
    x[0].hypot(x[1]) - 1.0
}

/// Extends interface data constantly along normals: the value at `x` is the
/// surface value at the closest interface point.
pub fn extend_constant_normal<L, F>(
    level_set: &L,
    surface_values: F,
    x: Point,
) -> Result<f64, GeometryError>
where
    L: LevelSet + ?Sized,
    F: Fn(Point) -> f64,
{
    level_set
        .project(x)
        .map(surface_values)
        .ok_or(GeometryError::MedialAxis(x[0], x[1]))
}

/// Data of an interface Dirichlet problem `-Δu = f` off the interface,
/// `u = g` on it.
pub trait InterfaceProblem: Sync {
    fn level_set(&self) -> &dyn LevelSet;

    /// Right-hand side `f`.
    fn source(&self, x: Point) -> f64;

    /// Globally defined interface data `g`.
    fn interface_data(&self, x: Point) -> f64;

    /// Dirichlet value on the outer boundary of the square.
    fn outer_boundary_value(&self, _x: Point) -> f64 {
        0.0
    }
}

/// Reference solution used to measure errors.
pub trait ExactSolution: Sync {
    /// Value and gradient; on the interface the outer branch is returned.
    fn value_gradient(&self, x: Point) -> (f64, [f64; 2]);

    fn level_set(&self) -> &dyn LevelSet;
}

/// The manufactured problem on `(-2, 2)^2` with the unit circle as
/// interface:
///
/// ```text
/// u = (4 - x1^2)(4 - x2^2)                    in D2
/// u = (4 - x1^2)(4 - x2^2) exp(1 - |x|^2)     in D1 and on the circle
/// g = (4 - x1^2)(4 - x2^2) cos(1 - |x|^2)
/// f = -Δu off the circle, 0 on it
/// ```
#[derive(Debug, Clone, Copy)]
pub struct TestProblem {
    interface: Circle,
    half_width: f64,
}

impl Default for TestProblem {
    fn default() -> Self {
        TestProblem {
            interface: Circle::unit(),
            half_width: 2.0,
        }
    }
}

impl TestProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn interface(&self) -> &Circle {
        &self.interface
    }

    /// The square is `(-half_width, half_width)^2`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn contains(&self, x: Point) -> bool {
        x[0].abs() <= self.half_width && x[1].abs() <= self.half_width
    }

    /// `u` and `grad u` at `x`. Points on the circle take the outer branch
    /// for the gradient; both branches agree in value there.
    pub fn evaluate_exact(&self, x: Point) -> Result<(f64, [f64; 2]), GeometryError> {
        if !self.contains(x) {
            return Err(GeometryError::OutsideDomain(x[0], x[1]));
        }
        Ok(self.branch(x, self.interface.distance(x) < 0.0))
    }

    /// Evaluates the inner (`inner == true`) or outer branch of `u`.
    pub fn branch(&self, x: Point, inner: bool) -> (f64, [f64; 2]) {
        let [x1, x2] = x;
        let a = 4.0 - x1 * x1;
        let b = 4.0 - x2 * x2;
        let p = a * b;
        let dp = [-2.0 * x1 * b, -2.0 * x2 * a];
        if inner {
            let e = (1.0 - x1 * x1 - x2 * x2).exp();
            (
                p * e,
                [e * (dp[0] - 2.0 * x1 * p), e * (dp[1] - 2.0 * x2 * p)],
            )
        } else {
            (p, dp)
        }
    }

    /// `f = -Δu`, from closed-form second derivatives of the branch at `x`.
    /// Exactly zero on the interface.
    pub fn evaluate_source(&self, x: Point) -> f64 {
        let d = self.interface.distance(x);
        if d == 0.0 {
            return 0.0;
        }
        let [x1, x2] = x;
        let a = 4.0 - x1 * x1;
        let b = 4.0 - x2 * x2;
        // Δ[(4 - x1^2)(4 - x2^2)]
        let lap_p = -2.0 * (a + b);
        if d > 0.0 {
            return -lap_p;
        }
        let r2 = x1 * x1 + x2 * x2;
        let e = (1.0 - r2).exp();
        // Δ(P E) = ΔP E + 2 ∇P·∇E + P ΔE with ∇E = -2x E, ΔE = (4|x|^2 - 4) E
        let cross = 8.0 * (x1 * x1 * b + x2 * x2 * a);
        let lap = e * (lap_p + cross + a * b * (4.0 * r2 - 4.0));
        -lap
    }

    /// `g = (4 - x1^2)(4 - x2^2) cos(1 - |x|^2)`.
    pub fn boundary_extension(&self, x: Point) -> f64 {
        let [x1, x2] = x;
        (4.0 - x1 * x1) * (4.0 - x2 * x2) * (1.0 - x1 * x1 - x2 * x2).cos()
    }
}

impl InterfaceProblem for TestProblem {
    fn level_set(&self) -> &dyn LevelSet {
        &self.interface
    }

    fn source(&self, x: Point) -> f64 {
        self.evaluate_source(x)
    }

    fn interface_data(&self, x: Point) -> f64 {
        self.boundary_extension(x)
    }
}

impl ExactSolution for TestProblem {
    fn value_gradient(&self, x: Point) -> (f64, [f64; 2]) {
        self.branch(x, self.interface.distance(x) < 0.0)
    }

    fn level_set(&self) -> &dyn LevelSet {
        &self.interface
    }
}
