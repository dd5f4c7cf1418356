//! Convex action spaces: membership, Euclidean projection and linear minimization.

use crate::error::{check_dim, Error, Result};
use crate::point::Point;

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `{θ : ‖θ − center‖₂ ≤ radius}`
    Ball { center: Point, radius: f64 },
    /// Probability simplex in `dim` coordinates with every entry at least `floor`.
    Simplex { dim: usize, floor: f64 },
    /// Axis-aligned box `lo ≤ θ ≤ hi`.
    Box { lo: Point, hi: Point },
    /// `{θ : ‖θ − center‖₂ ≤ radius, ⟨normal, θ⟩ ≤ offset}`
    BallHalfspace {
        center: Point,
        radius: f64,
        normal: Point,
        offset: f64,
    },
}

/// Output of [`ConvexSet::lmo`]. `degenerate` is set when the direction was
/// zero and the point is merely feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct LmoOutput {
    pub point: Point,
    pub degenerate: bool,
}

impl ConvexSet {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(Point::zeros(dim), radius)
    }

    pub fn simplex(dim: usize, floor: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("simplex dimension must be positive"));
        }
        if !(floor >= 0.0) || floor * dim as f64 >= 1.0 {
            return Err(Error::invalid(format!(
                "simplex floor {floor} must satisfy 0 <= floor < 1/{dim}"
            )));
        }
        Ok(ConvexSet::Simplex { dim, floor })
    }

    pub fn boxed(lo: Point, hi: Point) -> Result<Self> {
        check_dim(lo.dim(), hi.dim())?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| !(l <= h)) {
            return Err(Error::invalid("box requires lo <= hi coordinatewise"));
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    /// Ball cut by the halfspace `⟨normal, θ⟩ ≤ offset`; rejected when the
    /// halfspace misses the ball entirely.
    pub fn ball_halfspace(center: Point, radius: f64, normal: Point, offset: f64) -> Result<Self> {
        check_dim(center.dim(), normal.dim())?;
        if !(radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        let nn = normal.norm();
        if nn == 0.0 {
            return Err(Error::invalid("halfspace normal must be nonzero"));
        }
        if normal.dot(&center) - radius * nn > offset {
            return Err(Error::Infeasible(
                "halfspace excludes the whole ball".into(),
            ));
        }
        Ok(ConvexSet::BallHalfspace {
            center,
            radius,
            normal,
            offset,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } | ConvexSet::BallHalfspace { center, .. } => center.dim(),
            ConvexSet::Simplex { dim, .. } => *dim,
            ConvexSet::Box { lo, .. } => lo.dim(),
        }
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        if p.dim() != self.dim() || !p.is_finite() {
            return false;
        }
        match self {
            ConvexSet::Ball { center, radius } => p.dist(center) <= radius + tol,
            ConvexSet::Simplex { floor, .. } => {
                (p.sum() - 1.0).abs() <= tol && p.iter().all(|&x| x >= floor - tol)
            }
            ConvexSet::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(&x, (&l, &h))| x >= l - tol && x <= h + tol),
            ConvexSet::BallHalfspace {
                center,
                radius,
                normal,
                offset,
            } => p.dist(center) <= radius + tol && normal.dot(p) <= offset + tol * normal.norm(),
        }
    }

    /// Some feasible point.
    pub fn anchor(&self) -> Point {
        match self {
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Simplex { dim, .. } => Point::filled(*dim, 1.0 / *dim as f64),
            ConvexSet::Box { lo, hi } => lo.lerp(hi, 0.5),
            ConvexSet::BallHalfspace { center, normal, offset, .. } => {
                if normal.dot(center) <= *offset {
                    center.clone()
                } else {
                    hyperplane_foot(center, normal, *offset)
                }
            }
        }
    }

    /// Largest ℓ2 distance between two points of the set (an upper bound for
    /// the ball-halfspace intersection).
    pub fn euclidean_diameter(&self) -> f64 {
        match self {
            ConvexSet::Ball { radius, .. } | ConvexSet::BallHalfspace { radius, .. } => 2.0 * radius,
            ConvexSet::Simplex { dim, floor } => {
                if *dim == 1 {
                    0.0
                } else {
                    std::f64::consts::SQRT_2 * (1.0 - *dim as f64 * floor)
                }
            }
            ConvexSet::Box { lo, hi } => lo.dist(hi),
        }
    }

    /// `max_{θ ∈ set} ‖θ − p‖₂` (the ball bound for the ball-halfspace intersection).
    pub fn max_distance_from(&self, p: &Point) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } | ConvexSet::BallHalfspace { center, radius, .. } => {
                p.dist(center) + radius
            }
            ConvexSet::Simplex { dim, floor } => (0..*dim)
                .map(|i| {
                    let mut v = Point::filled(*dim, *floor);
                    v[i] = 1.0 - (*dim as f64 - 1.0) * floor;
                    v.dist(p)
                })
                .fold(0.0, f64::max),
            ConvexSet::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(&x, (&l, &h))| ((x - l).abs()).max((h - x).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Euclidean projection.
    pub fn project(&self, p: &Point) -> Point {
        debug_assert_eq!(p.dim(), self.dim());
        match self {
            ConvexSet::Ball { center, radius } => project_ball(center, *radius, p),
            ConvexSet::Simplex { dim, floor } => {
                let budget = 1.0 - *dim as f64 * floor;
                let shifted: Vec<f64> = p.iter().map(|x| x - floor).collect();
                let q = project_scaled_simplex(&shifted, budget);
                Point::new(q.into_iter().map(|x| x + floor).collect())
            }
            ConvexSet::Box { lo, hi } => Point::new(
                p.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(&x, (&l, &h))| x.clamp(l, h))
                    .collect(),
            ),
            ConvexSet::BallHalfspace {
                center,
                radius,
                normal,
                offset,
            } => {
                let in_half = |q: &Point| normal.dot(q) <= *offset;
                let in_ball = |q: &Point| q.dist(center) <= *radius;
                if in_half(p) && in_ball(p) {
                    return p.clone();
                }
                let pb = project_ball(center, *radius, p);
                if in_half(&pb) {
                    return pb;
                }
                let ph = project_halfspace(normal, *offset, p);
                if in_ball(&ph) {
                    return ph;
                }
                // Both constraints active: nearest point of the boundary circle.
                let (foot, circle_radius) = circle(center, *radius, normal, *offset);
                let ph_plane = hyperplane_foot(p, normal, *offset);
                let dir = ph_plane.sub(&foot);
                let n = dir.norm();
                if n == 0.0 || circle_radius == 0.0 {
                    foot
                } else {
                    foot.add(&dir.scale(circle_radius / n))
                }
            }
        }
    }

    /// Linear minimization oracle: `argmin_{s ∈ set} ⟨direction, s⟩`.
    pub fn lmo(&self, direction: &Point) -> LmoOutput {
        debug_assert_eq!(direction.dim(), self.dim());
        if direction.iter().all(|&x| x == 0.0) {
            return LmoOutput {
                point: self.anchor(),
                degenerate: true,
            };
        }
        let point = match self {
            ConvexSet::Ball { center, radius } => ball_lmo(center, *radius, direction),
            ConvexSet::Simplex { dim, floor } => {
                let mut best = 0;
                for i in 1..*dim {
                    if direction[i] < direction[best] {
                        best = i;
                    }
                }
                let mut v = Point::filled(*dim, *floor);
                v[best] = 1.0 - (*dim as f64 - 1.0) * floor;
                v
            }
            ConvexSet::Box { lo, hi } => Point::new(
                direction
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(&g, (&l, &h))| if g > 0.0 { l } else if g < 0.0 { h } else { l })
                    .collect(),
            ),
            ConvexSet::BallHalfspace {
                center,
                radius,
                normal,
                offset,
            } => {
                let s = ball_lmo(center, *radius, direction);
                if normal.dot(&s) <= *offset {
                    s
                } else {
                    // The halfspace is active, so the minimizer lies on the circle
                    // where the sphere meets the hyperplane; only the component of
                    // the direction tangent to the hyperplane matters there.
                    let (foot, circle_radius) = circle(center, *radius, normal, *offset);
                    let tangent = direction.sub(&normal.scale(direction.dot(normal) / normal.norm_sq()));
                    let tn = tangent.norm();
                    if circle_radius == 0.0 {
                        foot
                    } else if tn <= 1e-12 * direction.norm() {
                        let v = orthogonal_unit(normal);
                        foot.add(&v.scale(circle_radius))
                    } else {
                        foot.add(&tangent.scale(-circle_radius / tn))
                    }
                }
            }
        };
        LmoOutput {
            point,
            degenerate: false,
        }
    }
}

fn project_ball(center: &Point, radius: f64, p: &Point) -> Point {
    let diff = p.sub(center);
    let n = diff.norm();
    if n <= radius {
        p.clone()
    } else {
        center.add(&diff.scale(radius / n))
    }
}

fn ball_lmo(center: &Point, radius: f64, direction: &Point) -> Point {
    let n = direction.norm();
    center.add(&direction.scale(-radius / n))
}

fn project_halfspace(normal: &Point, offset: f64, p: &Point) -> Point {
    let excess = normal.dot(p) - offset;
    if excess <= 0.0 {
        p.clone()
    } else {
        p.add(&normal.scale(-excess / normal.norm_sq()))
    }
}

fn hyperplane_foot(p: &Point, normal: &Point, offset: f64) -> Point {
    let excess = normal.dot(p) - offset;
    p.add(&normal.scale(-excess / normal.norm_sq()))
}

/// Center and radius of the circle where the sphere meets the hyperplane.
fn circle(center: &Point, radius: f64, normal: &Point, offset: f64) -> (Point, f64) {
    let foot = hyperplane_foot(center, normal, offset);
    let h2 = foot.dist_sq(center);
    (foot, (radius * radius - h2).max(0.0).sqrt())
}

/// First canonical basis vector (in index order) with a nonzero component
/// orthogonal to `v`, orthonormalized against `v`.
fn orthogonal_unit(v: &Point) -> Point {
    let vn = v.norm();
    let u = v.scale(1.0 / vn);
    for i in 0..v.dim() {
        let mut e = Point::basis(v.dim(), i);
        e.axpy(-u[i], &u);
        let n = e.norm();
        if n > 1e-6 {
            return e.scale(1.0 / n);
        }
    }
    // dim == 1: no orthogonal direction exists.
    Point::zeros(v.dim())
}

/// Projection of `y` onto `{x ≥ 0, Σx = budget}` by the sort-and-threshold rule.
fn project_scaled_simplex(y: &[f64], budget: f64) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut threshold = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - budget) / (k as f64 + 1.0);
        if u - t > 0.0 {
            threshold = t;
        }
    }
    y.iter().map(|&x| (x - threshold).max(0.0)).collect()
}
