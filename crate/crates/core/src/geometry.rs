//! Small planar-geometry helpers shared by the mesh and assembly layers.

use nalgebra::{Point2, Vector2};

/// Signed area of the triangle (a, b, c); positive for counterclockwise order.
pub fn signed_area(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Diameter (longest edge) of a triangle.
pub fn triangle_diameter(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    let ab = (b - a).norm();
    let bc = (c - b).norm();
    let ca = (a - c).norm();
    ab.max(bc).max(ca)
}

/// Incircle diameter of a triangle: 2r with r = area / semiperimeter.
pub fn incircle_diameter(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    let area = signed_area(a, b, c).abs();
    let perimeter = (b - a).norm() + (c - b).norm() + (a - c).norm();
    4.0 * area / perimeter
}

/// Gradients of the three P1 basis functions on the triangle (a, b, c).
///
/// Entry i is the (constant) gradient of the affine function equal to 1 at
/// vertex i and 0 at the two others.
pub fn p1_gradients(
    a: Point2<f64>,
    b: Point2<f64>,
    c: Point2<f64>,
) -> [Vector2<f64>; 3] {
    let two_area = 2.0 * signed_area(a, b, c);
    // grad of the barycentric coordinate of vertex i is the rotated opposite
    // edge divided by twice the signed area.
    let ga = Vector2::new(b.y - c.y, c.x - b.x) / two_area;
    let gb = Vector2::new(c.y - a.y, a.x - c.x) / two_area;
    let gc = Vector2::new(a.y - b.y, b.x - a.x) / two_area;
    [ga, gb, gc]
}

/// Barycentric coordinates of `p` in the triangle (a, b, c).
pub fn barycentric(
    a: Point2<f64>,
    b: Point2<f64>,
    c: Point2<f64>,
    p: Point2<f64>,
) -> [f64; 3] {
    let total = signed_area(a, b, c);
    let wa = signed_area(p, b, c) / total;
    let wb = signed_area(a, p, c) / total;
    let wc = signed_area(a, b, p) / total;
    [wa, wb, wc]
}

/// Shoelace area of a closed polygon given by its vertices in order.
pub fn polygon_area(points: &[Point2<f64>]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    0.5 * twice
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_right_triangle_quantities() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        let c = Point2::new(0.0, 1.0);
        assert_relative_eq!(signed_area(a, b, c), 0.5);
        assert_relative_eq!(triangle_diameter(a, b, c), 2.0f64.sqrt());
        // incircle radius of a right triangle is (leg + leg - hyp) / 2
        assert_relative_eq!(
            incircle_diameter(a, b, c),
            2.0 - 2.0f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn p1_gradients_reproduce_affine() {
        let a = Point2::new(0.2, 0.1);
        let b = Point2::new(1.3, 0.4);
        let c = Point2::new(0.5, 1.1);
        let grads = p1_gradients(a, b, c);
        // nodal values of u(x, y) = 3x - 2y + 1
        let u = |p: Point2<f64>| 3.0 * p.x - 2.0 * p.y + 1.0;
        let g = grads[0] * u(a) + grads[1] * u(b) + grads[2] * u(c);
        assert_relative_eq!(g.x, 3.0, epsilon = 1e-13);
        assert_relative_eq!(g.y, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn polygon_area_square() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        assert_relative_eq!(polygon_area(&pts), 4.0);
    }
}
