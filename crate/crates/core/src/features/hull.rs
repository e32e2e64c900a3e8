//! 3D convex hull volume via incremental insertion.
//!
//! Coordinates are normalized to O(1) magnitude before the orientation
//! tests, with a relative epsilon of 1e-10, so coplanar and collinear
//! subsets resolve to an exact zero volume instead of sign noise.

use std::collections::HashMap;

use crate::geometry::{self, Point3};

use super::FeatureError;

const ORIENT_EPS: f64 = 1e-10;

#[derive(Clone, Copy)]
struct Face {
    a: usize,
    b: usize,
    c: usize,
}

fn orient(points: &[Point3], face: Face, p: usize) -> f64 {
    geometry::signed_volume(points[face.a], points[face.b], points[face.c], points[p])
}

/// Volume of the convex hull of `points`; 0 when the points are affinely
/// dependent (coincident, collinear, or coplanar).
pub fn convex_hull_volume(points: &[Point3]) -> Result<f64, FeatureError> {
    for (index, p) in points.iter().enumerate() {
        if !geometry::is_finite(*p) {
            return Err(FeatureError::NonFinitePoint { index });
        }
    }
    if points.len() < 4 {
        return Ok(0.0);
    }

    // Normalize: center on the bounding-box midpoint, scale by the largest
    // half-extent (powers of two would be exact, but any positive scale
    // keeps the epsilon meaningful).
    let (lo, hi) = geometry::bounding_box(points);
    let center = [
        (lo[0] + hi[0]) / 2.0,
        (lo[1] + hi[1]) / 2.0,
        (lo[2] + hi[2]) / 2.0,
    ];
    let half_extent = (0..3)
        .map(|axis| (hi[axis] - lo[axis]) / 2.0)
        .fold(0.0_f64, f64::max);
    if half_extent == 0.0 {
        return Ok(0.0);
    }
    let scaled: Vec<Point3> = points
        .iter()
        .map(|p| geometry::scale(geometry::sub(*p, center), 1.0 / half_extent))
        .collect();

    let volume = hull_volume_normalized(&scaled);
    Ok(volume * half_extent.powi(3))
}

fn hull_volume_normalized(points: &[Point3]) -> f64 {
    let n = points.len();

    // Seed tetrahedron: two extreme points, the point farthest from their
    // line, and the point farthest from their plane.
    let p0 = 0;
    let p1 = match (1..n).max_by(|&i, &j| {
        geometry::distance(points[p0], points[i])
            .partial_cmp(&geometry::distance(points[p0], points[j]))
            .unwrap()
    }) {
        Some(i) if geometry::distance(points[p0], points[i]) > ORIENT_EPS => i,
        _ => return 0.0,
    };
    let line = geometry::sub(points[p1], points[p0]);
    let area_of = |i: usize| {
        geometry::norm(geometry::cross(line, geometry::sub(points[i], points[p0])))
    };
    let p2 = match (0..n).filter(|&i| i != p0 && i != p1).max_by(|&i, &j| {
        area_of(i).partial_cmp(&area_of(j)).unwrap()
    }) {
        Some(i) if area_of(i) > ORIENT_EPS => i,
        _ => return 0.0,
    };
    let vol_of = |i: usize| {
        geometry::signed_volume(points[p0], points[p1], points[p2], points[i]).abs()
    };
    let p3 = match (0..n)
        .filter(|&i| i != p0 && i != p1 && i != p2)
        .max_by(|&i, &j| vol_of(i).partial_cmp(&vol_of(j)).unwrap())
    {
        Some(i) if vol_of(i) > ORIENT_EPS => i,
        _ => return 0.0,
    };

    // Orient the seed so every face has its fourth vertex behind it.
    let (p1, p2) =
        if geometry::signed_volume(points[p0], points[p1], points[p2], points[p3]) > 0.0 {
            (p2, p1)
        } else {
            (p1, p2)
        };

    let mut faces: Vec<Face> = vec![
        Face { a: p0, b: p1, c: p2 },
        Face { a: p0, b: p3, c: p1 },
        Face { a: p0, b: p2, c: p3 },
        Face { a: p1, b: p3, c: p2 },
    ];
    let mut alive = vec![true; faces.len()];

    let mut remaining: Vec<usize> = (0..n)
        .filter(|&i| i != p0 && i != p1 && i != p2 && i != p3)
        .collect();
    // Farthest-first insertion keeps intermediate hulls fat, which is
    // kinder to the epsilon tests.
    remaining.sort_by(|&i, &j| {
        geometry::norm(points[j])
            .partial_cmp(&geometry::norm(points[i]))
            .unwrap()
    });

    for p in remaining {
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| alive[f] && orient(points, faces[f], p) > ORIENT_EPS)
            .collect();
        if visible.is_empty() {
            continue;
        }

        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, face) in faces.iter().enumerate() {
            if alive[f] {
                edge_owner.insert((face.a, face.b), f);
                edge_owner.insert((face.b, face.c), f);
                edge_owner.insert((face.c, face.a), f);
            }
        }
        let is_visible = |f: usize| visible.contains(&f);

        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &f in &visible {
            let face = faces[f];
            for (u, v) in [(face.a, face.b), (face.b, face.c), (face.c, face.a)] {
                if let Some(&neighbor) = edge_owner.get(&(v, u)) {
                    if !is_visible(neighbor) {
                        horizon.push((u, v));
                    }
                }
            }
        }
        for &f in &visible {
            alive[f] = false;
        }
        for (u, v) in horizon {
            faces.push(Face { a: u, b: v, c: p });
            alive.push(true);
        }
    }

    let six_volume: f64 = faces
        .iter()
        .zip(&alive)
        .filter(|(_, &keep)| keep)
        .map(|(face, _)| {
            geometry::dot(
                points[face.a],
                geometry::cross(points[face.b], points[face.c]),
            )
        })
        .sum();
    six_volume.abs() / 6.0
}
