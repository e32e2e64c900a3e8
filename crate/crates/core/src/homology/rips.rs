//! Vietoris-Rips filtration construction.

use arrayvec::ArrayVec;

use super::{DistanceMatrix, Filtration, Simplex};

/// Enumerate all simplices of dimension <= `max_homology_dim + 1` with
/// filtration value (max pairwise distance) <= `max_eps`, sorted by
/// (value, dimension, lexicographic vertices).
///
/// `max_homology_dim` must be 0, 1, or 2; one dimension above it is
/// enumerated so deaths in the top homology dimension are observed.
pub fn vietoris_rips(dm: &DistanceMatrix, max_homology_dim: u8, max_eps: f64) -> Filtration {
    assert!(max_homology_dim <= 2, "homology dimension capped at 2");
    let n = dm.len();
    let max_simplex_dim = max_homology_dim as usize + 1;
    let mut simplices: Vec<Simplex> = Vec::with_capacity(n * 2);

    for v in 0..n as u32 {
        let mut vertices = ArrayVec::new();
        vertices.push(v);
        simplices.push(Simplex { vertices, value: 0.0 });
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dm.get(i, j);
            if dij > max_eps {
                continue;
            }
            push(&mut simplices, &[i as u32, j as u32], dij);
            if max_simplex_dim < 2 {
                continue;
            }
            for k in (j + 1)..n {
                let dik = dm.get(i, k);
                let djk = dm.get(j, k);
                let vijk = dij.max(dik).max(djk);
                if vijk > max_eps {
                    continue;
                }
                push(&mut simplices, &[i as u32, j as u32, k as u32], vijk);
                if max_simplex_dim < 3 {
                    continue;
                }
                for l in (k + 1)..n {
                    let vijkl = vijk.max(dm.get(i, l)).max(dm.get(j, l)).max(dm.get(k, l));
                    if vijkl > max_eps {
                        continue;
                    }
                    push(
                        &mut simplices,
                        &[i as u32, j as u32, k as u32, l as u32],
                        vijkl,
                    );
                }
            }
        }
    }

    simplices.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .expect("filtration values are finite")
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.as_slice().cmp(b.vertices.as_slice()))
    });

    Filtration {
        simplices,
        n_points: n,
        max_homology_dim,
    }
}

fn push(simplices: &mut Vec<Simplex>, vertices: &[u32], value: f64) {
    simplices.push(Simplex {
        vertices: vertices.iter().copied().collect(),
        value,
    });
}

#[cfg(test)]
mod tests {
    use super::super::distance_matrix;
    use super::*;

    #[test]
    fn equilateral_triangle_counts() {
        let h = 3.0_f64.sqrt() / 2.0;
        let points = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]];
        let dm = distance_matrix(&points).unwrap();
        let filtration = vietoris_rips(&dm, 1, 2.0);
        let by_dim = |d: usize| filtration.simplices.iter().filter(|s| s.dim() == d).count();
        assert_eq!(by_dim(0), 3);
        assert_eq!(by_dim(1), 3);
        assert_eq!(by_dim(2), 1);
        for s in &filtration.simplices {
            if s.dim() > 0 {
                assert!((s.value - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(s.value, 0.0);
            }
        }
    }

    #[test]
    fn threshold_cuts_distant_pair() {
        let points = [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]];
        let dm = distance_matrix(&points).unwrap();
        let filtration = vietoris_rips(&dm, 1, 1.0);
        assert_eq!(filtration.simplices.len(), 2);
        assert!(filtration.simplices.iter().all(|s| s.dim() == 0));
    }

    #[test]
    fn square_full_complex_has_fifteen_simplices() {
        let dm = distance_matrix(&super::super::tests::unit_square()).unwrap();
        let filtration = vietoris_rips(&dm, 2, f64::INFINITY);
        // 4 vertices + 6 edges + 4 triangles + 1 tetrahedron
        assert_eq!(filtration.simplices.len(), 15);
    }

    #[test]
    fn faces_precede_cofaces_and_values_respect_vr_rule() {
        let dm = distance_matrix(&super::super::tests::unit_square()).unwrap();
        let filtration = vietoris_rips(&dm, 2, f64::INFINITY);
        for (idx, s) in filtration.simplices.iter().enumerate() {
            // VR value = max pairwise distance
            let mut expected = 0.0_f64;
            for a in 0..s.vertices.len() {
                for b in (a + 1)..s.vertices.len() {
                    expected = expected.max(dm.get(s.vertices[a] as usize, s.vertices[b] as usize));
                }
            }
            assert_eq!(s.value, expected);
            // every facet appears earlier with value <= this one
            if s.dim() > 0 {
                for drop in 0..s.vertices.len() {
                    let facet: Vec<u32> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    let position = filtration.simplices[..idx]
                        .iter()
                        .position(|t| t.vertices.as_slice() == facet.as_slice())
                        .expect("facet must precede coface");
                    assert!(filtration.simplices[position].value <= s.value);
                }
            }
        }
    }
}
