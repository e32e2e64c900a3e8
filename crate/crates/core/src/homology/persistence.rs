//! Boundary-matrix reduction over the two-element field.
//!
//! `persistence` runs column reduction with the clearing (twist)
//! optimization, processing dimensions from high to low: when a column of
//! dimension d pairs with a column of dimension d-1, the lower column is
//! known to reduce to zero and is skipped. The output is identical to the
//! naive single-pass reduction, which is kept here as a test reference.

use std::collections::HashMap;

use super::{Filtration, Interval, PersistenceDiagram, Simplex};

fn key_of(vertices: &[u32]) -> u128 {
    let mut key: u128 = 0;
    for &v in vertices {
        // vertices are sorted ascending and nonzero-packed: v+1 so that a
        // missing slot (0) never collides with vertex 0
        key = (key << 32) | u128::from(v + 1);
    }
    key
}

fn boundary(simplex: &Simplex, index_of: &HashMap<u128, u32>) -> Vec<u32> {
    if simplex.dim() == 0 {
        return Vec::new();
    }
    let mut facets: Vec<u32> = (0..simplex.vertices.len())
        .map(|drop| {
            let facet: Vec<u32> = simplex
                .vertices
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &v)| v)
                .collect();
            *index_of
                .get(&key_of(&facet))
                .expect("every facet is present in a valid filtration")
        })
        .collect();
    facets.sort_unstable();
    facets
}

/// Symmetric difference of two ascending index lists (GF(2) addition).
fn add_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct Reduction {
    /// (birth column, death column) index pairs.
    pairs: Vec<(u32, u32)>,
    /// Columns that reduced to zero (cycle births), including vertices.
    positive: Vec<bool>,
}

fn diagram_from_reduction(filtration: &Filtration, reduction: &Reduction) -> PersistenceDiagram {
    let simplices = &filtration.simplices;
    let mut paired = vec![false; simplices.len()];
    let mut intervals = Vec::new();
    for &(birth, death) in &reduction.pairs {
        paired[birth as usize] = true;
        let b = simplices[birth as usize].value;
        let d = simplices[death as usize].value;
        if d > b {
            intervals.push(Interval {
                birth: b,
                death: d,
                dim: simplices[birth as usize].dim() as u8,
            });
        }
    }
    for (idx, simplex) in simplices.iter().enumerate() {
        if reduction.positive[idx]
            && !paired[idx]
            && simplex.dim() <= filtration.max_homology_dim as usize
        {
            intervals.push(Interval {
                birth: simplex.value,
                death: f64::INFINITY,
                dim: simplex.dim() as u8,
            });
        }
    }
    PersistenceDiagram::canonicalize(intervals)
}

fn reduce_twist(filtration: &Filtration) -> Reduction {
    let simplices = &filtration.simplices;
    let m = simplices.len();
    let mut index_of: HashMap<u128, u32> = HashMap::with_capacity(m);
    for (idx, s) in simplices.iter().enumerate() {
        index_of.insert(key_of(&s.vertices), idx as u32);
    }

    let max_dim = simplices.iter().map(|s| s.dim()).max().unwrap_or(0);
    let mut columns_by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 1];
    for (idx, s) in simplices.iter().enumerate() {
        columns_by_dim[s.dim()].push(idx as u32);
    }

    let mut pairs = Vec::new();
    let mut positive = vec![false; m];
    let mut cleared = vec![false; m];
    // low row index -> owning reduced column, valid across dims because a
    // row of dimension d-1 can only be the low of a dimension-d column
    let mut pivot_owner: HashMap<u32, u32> = HashMap::new();
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();

    for dim in (1..=max_dim).rev() {
        for &j in &columns_by_dim[dim] {
            if cleared[j as usize] {
                positive[j as usize] = true;
                continue;
            }
            let mut column = boundary(&simplices[j as usize], &index_of);
            while let Some(&low) = column.last() {
                match pivot_owner.get(&low) {
                    Some(&owner) => column = add_columns(&column, &reduced[&owner]),
                    None => break,
                }
            }
            match column.last() {
                Some(&low) => {
                    pivot_owner.insert(low, j);
                    cleared[low as usize] = true;
                    pairs.push((low, j));
                    reduced.insert(j, column);
                }
                None => positive[j as usize] = true,
            }
        }
        // pivots of this dimension are never consulted again
        reduced.retain(|&col, _| simplices[col as usize].dim() > dim);
    }
    for &v in &columns_by_dim[0] {
        positive[v as usize] = true;
    }
    Reduction { pairs, positive }
}

/// Naive left-to-right column reduction, used as the reference for the
/// twist variant.
#[allow(dead_code)]
fn reduce_naive(filtration: &Filtration) -> Reduction {
    let simplices = &filtration.simplices;
    let m = simplices.len();
    let mut index_of: HashMap<u128, u32> = HashMap::with_capacity(m);
    for (idx, s) in simplices.iter().enumerate() {
        index_of.insert(key_of(&s.vertices), idx as u32);
    }
    let mut pairs = Vec::new();
    let mut positive = vec![false; m];
    let mut pivot_owner: HashMap<u32, u32> = HashMap::new();
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();
    for j in 0..m as u32 {
        let mut column = boundary(&simplices[j as usize], &index_of);
        while let Some(&low) = column.last() {
            match pivot_owner.get(&low) {
                Some(&owner) => column = add_columns(&column, &reduced[&owner]),
                None => break,
            }
        }
        match column.last() {
            Some(&low) => {
                pivot_owner.insert(low, j);
                pairs.push((low, j));
                reduced.insert(j, column);
            }
            None => positive[j as usize] = true,
        }
    }
    Reduction { pairs, positive }
}

/// Persistence diagram of a filtration: standard reduction over GF(2),
/// zero-persistence pairs discarded, essential classes reported with
/// infinite death.
pub fn persistence(filtration: &Filtration) -> PersistenceDiagram {
    diagram_from_reduction(filtration, &reduce_twist(filtration))
}

#[cfg(test)]
pub(crate) fn persistence_naive(filtration: &Filtration) -> PersistenceDiagram {
    diagram_from_reduction(filtration, &reduce_naive(filtration))
}
