//! Definitional persistence oracle for small filtrations.
//!
//! Computes persistent Betti numbers from ranks of GF(2) boundary matrices
//! of sublevel complexes, then recovers interval multiplicities by
//! inclusion-exclusion. No column reduction is shared with the fast path,
//! which makes this a fully independent check. Feasible for <= 8 points.

use std::collections::HashMap;

use super::{Filtration, HomologyError, Interval, PersistenceDiagram};

const MAX_ORACLE_POINTS: usize = 8;

fn rank_gf2<I: Iterator<Item = u128>>(columns: I) -> usize {
    let mut pivot = [0u128; 128];
    let mut rank = 0;
    for mut column in columns {
        while column != 0 {
            let high = (127 - column.leading_zeros()) as usize;
            if pivot[high] != 0 {
                column ^= pivot[high];
            } else {
                pivot[high] = column;
                rank += 1;
                break;
            }
        }
    }
    rank
}

struct DimData {
    /// Filtration value of each k-simplex, indexed by row.
    row_values: Vec<f64>,
    /// Boundary columns of (k+1)-simplices over the k-simplex rows, with
    /// their filtration values.
    coboundary_cols: Vec<(f64, u128)>,
    /// Boundary columns of k-simplices over the (k-1)-simplex rows.
    boundary_cols: Vec<(f64, u128)>,
}

/// Multiset-identical diagram to [`super::persistence`], computed by
/// rank-of-boundary per sublevel set.
pub fn persistence_bruteforce(filtration: &Filtration) -> Result<PersistenceDiagram, HomologyError> {
    if filtration.n_points > MAX_ORACLE_POINTS {
        return Err(HomologyError::TooLargeForOracle {
            n: filtration.n_points,
        });
    }

    let max_simplex_dim = filtration
        .simplices
        .iter()
        .map(|s| s.dim())
        .max()
        .unwrap_or(0);

    // Row index of each simplex within its dimension.
    let mut row_of: HashMap<&[u32], usize> = HashMap::new();
    let mut rows_per_dim: Vec<Vec<f64>> = vec![Vec::new(); max_simplex_dim + 1];
    for s in &filtration.simplices {
        let rows = &mut rows_per_dim[s.dim()];
        row_of.insert(s.vertices.as_slice(), rows.len());
        rows.push(s.value);
    }

    let mut boundary_per_dim: Vec<Vec<(f64, u128)>> = vec![Vec::new(); max_simplex_dim + 2];
    for s in &filtration.simplices {
        if s.dim() == 0 {
            continue;
        }
        let mut mask: u128 = 0;
        for drop in 0..s.vertices.len() {
            let facet: Vec<u32> = s
                .vertices
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &v)| v)
                .collect();
            mask |= 1u128 << row_of[facet.as_slice()];
        }
        boundary_per_dim[s.dim()].push((s.value, mask));
    }

    let mut critical: Vec<f64> = filtration.simplices.iter().map(|s| s.value).collect();
    critical.sort_by(|a, b| a.partial_cmp(b).unwrap());
    critical.dedup();
    let n_values = critical.len();

    let mut intervals: Vec<Interval> = Vec::new();
    for k in 0..=filtration.max_homology_dim as usize {
        if k > max_simplex_dim {
            break;
        }
        let data = DimData {
            row_values: rows_per_dim[k].clone(),
            coboundary_cols: boundary_per_dim.get(k + 1).cloned().unwrap_or_default(),
            boundary_cols: boundary_per_dim[k].clone(),
        };

        // beta[i][j] = persistent Betti number from scale critical[i-1] to
        // critical[j-1]; index 0 means the empty complex.
        let betti = |s: f64, t: f64| -> i64 {
            let rank_dk = rank_gf2(
                data.boundary_cols
                    .iter()
                    .filter(|(v, _)| *v <= s)
                    .map(|(_, m)| *m),
            ) as i64;
            let rank_dk1 = rank_gf2(
                data.coboundary_cols
                    .iter()
                    .filter(|(v, _)| *v <= t)
                    .map(|(_, m)| *m),
            ) as i64;
            let inclusion = data
                .row_values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v <= s)
                .map(|(row, _)| 1u128 << row);
            let rank_joint = rank_gf2(
                data.coboundary_cols
                    .iter()
                    .filter(|(v, _)| *v <= t)
                    .map(|(_, m)| *m)
                    .chain(inclusion),
            ) as i64;
            rank_joint - rank_dk - rank_dk1
        };

        let mut beta = vec![vec![0i64; n_values + 1]; n_values + 1];
        for i in 1..=n_values {
            for j in i..=n_values {
                beta[i][j] = betti(critical[i - 1], critical[j - 1]);
            }
        }

        for i in 1..=n_values {
            for j in (i + 1)..=n_values {
                let multiplicity =
                    (beta[i][j - 1] - beta[i][j]) - (beta[i - 1][j - 1] - beta[i - 1][j]);
                for _ in 0..multiplicity {
                    intervals.push(Interval {
                        birth: critical[i - 1],
                        death: critical[j - 1],
                        dim: k as u8,
                    });
                }
            }
            let essential = beta[i][n_values] - beta[i - 1][n_values];
            for _ in 0..essential {
                intervals.push(Interval {
                    birth: critical[i - 1],
                    death: f64::INFINITY,
                    dim: k as u8,
                });
            }
        }
    }

    Ok(PersistenceDiagram::canonicalize(intervals))
}
