//! Marching-squares isolines on a sampled field.

use std::collections::HashMap;

use thiserror::Error;

use crate::conformal::FieldGrid;
use crate::geometry::Point2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("grid has no interior nodes")]
    EmptyGrid,
}

/// Which component of `f = u + iv` to contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    V,
}

/// All polylines of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub level: f64,
    pub polylines: Vec<Vec<Point2>>,
}

/// `k` evenly spaced levels strictly between 0 and `max`.
pub fn uniform_levels(k: usize, max: f64) -> Vec<f64> {
    (1..=k).map(|i| max * i as f64 / (k + 1) as f64).collect()
}

/// Isolines of `u` or `v` at each level. Cells touching a masked node are
/// skipped.
pub fn extract_contours(grid: &FieldGrid, field: Field, levels: &[f64]) -> Result<Vec<Contour>, ContourError> {
    if !grid.mask.iter().any(|&m| m) {
        return Err(ContourError::EmptyGrid);
    }
    let values = match field {
        Field::U => &grid.u,
        Field::V => &grid.v,
    };
    let scalar = ScalarGrid {
        nx: grid.nx,
        ny: grid.ny,
        values,
        mask: &grid.mask,
    };
    Ok(levels
        .iter()
        .map(|&level| Contour {
            level,
            polylines: scalar.isolines(level, |i, j| grid.point(i, j)),
        })
        .collect())
}

/// Row-major scalar samples, node `(i, j)` at `j·nx + i`.
pub struct ScalarGrid<'a> {
    pub nx: usize,
    pub ny: usize,
    pub values: &'a [f64],
    pub mask: &'a [bool],
}

/// A cell edge: horizontal from `(i, j)` to `(i+1, j)` or vertical from
/// `(i, j)` to `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

impl ScalarGrid<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn live(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    fn crossing(&self, e: Edge, level: f64, node: &impl Fn(usize, usize) -> Point2) -> Point2 {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (self.at(i0, j0), self.at(i1, j1));
        let t = (level - a) / (b - a);
        let (p, q) = (node(i0, j0), node(i1, j1));
        p + (q - p) * t
    }

    /// Isolines at `level`, chained into polylines. Closed loops repeat their
    /// first point at the end.
    pub fn isolines(&self, level: f64, node: impl Fn(usize, usize) -> Point2) -> Vec<Vec<Point2>> {
        let mut segments: Vec<(Edge, Edge)> = Vec::new();
        for j in 0..self.ny.saturating_sub(1) {
            for i in 0..self.nx.saturating_sub(1) {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                if !corners.iter().all(|&(a, b)| self.live(a, b)) {
                    continue;
                }
                let v = corners.map(|(a, b)| self.at(a, b));
                let above = v.map(|x| x >= level);
                let (bottom, right, top, left) = (Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j));
                let case = above
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (k, &a)| acc | (u8::from(a) << k));
                let center_above = v.iter().sum::<f64>() * 0.25 >= level;
                let mut push = |a, b| segments.push((a, b));
                match case {
                    0 | 15 => {}
                    1 | 14 => push(left, bottom),
                    2 | 13 => push(bottom, right),
                    3 | 12 => push(left, right),
                    4 | 11 => push(right, top),
                    6 | 9 => push(bottom, top),
                    7 | 8 => push(left, top),
                    // Saddles: the center value decides which diagonal pair
                    // is connected.
                    5 => {
                        if center_above {
                            push(bottom, right);
                            push(left, top);
                        } else {
                            push(left, bottom);
                            push(right, top);
                        }
                    }
                    10 => {
                        if center_above {
                            push(left, bottom);
                            push(right, top);
                        } else {
                            push(bottom, right);
                            push(left, top);
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        chain(&segments)
            .into_iter()
            .map(|edges| edges.into_iter().map(|e| self.crossing(e, level, &node)).collect())
            .collect()
    }
}

/// Join segments sharing an edge crossing into maximal chains.
fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let follow = |start: usize, from: Edge, used: &mut [bool]| {
        let mut line = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            line.push(next);
            at = next;
            match by_edge[&at].iter().find(|&&k| !used[k]) {
                Some(&k) => seg = k,
                None => break,
            }
        }
        line
    };

    // Open chains start at an edge used by a single segment.
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        if by_edge[&a].len() == 1 {
            out.push(follow(k, a, &mut used));
        } else if by_edge[&b].len() == 1 {
            out.push(follow(k, b, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            out.push(follow(k, segments[k].0, &mut used));
        }
    }
    out
}
