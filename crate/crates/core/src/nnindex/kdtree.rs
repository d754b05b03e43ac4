//! k-d tree with tight per-node bounding boxes.

use alloc::vec::Vec;

use super::{Candidate, TopK};

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub(super) struct KdTree {
    d: usize,
    perm: Vec<usize>,
    nodes: Vec<Node>,
    /// `d` lower then `d` upper bounds per node.
    bounds: Vec<f32>,
}

impl KdTree {
    pub(super) fn build(points: &[f32], n: usize, d: usize, leaf_size: usize) -> Self {
        let mut tree = Self { d, perm: (0..n).collect(), nodes: Vec::new(), bounds: Vec::new() };
        if n > 0 {
            tree.build_node(points, 0, n, leaf_size);
        }
        tree
    }

    fn build_node(&mut self, points: &[f32], start: usize, end: usize, leaf_size: usize) -> usize {
        let d = self.d;
        let mut lo = Vec::from(&points[self.perm[start] * d..(self.perm[start] + 1) * d]);
        let mut hi = lo.clone();
        for &row in &self.perm[start + 1..end] {
            for (c, &x) in points[row * d..(row + 1) * d].iter().enumerate() {
                lo[c] = lo[c].min(x);
                hi[c] = hi[c].max(x);
            }
        }
        let (split_dim, spread) = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| f64::from(*h) - f64::from(*l))
            .enumerate()
            .fold((0usize, -1.0f64), |best, (c, s)| if s > best.1 { (c, s) } else { best });

        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        // identical points cannot be separated, so they stay in one leaf
        if end - start <= leaf_size || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * d + split_dim].total_cmp(&points[b * d + split_dim]).then(a.cmp(&b))
        });
        let left = self.build_node(points, start, mid, leaf_size);
        let right = self.build_node(points, mid, end, leaf_size);
        self.nodes[id] = Node::Inner { left, right };
        id
    }

    /// Lower bound on the distance from `query` to any point inside node `id`, or `None`
    /// once the running sum reaches `cutoff`.
    ///
    /// Accumulates in the same dimension order and form as the point distance, so the
    /// computed bound never exceeds a computed point distance.
    fn box_distance(&self, id: usize, query: &[f32], cutoff: f64) -> Option<f64> {
        let lo = &self.bounds[2 * id * self.d..(2 * id + 1) * self.d];
        let hi = &self.bounds[(2 * id + 1) * self.d..(2 * id + 2) * self.d];
        let mut acc = 0.0;
        for ((&q, &l), &h) in query.iter().zip(lo).zip(hi) {
            let diff = if q < l {
                f64::from(q) - f64::from(l)
            } else if q > h {
                f64::from(q) - f64::from(h)
            } else {
                0.0
            };
            acc += diff * diff;
            // partial sums of non-negative terms never decrease
            if acc >= cutoff {
                return None;
            }
        }
        Some(libm::sqrt(acc))
    }

    pub(super) fn search<F>(&self, query: &[f32], top: &mut TopK, make: &mut F)
    where
        F: FnMut(usize) -> Option<Candidate>,
    {
        if !self.nodes.is_empty() {
            self.visit(0, query, top, make);
        }
    }

    fn visit<F>(&self, id: usize, query: &[f32], top: &mut TopK, make: &mut F)
    where
        F: FnMut(usize) -> Option<Candidate>,
    {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &row in &self.perm[start..end] {
                    if let Some(candidate) = make(row) {
                        top.offer(candidate);
                    }
                }
            }
            Node::Inner { left, right } => {
                let cutoff = top.bound().map_or(f64::INFINITY, pruning_cutoff);
                let dl = self.box_distance(left, query, cutoff);
                let dr = self.box_distance(right, query, cutoff);
                let order = match (dl, dr) {
                    (Some(l), Some(r)) if r < l => [(right, dr), (left, dl)],
                    (None, _) => [(right, dr), (left, dl)],
                    _ => [(left, dl), (right, dr)],
                };
                for (child, lower_bound) in order {
                    let Some(lower_bound) = lower_bound else { continue };
                    if top.bound().is_some_and(|worst| lower_bound > worst) {
                        continue;
                    }
                    self.visit(child, query, top, make);
                }
            }
        }
    }
}

/// Smallest `c` with `sqrt(c) > worst`, so that `x >= c` exactly when `sqrt(x) > worst`.
fn pruning_cutoff(worst: f64) -> f64 {
    let mut c = worst * worst;
    while c > 0.0 && libm::sqrt(c.next_down()) > worst {
        c = c.next_down();
    }
    while libm::sqrt(c) <= worst {
        c = c.next_up();
    }
    c
}
