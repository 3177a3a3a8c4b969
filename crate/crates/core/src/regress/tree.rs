//! CART-style regression tree: binary recursive partitioning minimizing
//! squared error, leaves predict the mean of their training targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeConfig {
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_leaf: 5,
            max_depth: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: Node,
    pub n_features: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    sse: f64,
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

fn sse(y: &[f64], idx: &[usize]) -> f64 {
    let m = mean(y, idx);
    idx.iter().map(|&i| (y[i] - m).powi(2)).sum()
}

/// Scans every feature for the split minimizing left SSE + right SSE, with
/// both sides at least `min_leaf` large. Prefix sums over the sorted order
/// make each feature scan O(m).
fn best_split(x: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let d = x[0].len();
    let m = idx.len();
    if m < 2 * min_leaf {
        return None;
    }
    let mut best: Option<BestSplit> = None;
    for feature in 0..d {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| x[a][feature].partial_cmp(&x[b][feature]).unwrap());

        let total: f64 = order.iter().map(|&i| y[i]).sum();
        let total_sq: f64 = order.iter().map(|&i| y[i] * y[i]).sum();
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for (k, &i) in order.iter().enumerate().take(m - 1) {
            left_sum += y[i];
            left_sq += y[i] * y[i];
            let nl = k + 1;
            let nr = m - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let lo = x[i][feature];
            let hi = x[order[k + 1]][feature];
            if hi <= lo {
                continue; // tied feature values cannot separate
            }
            let right_sum = total - left_sum;
            let right_sq = total_sq - left_sq;
            let split_sse = (left_sq - left_sum * left_sum / nl as f64)
                + (right_sq - right_sum * right_sum / nr as f64);
            if best.as_ref().map_or(true, |b| split_sse < b.sse) {
                best = Some(BestSplit {
                    feature,
                    threshold: 0.5 * (lo + hi),
                    sse: split_sse,
                });
            }
        }
    }
    best
}

fn build(x: &[Vec<f64>], y: &[f64], idx: &[usize], depth: usize, cfg: &TreeConfig) -> Node {
    let node_sse = sse(y, idx);
    if depth >= cfg.max_depth || node_sse <= 1e-24 {
        return Node::Leaf {
            value: mean(y, idx),
        };
    }
    match best_split(x, y, idx, cfg.min_leaf) {
        Some(split) if split.sse < node_sse - 1e-24 => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| x[i][split.feature] < split.threshold);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(build(x, y, &left_idx, depth + 1, cfg)),
                right: Box::new(build(x, y, &right_idx, depth + 1, cfg)),
            }
        }
        _ => Node::Leaf {
            value: mean(y, idx),
        },
    }
}

pub fn fit_tree(x: &[Vec<f64>], y: &[f64], cfg: &TreeConfig) -> Result<TreeModel> {
    if x.len() < 2 {
        return Err(Error::Training("tree needs at least 2 samples".into()));
    }
    let idx: Vec<usize> = (0..x.len()).collect();
    Ok(TreeModel {
        root: build(x, y, &idx, 0, cfg),
        n_features: x[0].len(),
    })
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Domain(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value } => return Ok(*value),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold { left } else { right };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_targets_make_single_leaf() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y = vec![4.2; 10];
        let m = fit_tree(&x, &y, &TreeConfig::default()).unwrap();
        match m.root {
            Node::Leaf { value } => assert_abs_diff_eq!(value, 4.2, epsilon = 1e-12),
            other => panic!("expected a single leaf, got {other:?}"),
        }
    }

    #[test]
    fn step_function_gets_one_split_near_zero() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![(i as f64 - 49.5) / 10.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| if r[0] < 0.0 { 0.0 } else { 1.0 }).collect();
        let m = fit_tree(&x, &y, &TreeConfig::default()).unwrap();
        match &m.root {
            Node::Split {
                threshold,
                left,
                right,
                ..
            } => {
                assert!(threshold.abs() < 0.1, "threshold={threshold}");
                assert_eq!(**left, Node::Leaf { value: 0.0 });
                assert_eq!(**right, Node::Leaf { value: 1.0 });
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn predictions_are_leaf_means() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| (r[0] * 0.3).sin() + r[1]).collect();
        let cfg = TreeConfig::default();
        let m = fit_tree(&x, &y, &cfg).unwrap();

        // Group training rows by the leaf they land in; each prediction must
        // equal the mean of its group.
        use std::collections::HashMap;
        let mut groups: HashMap<u64, Vec<f64>> = HashMap::new();
        for (row, &yi) in x.iter().zip(&y) {
            let p = m.predict(row).unwrap();
            groups.entry(p.to_bits()).or_default().push(yi);
        }
        for (bits, members) in groups {
            let leaf_mean = members.iter().sum::<f64>() / members.len() as f64;
            assert_abs_diff_eq!(f64::from_bits(bits), leaf_mean, epsilon = 1e-12);
            assert!(members.len() >= cfg.min_leaf);
        }
    }

    #[test]
    fn min_leaf_one_memorizes_distinct_inputs() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..16).map(|i| (i * i) as f64).collect();
        let cfg = TreeConfig {
            min_leaf: 1,
            max_depth: 10,
        };
        let m = fit_tree(&x, &y, &cfg).unwrap();
        for (row, &yi) in x.iter().zip(&y) {
            assert_eq!(m.predict(row).unwrap(), yi);
        }
    }
}
