use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Prediction};
use crate::error::{Error, Result};

/// Candidate splits need at least this much information gain.
pub const MIN_GAIN: f64 = 1e-12;
/// Gain ratios closer than this are ties; the earlier candidate wins.
const RATIO_TIE: f64 = 1e-12;

pub fn entropy(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(entropy_of(class_counts, total))
}

fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let total = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Information gain of partitioning `parent` into `partition`.
pub fn gain(parent: &[usize], partition: &[Vec<usize>]) -> Result<f64> {
    let mut summed = vec![0usize; parent.len()];
    for child in partition {
        if child.len() != parent.len() {
            return Err(Error::PartitionMismatch);
        }
        for (s, c) in summed.iter_mut().zip(child) {
            *s += c;
        }
    }
    if summed != parent {
        return Err(Error::PartitionMismatch);
    }
    let total: usize = parent.iter().sum();
    let base = entropy(parent)?;
    let remainder: f64 = partition
        .iter()
        .map(|child| {
            let size: usize = child.iter().sum();
            if size == 0 {
                0.0
            } else {
                size as f64 / total as f64 * entropy_of(child, size)
            }
        })
        .sum();
    Ok((base - remainder).max(0.0))
}

pub fn split_info(sizes: &[usize]) -> Result<f64> {
    entropy(sizes)
}

pub fn gain_ratio(parent: &[usize], partition: &[Vec<usize>]) -> Result<f64> {
    let sizes: Vec<usize> = partition.iter().map(|c| c.iter().sum()).collect();
    let si = split_info(&sizes)?;
    if si <= 0.0 {
        return Err(Error::ZeroSplitInfo);
    }
    Ok(gain(parent, partition)? / si)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C45Params {
    pub min_samples: usize,
    pub max_depth: Option<usize>,
}

impl Default for C45Params {
    fn default() -> Self {
        Self {
            min_samples: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: usize,
        support: usize,
        class_counts: Vec<usize>,
    },
    /// Samples with `x[feature] < threshold` go `below`.
    Split {
        feature: usize,
        threshold: f64,
        below: Box<TreeNode>,
        above_or_equal: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.predict_with_purity(x)?.label)
    }

    pub fn predict_with_purity(&self, x: &[f64]) -> Result<Prediction> {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf {
                    label,
                    support,
                    class_counts,
                } => {
                    let purity = if *support == 0 {
                        0.0
                    } else {
                        class_counts.get(*label).copied().unwrap_or(0) as f64 / *support as f64
                    };
                    return Ok(Prediction {
                        label: *label,
                        confidence: purity,
                    });
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    below,
                    above_or_equal,
                } => {
                    let v = *x.get(*feature).ok_or(Error::DimensionMismatch {
                        expected: feature + 1,
                        got: x.len(),
                    })?;
                    node = if v < *threshold { below } else { above_or_equal };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split {
                below,
                above_or_equal,
                ..
            } => 1 + below.depth().max(above_or_equal.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split {
                below,
                above_or_equal,
                ..
            } => below.leaves() + above_or_equal.leaves(),
        }
    }

    /// Distinct feature indices tested anywhere in the tree, ascending.
    pub fn features_used(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if let TreeNode::Split {
                feature,
                below,
                above_or_equal,
                ..
            } = node
            {
                out.push(*feature);
                stack.push(below);
                stack.push(above_or_equal);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn tree_predict(tree: &TreeNode, x: &[f64]) -> Result<usize> {
    tree.predict(x)
}

/// The split chosen at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain_ratio: f64,
}

pub fn fit_c45(data: &LabeledDataset, params: &C45Params) -> Result<TreeNode> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let indices: Vec<usize> = (0..data.len()).collect();
    Ok(grow(data, indices, 0, params))
}

fn grow(data: &LabeledDataset, indices: Vec<usize>, depth: usize, params: &C45Params) -> TreeNode {
    let counts = counts_of(data, &indices);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
    if pure || indices.len() < params.min_samples.max(1) || depth_reached {
        return leaf(counts);
    }
    let Some(split) = best_split(data, &indices, &counts) else {
        return leaf(counts);
    };
    let (below, above): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| data.features()[i][split.feature] < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        below: Box::new(grow(data, below, depth + 1, params)),
        above_or_equal: Box::new(grow(data, above, depth + 1, params)),
    }
}

fn counts_of(data: &LabeledDataset, indices: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; data.classes()];
    for &i in indices {
        counts[data.labels()[i]] += 1;
    }
    counts
}

fn leaf(class_counts: Vec<usize>) -> TreeNode {
    let mut label = 0;
    for (i, &c) in class_counts.iter().enumerate() {
        if c > class_counts[label] {
            label = i;
        }
    }
    TreeNode::Leaf {
        label,
        support: class_counts.iter().sum(),
        class_counts,
    }
}

/// The split [`fit_c45`] would place at the root, if any candidate has
/// positive gain.
pub fn root_split(data: &LabeledDataset) -> Option<RootSplit> {
    let indices: Vec<usize> = (0..data.len()).collect();
    let counts = counts_of(data, &indices);
    best_split(data, &indices, &counts)
}

/// Threshold strictly above `lo` and at most `hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = (lo + hi) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Best binary threshold split over all features at a node, scanning
/// candidates in (feature, threshold) ascending order.
fn best_split(data: &LabeledDataset, indices: &[usize], counts: &[usize]) -> Option<RootSplit> {
    let n = indices.len();
    let parent_entropy = entropy_of(counts, n);
    let mut best: Option<RootSplit> = None;
    let mut order = indices.to_vec();
    let mut left = vec![0usize; counts.len()];
    let mut right = vec![0usize; counts.len()];

    for feature in 0..data.dim() {
        let value = |i: usize| data.features()[i][feature];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(counts);
        for pos in 0..n - 1 {
            let label = data.labels()[order[pos]];
            left[label] += 1;
            right[label] -= 1;
            let (lo, hi) = (value(order[pos]), value(order[pos + 1]));
            if lo >= hi {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            let remainder = (nl as f64 * entropy_of(&left, nl) + nr as f64 * entropy_of(&right, nr)) / n as f64;
            let gain = parent_entropy - remainder;
            if gain <= MIN_GAIN {
                continue;
            }
            let si = entropy_of(&[nl, nr], n);
            let ratio = gain / si;
            if best.is_none_or(|b| ratio > b.gain_ratio + RATIO_TIE) {
                best = Some(RootSplit {
                    feature,
                    threshold: midpoint(lo, hi),
                    gain_ratio: ratio,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[5, 0]).unwrap(), 0.0);
        assert_eq!(entropy(&[3, 3]).unwrap(), 1.0);
        // -(1/3)log2(1/3) - (2/3)log2(2/3)
        assert!((entropy(&[1, 2]).unwrap() - 0.918296).abs() < 1e-5);
        assert!(matches!(entropy(&[0, 0]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain(&[3, 4], &[vec![3, 4]]).unwrap(), 0.0);
        assert_eq!(gain(&[2, 2], &[vec![2, 0], vec![0, 2]]).unwrap(), 1.0);
        assert!((gain(&[3, 3], &[vec![2, 1], vec![1, 2]]).unwrap() - 0.081704).abs() < 1e-5);
        assert!(matches!(gain(&[3, 3], &[vec![2, 1], vec![1, 1]]), Err(Error::PartitionMismatch)));
        assert!(matches!(gain(&[3, 3], &[vec![3, 3, 0]]), Err(Error::PartitionMismatch)));
    }

    #[test]
    fn split_info_values() {
        assert_eq!(split_info(&[7]).unwrap(), 0.0);
        assert_eq!(split_info(&[4, 4]).unwrap(), 1.0);
        assert!((split_info(&[1, 3]).unwrap() - 0.811278).abs() < 1e-5);
        assert!(matches!(split_info(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn gain_ratio_values() {
        assert_eq!(gain_ratio(&[2, 2], &[vec![2, 0], vec![0, 2]]).unwrap(), 1.0);
        assert!(matches!(gain_ratio(&[2, 2], &[vec![2, 2]]), Err(Error::ZeroSplitInfo)));
        assert!((gain_ratio(&[3, 3], &[vec![2, 1], vec![1, 2]]).unwrap() - 0.081704).abs() < 1e-5);
    }

    #[test]
    fn pure_data_is_a_single_leaf() {
        let data = LabeledDataset::new(vec![vec![1.0], vec![5.0], vec![2.0]], vec![1, 1, 1], names(2)).unwrap();
        let tree = fit_c45(&data, &C45Params::default()).unwrap();
        assert_eq!(
            tree,
            TreeNode::Leaf {
                label: 1,
                support: 3,
                class_counts: vec![0, 3]
            }
        );
    }

    fn four_points() -> TreeNode {
        let data = LabeledDataset::new(
            vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            vec![0, 0, 1, 1],
            names(2),
        )
        .unwrap();
        fit_c45(&data, &C45Params::default()).unwrap()
    }

    #[test]
    fn separable_line_splits_at_midpoint() {
        // thresholds 0.5 and 10.5 give gain 0.311, 5.5 gives gain 1.0
        match four_points() {
            TreeNode::Split {
                feature,
                threshold,
                below,
                above_or_equal,
            } => {
                assert_eq!((feature, threshold), (0, 5.5));
                assert!(matches!(*below, TreeNode::Leaf { label: 0, support: 2, .. }));
                assert!(matches!(*above_or_equal, TreeNode::Leaf { label: 1, support: 2, .. }));
            }
            leaf => panic!("expected a split, got {leaf:?}"),
        }
    }

    #[test]
    fn prediction_follows_threshold() {
        let tree = four_points();
        assert_eq!(tree_predict(&tree, &[0.3]).unwrap(), 0);
        assert_eq!(tree_predict(&tree, &[5.5]).unwrap(), 1);
        assert_eq!(tree_predict(&tree, &[5.4999]).unwrap(), 0);
        assert!(matches!(tree_predict(&tree, &[]), Err(Error::DimensionMismatch { .. })));
        let single = TreeNode::Leaf {
            label: 2,
            support: 1,
            class_counts: vec![0, 0, 1],
        };
        assert_eq!(tree_predict(&single, &[]).unwrap(), 2);
    }

    #[test]
    fn stops_on_min_samples_and_depth() {
        let data = LabeledDataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 1, 0, 1],
            names(2),
        )
        .unwrap();
        let stump = fit_c45(
            &data,
            &C45Params {
                min_samples: 2,
                max_depth: Some(0),
            },
        )
        .unwrap();
        // 2-2 tie goes to class 0
        assert!(matches!(stump, TreeNode::Leaf { label: 0, support: 4, .. }));
        let small = fit_c45(
            &data,
            &C45Params {
                min_samples: 5,
                max_depth: None,
            },
        )
        .unwrap();
        assert_eq!(small.leaves(), 1);
        let full = fit_c45(&data, &C45Params::default()).unwrap();
        for (x, y) in data.features().iter().zip(data.labels()) {
            assert_eq!(full.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn zero_gain_node_becomes_leaf() {
        // XOR on duplicated values: every threshold leaves both children 1:1
        let data = LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
            names(2),
        )
        .unwrap();
        let tree = fit_c45(&data, &C45Params::default()).unwrap();
        assert_eq!(tree.leaves(), 1);
    }

    #[test]
    fn midpoint_stays_strictly_above_low_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t && t <= hi);
        assert_eq!(midpoint(0.0, 1.0), 0.5);
    }

    #[test]
    fn leaf_purity_is_the_confidence() {
        let leaf = TreeNode::Leaf {
            label: 1,
            support: 4,
            class_counts: vec![1, 3],
        };
        assert_eq!(leaf.predict_with_purity(&[0.0]).unwrap().confidence, 0.75);
    }
}
