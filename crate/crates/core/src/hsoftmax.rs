//! Binary output trees and hierarchical softmax.
//!
//! Each leaf of a [`CodeTree`] stands for one vertex; each internal node hosts
//! a logistic classifier with a parameter row `psi(node)`. The probability of
//! a leaf given an input vector `phi` is the product, over the internal nodes
//! on its root path, of `sigmoid(s * <psi(node), phi>)` where `s = +1` when the
//! path takes bit 0 at that node and `s = -1` for bit 1. The root hosts a
//! classifier too, so a leaf with code length `L` has exactly `L` factors.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::math::{self, log_sigmoid, sigmoid};
use crate::matrix::{EmbeddingMatrix, RowSource, SharedMatrix};
use crate::walks::FrequencyTable;

/// Leaf index; equals the dense vertex id that owns the leaf.
pub type LeafId = u32;

/// Tree topology: for every leaf, the internal nodes on its root path and the
/// branch bit taken at each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTree {
    n_leaves: usize,
    offsets: Vec<usize>,
    nodes: Vec<u32>,
    bits: Vec<u8>,
}

impl CodeTree {
    fn from_parents(n_leaves: usize, parent: &[usize], bit: &[u8], root: usize) -> Self {
        // parent/bit are indexed by tree slot: leaves 0..n, internal n..2n-1;
        // internal node k sits in slot n + k.
        let mut offsets = Vec::with_capacity(n_leaves + 1);
        let mut nodes = Vec::new();
        let mut bits = Vec::new();
        offsets.push(0);
        let mut path = Vec::new();
        for leaf in 0..n_leaves {
            path.clear();
            let mut slot = leaf;
            while slot != root {
                let p = parent[slot];
                path.push(((p - n_leaves) as u32, bit[slot]));
                slot = p;
            }
            for &(node, b) in path.iter().rev() {
                nodes.push(node);
                bits.push(b);
            }
            offsets.push(nodes.len());
        }
        CodeTree {
            n_leaves,
            offsets,
            nodes,
            bits,
        }
    }

    /// Huffman code over the vocabulary `0..freqs.len()`.
    ///
    /// Zero counts are treated as one. Equal weights are resolved leaves
    /// first, by vertex id, then internal nodes in creation order; the first
    /// node popped takes bit 0.
    pub fn huffman(freqs: &FrequencyTable) -> Result<Self> {
        let n = freqs.len();
        if n == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = freqs
            .counts()
            .iter()
            .enumerate()
            .map(|(v, &c)| Reverse((c.max(1), v)))
            .collect();
        let mut parent = alloc::vec![0usize; 2 * n - 1];
        let mut bit = alloc::vec![0u8; 2 * n - 1];
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((w0, a)) = heap.pop().unwrap();
            let Reverse((w1, b)) = heap.pop().unwrap();
            parent[a] = next;
            parent[b] = next;
            bit[a] = 0;
            bit[b] = 1;
            heap.push(Reverse((w0 + w1, next)));
            next += 1;
        }
        Ok(Self::from_parents(n, &parent, &bit, next - 1))
    }

    /// Balanced tree over `n_leaves` leaves: every internal node splits its
    /// leaf range into a larger-or-equal left half (bit 0) and a right half.
    pub fn balanced(n_leaves: usize) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let n = n_leaves;
        let mut parent = alloc::vec![0usize; 2 * n - 1];
        let mut bit = alloc::vec![0u8; 2 * n - 1];
        let root = if n == 1 { 0 } else { n };
        let mut next = n;
        // (slot, first leaf, leaf count); internal nodes numbered preorder
        let mut stack = alloc::vec![(root, 0usize, n)];
        if n == 1 {
            stack.clear();
        }
        while let Some((slot, lo, len)) = stack.pop() {
            let halves = [(lo, len.div_ceil(2)), (lo + len.div_ceil(2), len / 2)];
            for (b, &(start, size)) in halves.iter().enumerate() {
                let child = if size == 1 {
                    start
                } else {
                    next += 1;
                    stack.push((next, start, size));
                    next
                };
                parent[child] = slot;
                bit[child] = b as u8;
            }
        }
        Ok(Self::from_parents(n, &parent, &bit, root))
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Number of internal nodes, one parameter row each.
    pub fn n_internal(&self) -> usize {
        self.n_leaves - 1
    }

    #[inline]
    pub fn code_length(&self, leaf: LeafId) -> usize {
        let l = leaf as usize;
        self.offsets[l + 1] - self.offsets[l]
    }

    pub fn max_code_length(&self) -> usize {
        (0..self.n_leaves as LeafId)
            .map(|l| self.code_length(l))
            .max()
            .unwrap_or(0)
    }

    /// Root-first `(internal node, bit)` pairs of a leaf's path.
    #[inline]
    pub fn path(&self, leaf: LeafId) -> impl Iterator<Item = (u32, u8)> + '_ {
        let l = leaf as usize;
        let range = self.offsets[l]..self.offsets[l + 1];
        self.nodes[range.clone()]
            .iter()
            .copied()
            .zip(self.bits[range].iter().copied())
    }

    pub fn code_lengths(&self) -> Vec<usize> {
        (0..self.n_leaves as LeafId)
            .map(|l| self.code_length(l))
            .collect()
    }

    /// Kraft sum in floating point.
    pub fn kraft_sum(&self) -> f64 {
        self.code_lengths()
            .iter()
            .map(|&l| libm::ldexp(1.0, -(l as i32)))
            .sum()
    }

    /// Exact test of `sum 2^-len == 1`, carrying leaf counts up from the
    /// deepest level.
    pub fn kraft_is_exact(&self) -> bool {
        let lengths = self.code_lengths();
        let max = lengths.iter().copied().max().unwrap_or(0);
        let mut per_depth = alloc::vec![0u64; max + 1];
        for l in lengths {
            per_depth[l] += 1;
        }
        let mut carry = 0u64;
        for depth in (1..=max).rev() {
            let total = per_depth[depth] + carry;
            if !total.is_multiple_of(2) {
                return false;
            }
            carry = total / 2;
        }
        per_depth[0] + carry == 1
    }

    fn check_leaf(&self, leaf: LeafId) -> Result<()> {
        if (leaf as usize) < self.n_leaves {
            Ok(())
        } else {
            Err(Error::UnassignedLeaf(leaf))
        }
    }

    /// `ln Pr(leaf | phi)`, accumulated in the log domain.
    pub fn leaf_log_probability<P: RowSource>(&self, psi: &P, phi: &[f64], leaf: LeafId) -> Result<f64> {
        self.check_leaf(leaf)?;
        Ok(self
            .path(leaf)
            .map(|(node, b)| log_sigmoid(sign(b) * psi.row_dot(node as usize, phi)))
            .sum())
    }

    /// Negative log-likelihood of `leaf` and its gradients with respect to
    /// `phi` and to each node row on the path.
    pub fn loss_and_gradients<P: RowSource>(&self, psi: &P, phi: &[f64], leaf: LeafId) -> Result<Gradients> {
        self.check_leaf(leaf)?;
        let d = phi.len();
        let mut grad_phi = alloc::vec![0.0; d];
        let mut grad_nodes = Vec::with_capacity(self.code_length(leaf));
        let mut row = alloc::vec![0.0; d];
        let mut loss = 0.0;
        for (node, b) in self.path(leaf) {
            psi.row_into(node as usize, &mut row);
            let s = sign(b);
            let z = math::dot(&row, phi);
            loss -= log_sigmoid(s * z);
            let coeff = (sigmoid(s * z) - 1.0) * s;
            math::axpy(coeff, &row, &mut grad_phi);
            grad_nodes.push((node, phi.iter().map(|x| coeff * x).collect()));
        }
        Ok(Gradients {
            loss,
            grad_phi,
            grad_nodes,
        })
    }

    /// One SGD step on `-ln Pr(leaf | phi)`.
    ///
    /// Every node row on the path is moved by `-alpha * grad` in `psi`; the
    /// `phi` gradient, computed from the pre-update rows, is scaled by
    /// `-alpha` and added into `phi_delta`. Returns the loss before the step.
    #[inline]
    pub(crate) fn descend(
        &self,
        psi: &SharedMatrix,
        phi: &[f64],
        leaf: LeafId,
        alpha: f64,
        phi_delta: &mut [f64],
        row: &mut [f64],
    ) -> f64 {
        let mut loss = 0.0;
        for (node, b) in self.path(leaf) {
            let node = node as usize;
            psi.load_row(node, row);
            let s = sign(b);
            let z = math::dot(row, phi);
            let (p, lp) = math::sigmoid_and_log(s * z);
            loss -= lp;
            let step = -alpha * (p - 1.0) * s;
            math::axpy(step, row, phi_delta);
            math::axpy(step, phi, row);
            psi.store_row(node, row);
        }
        loss
    }
}

#[inline]
fn sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Loss plus sparse gradients for one (input, target leaf) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub grad_phi: Vec<f64>,
    /// One entry per internal node on the target's path, root first.
    pub grad_nodes: Vec<(u32, Vec<f64>)>,
}

/// A code tree together with its node parameter rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanTree {
    pub codes: CodeTree,
    pub node_vectors: EmbeddingMatrix,
}

impl HuffmanTree {
    /// Huffman tree with `dim`-wide node vectors initialized to zero.
    pub fn build(freqs: &FrequencyTable, dim: usize) -> Result<Self> {
        Ok(Self::with_codes(CodeTree::huffman(freqs)?, dim))
    }

    /// Balanced tree for a vocabulary bounded by `n_max`.
    pub fn bounded(n_max: usize, dim: usize) -> Result<Self> {
        Ok(Self::with_codes(CodeTree::balanced(n_max)?, dim))
    }

    pub fn with_codes(codes: CodeTree, dim: usize) -> Self {
        let node_vectors = EmbeddingMatrix::zeros(codes.n_internal(), dim);
        HuffmanTree {
            codes,
            node_vectors,
        }
    }

    pub fn leaf_log_probability(&self, phi: &[f64], leaf: LeafId) -> Result<f64> {
        self.check_dim(phi)?;
        self.codes
            .leaf_log_probability(&self.node_vectors, phi, leaf)
    }

    pub fn loss_and_gradients(&self, phi: &[f64], leaf: LeafId) -> Result<Gradients> {
        self.check_dim(phi)?;
        self.codes.loss_and_gradients(&self.node_vectors, phi, leaf)
    }

    fn check_dim(&self, phi: &[f64]) -> Result<()> {
        if self.codes.n_internal() > 0 && phi.len() != self.node_vectors.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.node_vectors.dim(),
                actual: phi.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(freqs: &[u64]) -> Vec<usize> {
        CodeTree::huffman(&FrequencyTable::from_counts(freqs.to_vec()))
            .unwrap()
            .code_lengths()
    }

    #[test]
    fn two_leaves() {
        assert_eq!(lengths(&[100, 1]), [1, 1]);
    }

    #[test]
    fn equal_counts_give_equal_lengths() {
        assert_eq!(lengths(&[3, 3, 3, 3]), [2, 2, 2, 2]);
    }

    #[test]
    fn skewed_counts() {
        assert_eq!(lengths(&[5, 2, 1, 1]), [1, 2, 3, 3]);
    }

    #[test]
    fn zero_counts_act_as_one() {
        assert_eq!(lengths(&[0, 0]), [1, 1]);
    }

    #[test]
    fn empty_vocabulary() {
        assert_eq!(
            CodeTree::huffman(&FrequencyTable::new()),
            Err(Error::EmptyVocabulary)
        );
        assert_eq!(CodeTree::balanced(0), Err(Error::EmptyVocabulary));
    }

    #[test]
    fn single_leaf_is_certain() {
        let t = HuffmanTree::build(&FrequencyTable::from_counts(alloc::vec![4]), 3).unwrap();
        assert_eq!(t.codes.code_length(0), 0);
        assert_eq!(t.leaf_log_probability(&[1.0, 2.0, 3.0], 0).unwrap(), 0.0);
        let b = HuffmanTree::bounded(1, 2).unwrap();
        assert_eq!(b.codes.code_lengths(), [0]);
        assert!(b.codes.kraft_is_exact());
    }

    #[test]
    fn balanced_shapes() {
        assert_eq!(CodeTree::balanced(8).unwrap().code_lengths(), [3; 8]);
        let five = CodeTree::balanced(5).unwrap();
        let mut l = five.code_lengths();
        l.sort_unstable();
        assert_eq!(l, [2, 2, 2, 3, 3]);
        assert_eq!(five.kraft_sum(), 1.0);
        assert!(five.kraft_is_exact());
    }

    #[test]
    fn paths_are_prefix_free() {
        for n in 1..40 {
            for tree in [
                CodeTree::balanced(n).unwrap(),
                CodeTree::huffman(&FrequencyTable::from_counts((1..=n as u64).collect())).unwrap(),
            ] {
                let paths: Vec<Vec<(u32, u8)>> =
                    (0..n as u32).map(|l| tree.path(l).collect()).collect();
                for (i, a) in paths.iter().enumerate() {
                    for (j, b) in paths.iter().enumerate() {
                        if i != j {
                            assert!(!b.starts_with(a), "n={n} leaf {i} prefixes {j}");
                        }
                    }
                }
                assert!(tree.kraft_is_exact());
                assert!(tree.path(0).all(|(node, _)| (node as usize) < tree.n_internal()));
            }
        }
    }

    #[test]
    fn zero_parameters_give_half_per_step() {
        let t = HuffmanTree::build(&FrequencyTable::from_counts(alloc::vec![5, 2, 1, 1]), 2).unwrap();
        let lp = t.leaf_log_probability(&[0.3, -0.7], 3).unwrap();
        assert!((lp + 3.0 * core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn two_leaf_closed_form() {
        let mut t = HuffmanTree::build(&FrequencyTable::from_counts(alloc::vec![1, 1]), 1).unwrap();
        t.node_vectors.row_mut(0)[0] = 2.0;
        let bit0 = t.codes.path(0).next().unwrap().1;
        let (leaf0, leaf1) = if bit0 == 0 { (0, 1) } else { (1, 0) };
        let p0 = t.leaf_log_probability(&[1.0], leaf0).unwrap();
        let p1 = t.leaf_log_probability(&[1.0], leaf1).unwrap();
        assert!((p0 + 0.126_928_011_042_972_6).abs() < 1e-12, "{p0}");
        assert!((p1 + 2.126_928_011_042_972_6).abs() < 1e-12, "{p1}");
    }

    #[test]
    fn zero_state_gradients() {
        let t = HuffmanTree::build(&FrequencyTable::from_counts(alloc::vec![1, 1]), 1).unwrap();
        let leaf = if t.codes.path(0).next().unwrap().1 == 0 { 0 } else { 1 };
        let g = t.loss_and_gradients(&[1.0], leaf).unwrap();
        assert!((g.loss - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g.grad_phi, [0.0]);
        assert_eq!(g.grad_nodes, [(0, alloc::vec![-0.5])]);

        let g = t.loss_and_gradients(&[0.0], leaf).unwrap();
        assert_eq!(g.grad_nodes[0].1, [0.0]);
    }

    #[test]
    fn unassigned_leaf() {
        let t = HuffmanTree::bounded(4, 2).unwrap();
        assert_eq!(
            t.leaf_log_probability(&[0.0, 0.0], 4),
            Err(Error::UnassignedLeaf(4))
        );
        assert!(t.loss_and_gradients(&[0.0], 1).is_err());
    }

    #[test]
    fn descend_applies_negative_gradient() {
        let codes = CodeTree::huffman(&FrequencyTable::from_counts(alloc::vec![4, 3, 2, 1, 1])).unwrap();
        let mut psi = EmbeddingMatrix::zeros(codes.n_internal(), 3);
        for (i, x) in (0..psi.rows() * 3).zip([0.3, -0.2, 0.5, 0.1, 0.9, -0.4, 0.2, 0.2, -0.6, 0.7, 0.05, -0.3]) {
            psi.row_mut(i / 3)[i % 3] = x;
        }
        let phi = [0.4, -0.1, 0.25];
        let alpha = 0.1;
        let expected = codes.loss_and_gradients(&psi, &phi, 3).unwrap();

        let shared = SharedMatrix::from(&psi);
        let mut delta = [0.0; 3];
        let mut row = [0.0; 3];
        let loss = codes.descend(&shared, &phi, 3, alpha, &mut delta, &mut row);
        assert!((loss - expected.loss).abs() < 1e-15);
        for (d, g) in delta.iter().zip(&expected.grad_phi) {
            assert!((d + alpha * g).abs() < 1e-15);
        }
        for (node, g) in &expected.grad_nodes {
            for c in 0..3 {
                let want = psi.row(*node as usize)[c] - alpha * g[c];
                assert!((shared.get(*node as usize, c) - want).abs() < 1e-15);
            }
        }
    }
}
