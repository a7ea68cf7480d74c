//! Synthetic graph generators.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::graph::{Graph, LabelTable};
use crate::rng::{self, stream};
use crate::VertexId;

/// Stochastic block model.
///
/// Vertices are laid out block by block and labeled with their block index.
/// Each unordered pair is joined with probability `p_in` inside a block and
/// `p_out` across blocks.
pub fn sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(Graph, LabelTable)> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(invalid("sbm requires 0 <= p_out < p_in <= 1"));
    }
    let n: usize = block_sizes.iter().sum();
    if n == 0 {
        return Err(invalid("sbm requires at least one vertex"));
    }
    let block: Vec<u32> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| core::iter::repeat_n(b as u32, size))
        .collect();

    let mut rng = rng::derive(seed, &[stream::GRAPH]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u as VertexId, v as VertexId));
            }
        }
    }
    let graph = Graph::from_edges(n, edges, false)?;
    let labels = LabelTable::from_sets(block.into_iter().map(|b| alloc::vec![b]).collect());
    Ok((graph, labels))
}

/// Preferential attachment (Barabási–Albert style).
///
/// Starts from a clique on `m + 1` vertices; every later vertex attaches to `m`
/// distinct existing vertices drawn with probability proportional to their
/// current degree.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || n <= m {
        return Err(invalid("preferential attachment requires n > m >= 1"));
    }
    let mut rng = rng::derive(seed, &[stream::GRAPH, 1]);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(m * n);
    // Every arc endpoint, so a uniform draw is degree-proportional.
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * m * n);

    for u in 0..=m as VertexId {
        for v in u + 1..=m as VertexId {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }

    let mut targets: Vec<VertexId> = Vec::with_capacity(m);
    for v in (m + 1) as VertexId..n as VertexId {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((v, t));
            endpoints.extend([v, t]);
        }
    }
    Graph::from_edges(n, edges, false)
}
