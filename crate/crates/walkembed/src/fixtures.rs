//! Embedded datasets.

use crate::formats::{self, Dataset};

/// Zachary's karate club, 34 members and 78 friendships.
pub const KARATE_EDGES: &str = include_str!("../data/karate.edgelist");

/// The four communities of the maximum-modularity partition of the karate
/// club (Q = 0.4198), one label per member.
pub const KARATE_LABELS: &str = include_str!("../data/karate.labels");

pub fn karate() -> Dataset {
    formats::load_dataset(KARATE_EDGES.as_bytes(), KARATE_LABELS.as_bytes(), false)
        .expect("embedded karate fixture parses")
}

#[cfg(test)]
mod tests {
    #[test]
    fn karate_shape() {
        let k = super::karate();
        assert_eq!(k.graph.n_vertices(), 34);
        assert_eq!(k.graph.n_edges(), 78);
        assert_eq!(k.graph.n_arcs(), 156);
        assert_eq!(k.labels.n_labels(), 4);
        assert_eq!(k.labels.labeled().len(), 34);
    }
}
