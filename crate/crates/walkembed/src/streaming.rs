//! Streaming training from a walk source without a graph.

use std::io::BufRead;
use std::path::PathBuf;

use walkembed_core::{EmbeddingMatrix, StreamingTrainer, TrainConfig};

use crate::error::Result;
use crate::formats;
use crate::output;

/// When to flush intermediate embeddings while a stream is consumed.
#[derive(Debug, Clone, Default)]
pub struct SnapshotPolicy {
    /// Write a snapshot after every this many walks.
    pub every: Option<usize>,
    pub path: Option<PathBuf>,
}

/// Final embeddings and the vertex labels in leaf order.
pub struct StreamResult {
    pub embeddings: EmbeddingMatrix,
    pub names: Vec<String>,
    pub walks: usize,
    pub snapshots: usize,
}

/// Consumes walks line by line from `reader` and trains on each as it
/// arrives.
pub fn train_stream<R: BufRead>(
    reader: R,
    config: &TrainConfig,
    n_max: usize,
    snapshots: &SnapshotPolicy,
) -> Result<StreamResult> {
    let mut st: StreamingTrainer<String> = StreamingTrainer::new(config, n_max)?;
    let mut walks = 0;
    let mut written = 0;
    for walk in formats::read_walks(reader) {
        st.feed(&walk?)?;
        walks += 1;
        if let (Some(every), Some(path)) = (snapshots.every, &snapshots.path) {
            if every > 0 && walks % every == 0 {
                write_snapshot(&st, path)?;
                written += 1;
            }
        }
    }
    let (embeddings, names) = st.finish();
    Ok(StreamResult {
        embeddings,
        names,
        walks,
        snapshots: written,
    })
}

/// Flushes the current embeddings of `st` to `path`.
pub fn write_snapshot(st: &StreamingTrainer<String>, path: &std::path::Path) -> Result<()> {
    let phi = st.snapshot();
    output::write_atomic(path, |w| formats::save_embeddings(w, &phi, st.keys()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use walkembed_core::TrainMode;

    #[test]
    fn snapshots_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.emb");
        let config = TrainConfig {
            d: 3,
            w: 2,
            mode: TrainMode::Streaming,
            ..TrainConfig::default()
        };
        let policy = SnapshotPolicy {
            every: Some(2),
            path: Some(path.clone()),
        };
        let r = train_stream("a b c\nb c\nc a\n".as_bytes(), &config, 3, &policy).unwrap();
        assert_eq!((r.walks, r.snapshots), (3, 1));
        let (snap, names) = formats::load_embeddings(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap();
        assert_eq!(snap.rows(), 3);
        assert_eq!(names, ["a", "b", "c"]);
    }
}
