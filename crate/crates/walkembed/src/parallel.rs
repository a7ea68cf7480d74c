//! Multi-threaded training over one shared, unlocked parameter store.
//!
//! Workers pull roots of the current pass from a shared cursor and update
//! `phi`/`psi` rows without any mutual exclusion; the progress counter inside
//! the trainer is the only synchronized value. One worker runs inline on the
//! calling thread and reproduces the serial trainer exactly.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use walkembed_core::trainer::{Scratch, UpdateStats};
use walkembed_core::walks::{self, Walk};
use walkembed_core::{EmbeddingMatrix, Graph, TrainConfig, TrainMode, Trainer};

use crate::error::{Error, Result};

/// Environment variable supplying the default worker count.
pub const WORKERS_ENV: &str = "WALKEMBED_WORKERS";

fn run_workers<F>(workers: usize, trainer: &Trainer, job: F) -> Result<UpdateStats>
where
    F: Fn(&mut Scratch) -> Result<UpdateStats> + Sync,
{
    if workers <= 1 {
        return job(&mut trainer.scratch());
    }
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| s.spawn(|| job(&mut trainer.scratch())))
            .collect();
        let mut total = UpdateStats::default();
        for h in handles {
            total += h.join().expect("training worker panicked")?;
        }
        Ok(total)
    })
}

/// Runs pass `pass` over `g` with `config.workers` workers.
pub fn run_pass(trainer: &Trainer, g: &Graph, config: &TrainConfig, pass: usize) -> Result<UpdateStats> {
    let order = walks::pass_order(g.n_vertices(), config.seed, pass);
    let cursor = AtomicUsize::new(0);
    run_workers(config.workers, trainer, |scratch| {
        let mut stats = UpdateStats::default();
        loop {
            let i = cursor.fetch_add(1, Ordering::Relaxed);
            let Some(&root) = order.get(i) else { break };
            let walk = walks::rooted_walk(g, root, config.t, config.seed, pass)?;
            stats += trainer.process_walk(&walk, scratch)?;
        }
        Ok(stats)
    })
}

/// Batch training with `config.workers` lock-free workers.
pub fn train_parallel(g: &Graph, config: &TrainConfig) -> Result<EmbeddingMatrix> {
    if config.mode != TrainMode::Batch {
        return Err(Error::Usage("parallel training requires batch mode".into()));
    }
    let trainer = Trainer::for_graph(g, config)?;
    for pass in 0..config.gamma {
        run_pass(&trainer, g, config, pass)?;
    }
    Ok(trainer.embeddings())
}

/// Trains on a fixed corpus with `workers` workers drawing walks from a
/// shared cursor.
pub fn train_walks(trainer: &Trainer, corpus: &[Walk], workers: usize) -> Result<UpdateStats> {
    let cursor = AtomicUsize::new(0);
    run_workers(workers, trainer, |scratch| {
        let mut stats = UpdateStats::default();
        while let Some(walk) = corpus.get(cursor.fetch_add(1, Ordering::Relaxed)) {
            stats += trainer.process_walk(walk, scratch)?;
        }
        Ok(stats)
    })
}
