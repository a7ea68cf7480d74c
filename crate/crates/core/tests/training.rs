use std::sync::OnceLock;

use walkembed_core::eval::{self, SplitConfig, SweepGrid};
use walkembed_core::walks;
use walkembed_core::{generate, math, trainer, EmbeddingMatrix, Graph, LabelTable, TrainConfig, Trainer};

fn sbm() -> &'static (Graph, LabelTable) {
    static G: OnceLock<(Graph, LabelTable)> = OnceLock::new();
    G.get_or_init(|| generate::sbm(&[100; 4], 0.1, 0.005, 0).unwrap())
}

fn sbm_config() -> TrainConfig {
    TrainConfig {
        d: 64,
        gamma: 40,
        ..TrainConfig::default()
    }
}

fn sbm_embedding() -> &'static EmbeddingMatrix {
    static PHI: OnceLock<EmbeddingMatrix> = OnceLock::new();
    PHI.get_or_init(|| trainer::train(&sbm().0, &sbm_config()).unwrap())
}

#[test]
fn blocks_are_closer_inside_than_across() {
    let phi = sbm_embedding();
    assert!(phi.is_finite());
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for a in 0..400 {
        for b in 0..a {
            let c = math::cosine(phi.row(a), phi.row(b));
            if a / 100 == b / 100 {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    let gap = math::mean(&intra) - math::mean(&inter);
    assert!(gap >= 0.2, "intra - inter cosine = {gap}");
}

#[test]
fn embeddings_beat_majority_on_sparse_labels() {
    let split = SplitConfig {
        t_r: 0.1,
        repetitions: 10,
        seed: 0,
    };
    let r = eval::evaluate(sbm_embedding(), &sbm().1, &split, eval::DEFAULT_REG).unwrap();
    assert!(r.micro.mean - r.majority_micro.mean >= 0.3, "{r:?}");
}

#[test]
fn smoothed_loss_falls_over_first_pass() {
    let (g, _) = sbm();
    let config = sbm_config();
    let trainer = Trainer::for_graph(g, &config).unwrap();
    let mut scratch = trainer.scratch();
    let mut smoothed = None;
    let mut first = None;
    for root in walks::pass_order(g.n_vertices(), config.seed, 0) {
        let walk = walks::rooted_walk(g, root, config.t, config.seed, 0).unwrap();
        let loss = trainer.process_walk(&walk, &mut scratch).unwrap().mean_loss();
        let s = smoothed.map_or(loss, |s: f64| 0.95 * s + 0.05 * loss);
        smoothed = Some(s);
        first.get_or_insert(s);
    }
    let (first, last) = (first.unwrap(), smoothed.unwrap());
    assert!(last < first, "smoothed loss {first} -> {last}");
}

#[test]
fn more_walks_do_not_hurt() {
    let (g, labels) = sbm();
    let grid = SweepGrid {
        dims: vec![16],
        gammas: vec![5, 40],
        t_rs: vec![0.1],
    };
    let split = SplitConfig {
        t_r: 0.1,
        repetitions: 10,
        seed: 0,
    };
    let cells = eval::sweep(g, labels, &grid, &TrainConfig::default(), &split, eval::DEFAULT_REG).unwrap();
    let score = |gamma| cells.iter().find(|c| c.gamma == gamma).unwrap().report.micro.mean;
    assert!(score(40) >= score(5) - 0.02, "{} vs {}", score(40), score(5));
}

#[test]
fn preferential_attachment_is_heavy_tailed() {
    let g = generate::preferential_attachment(10_000, 3, 0).unwrap();
    let mut degrees: Vec<usize> = (0..g.n_vertices() as u32).map(|v| g.degree(v)).collect();
    degrees.sort_unstable();
    let median = degrees[degrees.len() / 2];
    let max = *degrees.last().unwrap();
    assert!(max >= 20 * median, "max {max}, median {median}");

    // empirical CCDF at every distinct degree, on log-log axes
    let n = degrees.len() as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut i = 0;
    while i < degrees.len() {
        let k = degrees[i];
        xs.push((k as f64).ln());
        ys.push(((degrees.len() - i) as f64 / n).ln());
        while i < degrees.len() && degrees[i] == k {
            i += 1;
        }
    }
    let r = math::pearson(&xs, &ys);
    assert!(r <= -0.95, "log-log CCDF correlation {r}");
    assert!(math::least_squares_slope(&xs, &ys) < -1.0);
}
