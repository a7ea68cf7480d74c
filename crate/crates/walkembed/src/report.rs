//! Tab-separated reports.

use std::io::Write;

use walkembed_core::eval::{EvalReport, SweepCell};
use walkembed_core::walks::PowerLawFit;
use walkembed_core::{EmbeddingMatrix, IdMap, LabelTable};

use crate::error::{Error, Result};

pub const EVAL_HEADER: &str = "t_r\td\tgamma\tmetric\tmean\tstd";

fn opt(x: Option<usize>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Rows `(t_r, d, gamma, metric, mean, std)`; an unknown `gamma` prints `NA`.
pub fn write_eval_rows<W: Write + ?Sized>(out: &mut W, d: usize, gamma: Option<usize>, report: &EvalReport) -> Result<()> {
    for (metric, s) in report.metrics() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}",
            report.t_r,
            d,
            opt(gamma),
            metric,
            s.mean,
            s.std
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write + ?Sized>(out: &mut W, cells: &[SweepCell]) -> Result<()> {
    writeln!(out, "{EVAL_HEADER}")?;
    for c in cells {
        write_eval_rows(out, c.d, Some(c.gamma), &c.report)?;
    }
    Ok(())
}

/// `rank vertex count` rows followed by `# slope` (and optionally
/// `# spearman_degree`) summary lines.
pub fn write_rank_frequency<W: Write + ?Sized>(out: &mut W, fit: &PowerLawFit, ids: &IdMap, degree_corr: Option<f64>) -> Result<()> {
    writeln!(out, "rank\tvertex\tcount")?;
    for r in &fit.ranked {
        writeln!(out, "{}\t{}\t{}", r.rank, ids.name(r.vertex), r.count)?;
    }
    writeln!(out, "# slope\t{:.6}", fit.slope)?;
    writeln!(out, "# fit_ranks\t{}\t{}", fit.window.0 + 1, fit.window.1)?;
    if let Some(rho) = degree_corr {
        writeln!(out, "# spearman_degree\t{rho:.6}")?;
    }
    Ok(())
}

/// Scatter rows `vertex x y [label]` from two chosen coordinates. Multiple
/// labels are joined with commas.
pub fn write_plot<W: Write + ?Sized>(
    out: &mut W,
    phi: &EmbeddingMatrix,
    names: &[String],
    dims: Option<(usize, usize)>,
    labels: Option<(&LabelTable, &IdMap, &[String])>,
) -> Result<()> {
    let (i, j) = match dims {
        Some((i, j)) => (i, j),
        None if phi.dim() == 2 => (0, 1),
        None => {
            return Err(Error::Usage(format!(
                "embedding has {} dimensions; choose two with --dims",
                phi.dim()
            )))
        }
    };
    if i >= phi.dim() || j >= phi.dim() {
        return Err(Error::Usage(format!(
            "--dims {i},{j} out of range for dimension {}",
            phi.dim()
        )));
    }
    write!(out, "vertex\tx\ty")?;
    if labels.is_some() {
        write!(out, "\tlabel")?;
    }
    writeln!(out)?;
    for (name, row) in names.iter().zip(phi.iter_rows()) {
        write!(out, "{name}\t{}\t{}", row[i], row[j])?;
        if let Some((table, ids, label_names)) = labels {
            let v = ids
                .get(name)
                .ok_or_else(|| Error::UnknownVertex(name.clone()))?;
            let joined: Vec<&str> = table
                .labels(v)
                .iter()
                .map(|&l| label_names[l as usize].as_str())
                .collect();
            write!(out, "\t{}", joined.join(","))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
