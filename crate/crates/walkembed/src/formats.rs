//! Text file formats.
//!
//! * Edge lists: one `u v` pair per line, `#` comment lines and blank lines
//!   skipped. Vertex tokens are arbitrary strings.
//! * Labels: `vertex label...` per line.
//! * Walk corpora: one walk per line, space-separated vertex labels.
//! * Embeddings: a header `n d`, then `label x_1 ... x_d` per vertex. Values
//!   are written in shortest round-trip form, so loading recovers them bit
//!   for bit.

use std::io::{BufRead, Write};

use walkembed_core::{EmbeddingMatrix, Graph, GraphBuilder, IdMap, LabelTable, Walk};

use crate::error::{parse_err, Error, Result};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::from(e))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

/// Parses an edge list into a graph with ids in first-seen order.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<(Graph, IdMap)> {
    let mut builder = GraphBuilder::new();
    read_edges_into(reader, &mut builder)?;
    if builder.n_vertices() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(builder.build(directed)?)
}

fn read_edges_into<R: BufRead>(reader: R, builder: &mut GraphBuilder) -> Result<()> {
    for line in content_lines(reader) {
        let (no, line) = line?;
        let mut tok = line.split_whitespace();
        match (tok.next(), tok.next(), tok.next()) {
            (Some(u), Some(v), None) => builder.add_edge(u, v),
            _ => return Err(parse_err(no, format!("expected \"u v\", got {line:?}"))),
        }
    }
    Ok(())
}

/// Writes every edge once (every arc for directed graphs).
pub fn write_edge_list<W: Write>(mut out: W, g: &Graph, ids: &IdMap) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", ids.name(u), ids.name(v))?;
    }
    Ok(())
}

/// A parsed label file, not yet tied to a vertex numbering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelFile {
    pub entries: Vec<(String, Vec<String>)>,
}

/// Parses `vertex label...` lines.
pub fn parse_labels<R: BufRead>(reader: R) -> Result<LabelFile> {
    let mut entries = Vec::new();
    for line in content_lines(reader) {
        let (_, line) = line?;
        let mut tok = line.split_whitespace();
        let vertex = tok.next().unwrap_or_default().to_string();
        entries.push((vertex, tok.map(str::to_string).collect()));
    }
    Ok(LabelFile { entries })
}

impl LabelFile {
    /// Distinct label tokens in id order: numeric order when every token is
    /// an unsigned integer, lexicographic otherwise.
    pub fn label_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .entries
            .iter()
            .flat_map(|(_, ls)| ls.iter().cloned())
            .collect();
        names.sort();
        names.dedup();
        if names.iter().all(|n| n.parse::<u64>().is_ok()) {
            names.sort_by_key(|n| n.parse::<u64>().unwrap());
        }
        names
    }

    pub fn vertices(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(v, _)| v.as_str())
    }

    /// Label table over the numbering `ids`; vertices missing from `ids`
    /// are an error.
    pub fn resolve(&self, ids: &IdMap) -> Result<LabelTable> {
        let names = self.label_names();
        let mut table = LabelTable::new(ids.len(), names.len());
        for (vertex, labels) in &self.entries {
            let v = ids
                .get(vertex)
                .ok_or_else(|| Error::UnknownVertex(vertex.clone()))?;
            for l in labels {
                let id = names.binary_search_by(|n| cmp_label(n, l)).unwrap();
                table.insert(v, id as u32);
            }
        }
        Ok(table)
    }
}

fn cmp_label(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Parses a label file on its own, numbering vertices in first-seen order.
pub fn load_labels<R: BufRead>(reader: R) -> Result<(LabelTable, IdMap)> {
    let file = parse_labels(reader)?;
    let mut ids = IdMap::new();
    for v in file.vertices() {
        ids.intern(v);
    }
    Ok((file.resolve(&ids)?, ids))
}

/// A graph with vertex labels. Vertices that only appear in the label file
/// are admitted as isolated vertices.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub ids: IdMap,
    pub labels: LabelTable,
    pub label_names: Vec<String>,
}

pub fn load_dataset<R1: BufRead, R2: BufRead>(edges: R1, labels: R2, directed: bool) -> Result<Dataset> {
    let mut builder = GraphBuilder::new();
    read_edges_into(edges, &mut builder)?;
    if builder.n_vertices() == 0 {
        return Err(Error::EmptyInput);
    }
    let file = parse_labels(labels)?;
    for v in file.vertices() {
        builder.add_vertex(v);
    }
    let (graph, ids) = builder.build(directed)?;
    let labels = file.resolve(&ids)?;
    Ok(Dataset {
        graph,
        ids,
        labels,
        label_names: file.label_names(),
    })
}

pub fn write_labels<W: Write>(mut out: W, labels: &LabelTable, ids: &IdMap) -> Result<()> {
    for v in 0..ids.len() as u32 {
        write!(out, "{}", ids.name(v))?;
        for l in labels.labels(v) {
            write!(out, " {l}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_walk<W: Write + ?Sized>(out: &mut W, walk: &[u32], ids: &IdMap) -> Result<()> {
    let mut first = true;
    for &v in walk {
        if !first {
            out.write_all(b" ")?;
        }
        out.write_all(ids.name(v).as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")?;
    Ok(())
}

/// Walks as lines of raw vertex tokens; blank lines are skipped. Nothing is
/// checked against any graph.
pub fn read_walks<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Vec<String>>> {
    reader.lines().filter_map(|line| match line {
        Err(e) => Some(Err(Error::from(e))),
        Ok(l) => {
            let toks: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            (!toks.is_empty()).then_some(Ok(toks))
        }
    })
}

/// Reads walks bound to an existing numbering; unknown vertices are errors.
pub fn read_walks_bound<R: BufRead>(reader: R, ids: &IdMap) -> Result<Vec<Walk>> {
    let mut walks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let mut walk = Vec::new();
        for tok in line.split_whitespace() {
            let v = ids
                .get(tok)
                .ok_or_else(|| parse_err(i + 1, format!("unknown vertex {tok:?}")))?;
            walk.push(v);
        }
        if !walk.is_empty() {
            walks.push(Walk(walk));
        }
    }
    Ok(walks)
}

/// Reads walks, numbering vertices in first-seen order.
pub fn read_walks_interned<R: BufRead>(reader: R) -> Result<(Vec<Walk>, IdMap)> {
    let mut ids = IdMap::new();
    let mut walks = Vec::new();
    for toks in read_walks(reader) {
        walks.push(Walk(toks?.iter().map(|t| ids.intern(t)).collect()));
    }
    Ok((walks, ids))
}

pub fn save_embeddings<W: Write>(mut out: W, phi: &EmbeddingMatrix, names: &[String]) -> Result<()> {
    if names.len() != phi.rows() {
        return Err(Error::Usage(format!(
            "{} names for {} embedding rows",
            names.len(),
            phi.rows()
        )));
    }
    writeln!(out, "{} {}", phi.rows(), phi.dim())?;
    for (name, row) in names.iter().zip(phi.iter_rows()) {
        out.write_all(name.as_bytes())?;
        for x in row {
            write!(out, " {x}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_embeddings<R: BufRead>(reader: R) -> Result<(EmbeddingMatrix, Vec<String>)> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(parse_err(1, "missing header")),
    };
    let mut head = header.split_whitespace().map(str::parse::<usize>);
    let (n, d) = match (head.next(), head.next(), head.next()) {
        (Some(Ok(n)), Some(Ok(d)), None) => (n, d),
        _ => return Err(parse_err(1, format!("bad header {header:?}"))),
    };
    let mut names = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * d);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let name = tok.next().unwrap().to_string();
        let before = values.len();
        for x in tok {
            let x: f64 = x
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad number {x:?}")))?;
            values.push(x);
        }
        if values.len() - before != d {
            return Err(parse_err(
                i + 1,
                format!("expected {d} values, got {}", values.len() - before),
            ));
        }
        names.push(name);
    }
    if names.len() != n {
        return Err(parse_err(1, format!("header promises {n} rows, found {}", names.len())));
    }
    Ok((EmbeddingMatrix::from_vec(n, d, values)?, names))
}
