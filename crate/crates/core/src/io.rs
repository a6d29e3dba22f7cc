//! Plain-text file formats.
//!
//! All formats are UTF-8, one record per line, with `#` starting a comment.
//! Fields are separated by whitespace or commas. Floats are written with 17
//! significant digits so that a save/load cycle is lossless.
//!
//! | file        | line                   |
//! |-------------|------------------------|
//! | edge list   | `i j w`                |
//! | features    | `x₁ x₂ … x_d`          |
//! | labels      | `i y`                  |
//! | votes       | `v₁ v₂ … v_k` (−1 = abstain) |
//! | accuracies  | `j p`                  |
//! | prediction  | `i f flag`             |
//!
//! An edge list may carry a `# nodes N` line so that trailing isolated nodes
//! survive a round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, Label, LabelSet};
use crate::multi_source::{LabelerAccuracy, WeakVoteMatrix};
use crate::solver::{NodeFlag, Prediction};

/// Float formatting used by every writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Record<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        (!fields.is_empty()).then_some(Record { line: idx + 1, fields })
    })
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: PathBuf::from(self.path),
            line,
            message: message.into(),
        }
    }

    fn field<T: FromStr>(&self, rec: &Record, idx: usize, what: &str) -> Result<T> {
        let raw = rec.fields[idx];
        raw.parse()
            .map_err(|_| self.err(rec.line, format!("cannot parse {what} from {raw:?}")))
    }

    fn arity(&self, rec: &Record, n: usize) -> Result<()> {
        if rec.fields.len() != n {
            return Err(self.err(rec.line, format!("expected {n} fields, found {}", rec.fields.len())));
        }
        Ok(())
    }

    /// Attaches the file name to a validation error raised after parsing.
    fn wrap(&self, e: Error) -> Error {
        match e {
            Error::Io { .. } | Error::Parse { .. } => e,
            other => self.err(0, other.to_string()),
        }
    }
}

fn declared_nodes(text: &str) -> Option<usize> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .filter_map(|l| l.trim().strip_prefix("nodes"))
        .find_map(|n| n.trim().parse().ok())
}

/// Parses an edge list. The node count is the largest of `node_count`, a
/// `# nodes N` line, and one past the largest index.
pub fn parse_edge_list(text: &str, path: &Path, node_count: Option<usize>) -> Result<Graph> {
    let ctx = Ctx { path };
    let mut edges = Vec::new();
    for rec in records(text) {
        ctx.arity(&rec, 3)?;
        let i: usize = ctx.field(&rec, 0, "node index")?;
        let j: usize = ctx.field(&rec, 1, "node index")?;
        let w: f64 = ctx.field(&rec, 2, "weight")?;
        edges.push((rec.line, i, j, w));
    }
    let implied = edges.iter().map(|&(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let n = implied
        .max(declared_nodes(text).unwrap_or(0))
        .max(node_count.unwrap_or(0));
    if let Some(limit) = node_count {
        if let Some(&(line, i, j, _)) = edges.iter().find(|&&(_, i, j, _)| i.max(j) >= limit) {
            return Err(ctx.err(line, format!("edge ({i}, {j}) exceeds node count {limit}")));
        }
    }
    Graph::from_edges(n, edges.iter().map(|&(_, i, j, w)| (i, j, w))).map_err(|e| ctx.wrap(e))
}

pub fn read_edge_list(path: &Path, node_count: Option<usize>) -> Result<Graph> {
    parse_edge_list(&read(path)?, path, node_count)
}

pub fn format_edge_list(graph: &Graph) -> String {
    let mut s = format!("# nodes {}\n", graph.node_count());
    for (i, j, w) in graph.edges() {
        let _ = writeln!(s, "{i} {j} {}", fmt_f64(w));
    }
    s
}

pub fn write_edge_list(graph: &Graph, path: &Path) -> Result<()> {
    write(path, &format_edge_list(graph))
}

pub fn parse_features(text: &str, path: &Path) -> Result<FeatureMatrix> {
    let ctx = Ctx { path };
    let mut rows = Vec::new();
    for rec in records(text) {
        let row = (0..rec.fields.len())
            .map(|c| ctx.field::<f64>(&rec, c, "feature"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(ctx.err(rec.line, format!("row has {} columns, expected {first}", row.len())));
            }
        }
        rows.push(row);
    }
    FeatureMatrix::from_rows(rows).map_err(|e| ctx.wrap(e))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    parse_features(&read(path)?, path)
}

pub fn format_features(features: &FeatureMatrix) -> String {
    let mut s = String::new();
    for i in 0..features.rows() {
        let row: Vec<String> = features.row(i).iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_features(features: &FeatureMatrix, path: &Path) -> Result<()> {
    write(path, &format_features(features))
}

fn parse_label_lines(text: &str, ctx: &Ctx) -> Result<Vec<(usize, Label)>> {
    let mut out = Vec::new();
    for rec in records(text) {
        ctx.arity(&rec, 2)?;
        let i: usize = ctx.field(&rec, 0, "node index")?;
        let y: Label = ctx.field(&rec, 1, "label")?;
        if y > 1 {
            return Err(ctx.err(rec.line, format!("label {y} is not 0 or 1")));
        }
        out.push((i, y));
    }
    Ok(out)
}

pub fn parse_labels(text: &str, path: &Path) -> Result<LabelSet> {
    let ctx = Ctx { path };
    LabelSet::new(parse_label_lines(text, &ctx)?).map_err(|e| ctx.wrap(e))
}

pub fn read_labels(path: &Path) -> Result<LabelSet> {
    parse_labels(&read(path)?, path)
}

pub fn format_labels(labels: &LabelSet) -> String {
    labels.entries().iter().map(|(i, y)| format!("{i} {y}\n")).collect()
}

pub fn write_labels(labels: &LabelSet, path: &Path) -> Result<()> {
    write(path, &format_labels(labels))
}

/// Ground truth in the label format, required to cover every node.
pub fn parse_truth(text: &str, path: &Path, node_count: usize) -> Result<Vec<Label>> {
    let ctx = Ctx { path };
    let set = LabelSet::new(parse_label_lines(text, &ctx)?).map_err(|e| ctx.wrap(e))?;
    set.check_against(node_count).map_err(|e| ctx.wrap(e))?;
    if set.len() != node_count {
        return Err(ctx.err(0, format!("truth covers {} of {node_count} nodes", set.len())));
    }
    Ok(set.entries().iter().map(|&(_, y)| y).collect())
}

pub fn read_truth(path: &Path, node_count: usize) -> Result<Vec<Label>> {
    parse_truth(&read(path)?, path, node_count)
}

pub fn format_truth(truth: &[Label]) -> String {
    truth.iter().enumerate().map(|(i, y)| format!("{i} {y}\n")).collect()
}

pub fn write_truth(truth: &[Label], path: &Path) -> Result<()> {
    write(path, &format_truth(truth))
}

pub fn parse_votes(text: &str, path: &Path) -> Result<WeakVoteMatrix> {
    let ctx = Ctx { path };
    let mut rows = Vec::new();
    for rec in records(text) {
        let row = (0..rec.fields.len())
            .map(|c| ctx.field::<i8>(&rec, c, "vote"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = row.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(ctx.err(rec.line, format!("vote {v} is not 0, 1 or -1")));
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(ctx.err(rec.line, format!("row has {} votes, expected {first}", row.len())));
            }
        }
        rows.push(row);
    }
    WeakVoteMatrix::from_encoded_rows(&rows).map_err(|e| ctx.wrap(e))
}

pub fn read_votes(path: &Path) -> Result<WeakVoteMatrix> {
    parse_votes(&read(path)?, path)
}

pub fn format_votes(votes: &WeakVoteMatrix) -> String {
    let mut s = String::new();
    for i in 0..votes.node_count() {
        let row: Vec<&str> = (0..votes.labeler_count())
            .map(|j| match votes.get(i, j) {
                None => "-1",
                Some(0) => "0",
                Some(_) => "1",
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_votes(votes: &WeakVoteMatrix, path: &Path) -> Result<()> {
    write(path, &format_votes(votes))
}

pub fn parse_accuracies(text: &str, path: &Path) -> Result<LabelerAccuracy> {
    let ctx = Ctx { path };
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for rec in records(text) {
        ctx.arity(&rec, 2)?;
        entries.push((
            rec.line,
            ctx.field(&rec, 0, "labeler index")?,
            ctx.field(&rec, 1, "accuracy")?,
        ));
    }
    let mut p = vec![None; entries.len()];
    for &(line, j, pj) in &entries {
        match p.get_mut(j) {
            Some(slot @ None) => *slot = Some(pj),
            Some(Some(_)) => return Err(ctx.err(line, format!("labeler {j} listed twice"))),
            None => return Err(ctx.err(line, format!("labeler index {j} leaves a gap"))),
        }
    }
    LabelerAccuracy::new(p.into_iter().flatten().collect()).map_err(|e| ctx.wrap(e))
}

pub fn read_accuracies(path: &Path) -> Result<LabelerAccuracy> {
    parse_accuracies(&read(path)?, path)
}

pub fn format_accuracies(acc: &LabelerAccuracy) -> String {
    acc.values()
        .iter()
        .enumerate()
        .map(|(j, &p)| format!("{j} {}\n", fmt_f64(p)))
        .collect()
}

pub fn write_accuracies(acc: &LabelerAccuracy, path: &Path) -> Result<()> {
    write(path, &format_accuracies(acc))
}

pub fn format_prediction(prediction: &Prediction) -> String {
    prediction
        .values
        .iter()
        .zip(&prediction.flags)
        .enumerate()
        .map(|(i, (&f, flag))| format!("{i} {} {}\n", fmt_f64(f), flag.as_str()))
        .collect()
}

pub fn write_prediction(prediction: &Prediction, path: &Path) -> Result<()> {
    write(path, &format_prediction(prediction))
}

/// Values and flags of a prediction file, in node order.
pub fn parse_prediction(text: &str, path: &Path) -> Result<(Vec<f64>, Vec<NodeFlag>)> {
    let ctx = Ctx { path };
    let mut values = Vec::new();
    let mut flags = Vec::new();
    for rec in records(text) {
        ctx.arity(&rec, 3)?;
        let i: usize = ctx.field(&rec, 0, "node index")?;
        if i != values.len() {
            return Err(ctx.err(rec.line, format!("expected node {}, found {i}", values.len())));
        }
        values.push(ctx.field(&rec, 1, "score")?);
        flags.push(ctx.field(&rec, 2, "flag")?);
    }
    Ok((values, flags))
}

pub fn read_prediction(path: &Path) -> Result<(Vec<f64>, Vec<NodeFlag>)> {
    parse_prediction(&read(path)?, path)
}
