//! File formats: distance and coordinate CSV, whitespace-separated triplet,
//! mass and partition files, and JSON/DOT/CSV outputs.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use serde::Serialize;

use crate::cohesion::{CohesionMatrix, CommunityGraph};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::spaces::{default_labels, OutlierResponse};
use crate::structure::{PointLikeFamily, PointLikePartition, QuotientSpace};

/// Version stamped on every JSON document this module writes.
pub const SCHEMA_VERSION: u32 = 1;

struct Row {
    line: u64,
    cells: Vec<String>,
}

fn read_csv_rows<R: Read>(reader: R) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(Row {
            line,
            cells: rec.iter().map(str::to_owned).collect(),
        });
    }
    Ok(rows)
}

fn is_number(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

fn parse_number(cell: &str, line: u64) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("`{cell}` is not a number")))
}

/// Reads a square dissimilarity matrix, with or without a header row and a
/// leading label column.
pub fn read_distance_csv<R: Read>(reader: R) -> Result<(Vec<String>, SquareMatrix)> {
    let mut rows = read_csv_rows(reader)?;
    if rows.is_empty() {
        return Err(Error::parse(1, "empty distance matrix"));
    }
    // a textual first cell alone is a row label, not a header
    let first = &rows[0].cells;
    let first_textual =
        first[1..].iter().any(|c| !is_number(c)) || (first.len() > 1 && first[0].is_empty());
    // an all-numeric header only shows up as one extra row
    let numeric_header = !first_textual && rows.len() == rows[0].cells.len() + 1 && rows.len() > 1;
    let header = (first_textual || numeric_header).then(|| rows.remove(0));

    let n = rows.len();
    if n == 0 {
        return Err(Error::parse(header.map_or(1, |h| h.line), "no matrix rows"));
    }
    let width = rows[0].cells.len();
    let label_column = match width {
        w if w == n => false,
        w if w == n + 1 => true,
        w => {
            return Err(Error::parse(
                rows[0].line,
                format!("{w} fields for a matrix with {n} rows"),
            ))
        }
    };
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * n);
    for row in &rows {
        if row.cells.len() != width {
            return Err(Error::parse(
                row.line,
                format!("expected {width} fields, found {}", row.cells.len()),
            ));
        }
        let values = if label_column {
            labels.push(row.cells[0].clone());
            &row.cells[1..]
        } else {
            &row.cells[..]
        };
        for cell in values {
            data.push(parse_number(cell, row.line)?);
        }
    }

    let header_labels = header.map(|h| {
        let skip = usize::from(h.cells.len() == n + 1);
        (h.line, h.cells[skip..].to_vec())
    });
    let labels = match (label_column, header_labels) {
        (true, Some((line, h))) => {
            if h != labels {
                return Err(Error::parse(
                    line,
                    "header labels differ from the label column",
                ));
            }
            labels
        }
        (true, None) => labels,
        (false, Some((line, h))) => {
            if h.len() != n {
                return Err(Error::parse(
                    line,
                    format!("{} header labels for {n} rows", h.len()),
                ));
            }
            h
        }
        (false, None) => default_labels(n),
    };
    Ok((labels, SquareMatrix::from_row_major(n, data)))
}

/// Writes a labeled matrix that [`read_distance_csv`] reads back exactly.
pub fn write_matrix_csv<W: Write>(writer: W, labels: &[String], m: &SquareMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in labels.iter().zip(m.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one point per row. A header naming a `label` column supplies labels;
/// any other textual first row is treated as column names.
pub fn read_coords_csv<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rows = read_csv_rows(reader)?;
    if rows.is_empty() {
        return Err(Error::parse(1, "empty coordinate file"));
    }
    let mut label_col = None;
    if rows[0].cells.iter().any(|c| !is_number(c)) {
        let header = rows.remove(0);
        label_col = header
            .cells
            .iter()
            .position(|c| c.eq_ignore_ascii_case("label"));
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut coords = Vec::with_capacity(rows.len());
    let mut dim = None;
    for row in &rows {
        let mut point = Vec::with_capacity(row.cells.len());
        for (i, cell) in row.cells.iter().enumerate() {
            if Some(i) == label_col {
                labels.push(cell.clone());
            } else {
                point.push(parse_number(cell, row.line)?);
            }
        }
        if label_col.is_some_and(|c| c >= row.cells.len()) {
            return Err(Error::parse(row.line, "missing label field"));
        }
        match dim {
            None => dim = Some(point.len()),
            Some(d) if d != point.len() => {
                return Err(Error::parse(
                    row.line,
                    format!("expected {d} coordinates, found {}", point.len()),
                ))
            }
            _ => {}
        }
        coords.push(point);
    }
    if label_col.is_none() {
        labels = default_labels(coords.len());
    }
    Ok((labels, coords))
}

/// Content lines of a whitespace-separated file with their line numbers.
fn content_lines<R: BufRead>(reader: R) -> Result<Vec<(u64, Vec<String>)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<String> = body.split_whitespace().map(str::to_owned).collect();
        if !fields.is_empty() {
            out.push((i as u64 + 1, fields));
        }
    }
    Ok(out)
}

/// Reads outlier responses. `i j k` records one response naming `k` the
/// outlier of `{i, j, k}`; `i j k w` records weight `w` for it. Weights are
/// normalized per triple, so lines that already hold `T({i, j}, k)` for each
/// assignment of a triple come through unchanged. Labels are returned in
/// order of first appearance.
pub fn read_triplets<R: BufRead>(reader: R) -> Result<(Vec<String>, Vec<OutlierResponse>)> {
    let mut labels: Vec<String> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut responses = Vec::new();
    for (line, fields) in content_lines(reader)? {
        let count = match fields.len() {
            3 => 1.0,
            4 => {
                let w = parse_number(&fields[3], line)?;
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::parse(
                        line,
                        format!("weight {w} must be non-negative"),
                    ));
                }
                w
            }
            k => {
                return Err(Error::parse(
                    line,
                    format!("expected 3 or 4 fields, found {k}"),
                ))
            }
        };
        let (i, j, k) = (&fields[0], &fields[1], &fields[2]);
        if i == j || i == k || j == k {
            return Err(Error::parse(line, "a triplet needs three distinct points"));
        }
        for l in [i, j, k] {
            if !seen.contains_key(l) {
                seen.insert(l.clone(), labels.len());
                labels.push(l.clone());
            }
        }
        responses.push(OutlierResponse::new(i, j, k, count));
    }
    Ok((labels, responses))
}

fn label_index(labels: &[String]) -> HashMap<&str, usize> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect()
}

/// Reads `label p` lines; every label must appear exactly once.
pub fn read_mass<R: BufRead>(reader: R, labels: &[String]) -> Result<Vec<f64>> {
    let index = label_index(labels);
    let mut mass: Vec<Option<f64>> = vec![None; labels.len()];
    for (line, fields) in content_lines(reader)? {
        if fields.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected `label p`, found {} fields", fields.len()),
            ));
        }
        let i = *index
            .get(fields[0].as_str())
            .ok_or_else(|| Error::parse(line, format!("unknown label `{}`", fields[0])))?;
        let p = parse_number(&fields[1], line)?;
        if mass[i].replace(p).is_some() {
            return Err(Error::parse(
                line,
                format!("label `{}` repeated", fields[0]),
            ));
        }
    }
    mass.iter()
        .zip(labels)
        .map(|(p, l)| p.ok_or_else(|| Error::InvalidMass(format!("no mass given for `{l}`"))))
        .collect()
}

/// Reads `label block_id` lines into blocks, ordered by first appearance of
/// each block id.
pub fn read_partition<R: BufRead>(reader: R, labels: &[String]) -> Result<Vec<Vec<usize>>> {
    let index = label_index(labels);
    let mut block_ids: HashMap<String, usize> = HashMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; labels.len()];
    for (line, fields) in content_lines(reader)? {
        if fields.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected `label block_id`, found {} fields", fields.len()),
            ));
        }
        let i = *index
            .get(fields[0].as_str())
            .ok_or_else(|| Error::parse(line, format!("unknown label `{}`", fields[0])))?;
        if std::mem::replace(&mut assigned[i], true) {
            return Err(Error::parse(
                line,
                format!("label `{}` repeated", fields[0]),
            ));
        }
        let next = blocks.len();
        let b = *block_ids.entry(fields[1].clone()).or_insert(next);
        if b == next {
            blocks.push(Vec::new());
        }
        blocks[b].push(i);
    }
    if let Some(i) = assigned.iter().position(|a| !a) {
        return Err(Error::InvalidPartition(format!(
            "`{}` is in no block",
            labels[i]
        )));
    }
    Ok(blocks)
}

/// Writes a partition in the format [`read_partition`] reads.
pub fn write_partition<W: Write>(mut w: W, labels: &[String], blocks: &[Vec<usize>]) -> Result<()> {
    for (b, block) in blocks.iter().enumerate() {
        for &x in block {
            writeln!(w, "{} {b}", labels[x])?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CohesionDocument<'a> {
    pub schema_version: u32,
    pub labels: &'a [String],
    pub mass: &'a [f64],
    pub values: Vec<Vec<f64>>,
    pub weighted_mean: f64,
}

impl<'a> CohesionDocument<'a> {
    pub fn new(c: &'a CohesionMatrix) -> Self {
        CohesionDocument {
            schema_version: SCHEMA_VERSION,
            labels: c.labels(),
            mass: c.mass(),
            values: c.values().to_rows(),
            weighted_mean: c.weighted_mean(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FamilyNode {
    pub id: usize,
    pub members: Vec<String>,
    pub mass: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct FamilyDocument {
    pub schema_version: u32,
    pub labels: Vec<String>,
    pub roots: Vec<usize>,
    pub sets: Vec<FamilyNode>,
    /// Number of point-like partitions, as a decimal string since it can
    /// exceed any JSON-safe integer.
    pub partition_count: String,
    /// Listed only when requested and not too many.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<Vec<Vec<String>>>>,
}

impl FamilyDocument {
    pub fn new(
        family: &PointLikeFamily,
        labels: &[String],
        mass: &[f64],
        partition_count: u128,
        partitions: Option<&[PointLikePartition]>,
    ) -> Self {
        let names = |set: &[usize]| set.iter().map(|&x| labels[x].clone()).collect::<Vec<_>>();
        let sets = family
            .sets()
            .iter()
            .enumerate()
            .map(|(id, s)| FamilyNode {
                id,
                members: names(s),
                mass: s.iter().map(|&x| mass[x]).sum(),
                parent: family.parent(id),
                children: family.children(id),
            })
            .collect();
        FamilyDocument {
            schema_version: SCHEMA_VERSION,
            labels: labels.to_vec(),
            roots: family.roots(),
            sets,
            partition_count: partition_count.to_string(),
            partitions: partitions.map(|ps| {
                ps.iter()
                    .map(|p| p.blocks().iter().map(|b| names(b)).collect())
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct QuotientDocument {
    pub schema_version: u32,
    pub blocks: Vec<Vec<String>>,
    pub representatives: Vec<String>,
    pub pbar: Vec<f64>,
    pub cohesion: Vec<Vec<f64>>,
}

impl QuotientDocument {
    pub fn new(q: &QuotientSpace, labels: &[String], cohesion: &CohesionMatrix) -> Self {
        QuotientDocument {
            schema_version: SCHEMA_VERSION,
            blocks: q
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&x| labels[x].clone()).collect())
                .collect(),
            representatives: q
                .representatives()
                .iter()
                .map(|&x| labels[x].clone())
                .collect(),
            pbar: q.pbar().to_vec(),
            cohesion: cohesion.values().to_rows(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CommunityDocument<'a> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub graph: &'a CommunityGraph,
}

impl<'a> CommunityDocument<'a> {
    pub fn new(graph: &'a CommunityGraph) -> Self {
        CommunityDocument {
            schema_version: SCHEMA_VERSION,
            graph,
        }
    }
}

fn dot_id(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT graph; strong edges solid, weak edges dashed, one cluster
/// per community with more than one member.
pub fn write_community_dot<W: Write>(mut w: W, g: &CommunityGraph) -> Result<()> {
    writeln!(w, "graph cohesion {{")?;
    writeln!(w, "  // threshold {}", g.threshold)?;
    for (k, members) in g.communities.iter().enumerate() {
        if members.len() > 1 {
            writeln!(w, "  subgraph cluster_{k} {{")?;
            for &x in members {
                writeln!(w, "    {};", dot_id(&g.labels[x]))?;
            }
            writeln!(w, "  }}")?;
        } else {
            writeln!(w, "  {};", dot_id(&g.labels[members[0]]))?;
        }
    }
    for e in &g.edges {
        let style = if e.strong { "solid" } else { "dashed" };
        writeln!(
            w,
            "  {} -- {} [weight={}, style={style}];",
            dot_id(&g.labels[e.x]),
            dot_id(&g.labels[e.w]),
            e.weight
        )?;
    }
    writeln!(w, "}}")?;
    Ok(())
}

/// Edge list with columns `x, w, weight, strong`.
pub fn write_community_edges<W: Write>(writer: W, g: &CommunityGraph) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "w", "weight", "strong"])?;
    for e in &g.edges {
        w.write_record([
            g.labels[e.x].as_str(),
            g.labels[e.w].as_str(),
            &e.weight.to_string(),
            if e.strong { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_matrix_layouts() {
        let plain = "0,1,2\n1,0,3\n2,3,0\n";
        let (labels, m) = read_distance_csv(plain.as_bytes()).unwrap();
        assert_eq!(labels, vec!["0", "1", "2"]);
        assert_eq!(m.get(1, 2), 3.0);

        let header = "a,b,c\n0,1,2\n1,0,3\n2,3,0\n";
        assert_eq!(
            read_distance_csv(header.as_bytes()).unwrap().0,
            vec!["a", "b", "c"]
        );

        let column = "a,0,1,2\nb,1,0,3\nc,2,3,0\n";
        assert_eq!(
            read_distance_csv(column.as_bytes()).unwrap().0,
            vec!["a", "b", "c"]
        );

        let both = ",a,b,c\na,0,1,2\nb,1,0,3\nc,2,3,0\n";
        let (labels, m) = read_distance_csv(both.as_bytes()).unwrap();
        assert_eq!(labels, vec!["a", "b", "c"]);
        assert_eq!(m.get(2, 1), 3.0);

        let numeric_header = "10,20\n0,1\n1,0\n";
        assert_eq!(
            read_distance_csv(numeric_header.as_bytes()).unwrap().0,
            vec!["10", "20"]
        );
    }

    #[test]
    fn distance_errors_carry_line_numbers() {
        let err = read_distance_csv("0,1\n1,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_distance_csv("0,1,2\n1,0\n2,3,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_distance_csv(",a,b\nb,0,1\na,1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = SquareMatrix::from_rows(&[
            vec![0.0, 0.1 + 0.2, 1.0 / 3.0],
            vec![0.1 + 0.2, 0.0, 1e-300],
            vec![1.0 / 3.0, 1e-300, 0.0],
        ])
        .unwrap();
        let labels = vec!["p".to_string(), "q r".to_string(), "s,t".to_string()];
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &labels, &m).unwrap();
        let (l2, m2) = read_distance_csv(buf.as_slice()).unwrap();
        assert_eq!(l2, labels);
        assert_eq!(m2, m);
    }

    #[test]
    fn coordinates() {
        let (l, c) = read_coords_csv("x,label,y\n1,a,2\n3,b,4\n".as_bytes()).unwrap();
        assert_eq!(l, vec!["a", "b"]);
        assert_eq!(c, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let (l, c) = read_coords_csv("1.5\n-2\n".as_bytes()).unwrap();
        assert_eq!(l, vec!["0", "1"]);
        assert_eq!(c[1], vec![-2.0]);
        let err = read_coords_csv("x,y\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn triplet_lines() {
        let text = "# comment\na b c\na b c 2 # two more\n\nb c a 0.5\n";
        let (labels, r) = read_triplets(text.as_bytes()).unwrap();
        assert_eq!(labels, vec!["a", "b", "c"]);
        assert_eq!(r.len(), 3);
        assert_eq!(r[1].count, 2.0);
        assert_eq!(r[2].outlier, "a");
        assert!(matches!(
            read_triplets("a b\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_triplets("a b c\na a c\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_triplets("a b c -1\n".as_bytes()).is_err());
    }

    #[test]
    fn mass_and_partition_files() {
        let labels: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let m = read_mass("b 0.5\na 0.25\nc 0.25\n".as_bytes(), &labels).unwrap();
        assert_eq!(m, vec![0.25, 0.5, 0.25]);
        assert!(matches!(
            read_mass("a 1\nz 0\n".as_bytes(), &labels),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_mass("a 1\n".as_bytes(), &labels).is_err());

        let blocks = read_partition("c x\na y\nb x\n".as_bytes(), &labels).unwrap();
        assert_eq!(blocks, vec![vec![2, 1], vec![0]]);
        let mut buf = Vec::new();
        write_partition(&mut buf, &labels, &blocks).unwrap();
        assert_eq!(read_partition(buf.as_slice(), &labels).unwrap(), blocks);
        assert!(read_partition("a 1\nb 1\n".as_bytes(), &labels).is_err());
    }
}
