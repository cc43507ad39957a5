use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// One line of a graph dataset file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub id: String,
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphRecord {
    fn from(g: &Graph) -> Self {
        Self {
            id: g.id().to_string(),
            num_nodes: g.num_nodes(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        Graph::new(r.id, r.num_nodes, r.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<Graph>> {
    let path = path.as_ref();
    read_jsonl_from(File::open(path)?, path)
}

/// Parses a dataset stream; blank lines are skipped and the first malformed
/// line aborts with its 1-based line number.
pub fn read_jsonl_from(reader: impl Read, path: &Path) -> Result<Vec<Graph>> {
    let mut graphs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record: GraphRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        graphs.push(Graph::try_from(record).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(graphs)
}

pub fn write_jsonl(path: impl AsRef<Path>, graphs: &[Graph]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_jsonl_to(&mut w, graphs)?;
    w.flush()?;
    Ok(())
}

pub fn write_jsonl_to(mut w: impl Write, graphs: &[Graph]) -> Result<()> {
    for g in graphs {
        serde_json::to_writer(&mut w, &GraphRecord::from(g))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_canonicalizes() {
        let input = b"{\"id\":\"a\",\"num_nodes\":3,\"edges\":[[2,1],[0,1]]}\n\n";
        let graphs = read_jsonl_from(&input[..], Path::new("mem")).unwrap();
        assert_eq!(graphs[0].edges(), &[(0, 1), (1, 2)]);
        let mut out = Vec::new();
        write_jsonl_to(&mut out, &graphs).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"id\":\"a\",\"num_nodes\":3,\"edges\":[[0,1],[1,2]]}\n"
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = b"{\"id\":\"a\",\"num_nodes\":2,\"edges\":[[0,1]]}\n{\"id\":\"b\",\"num_nodes\":2,\"edges\":[[0,0]]}\n";
        match read_jsonl_from(&input[..], Path::new("data.jsonl")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let garbage = b"not json\n";
        assert!(matches!(
            read_jsonl_from(&garbage[..], Path::new("x")),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
