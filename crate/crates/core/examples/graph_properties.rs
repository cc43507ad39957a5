//! Property vectors for a few small graphs and a JSONL round trip.
//!
//! cargo run --example graph_properties

use vv::graph::{read_jsonl_from, write_jsonl_to, Graph, PropertyRegistry};

fn main() -> vv::Result<()> {
    let graphs = vec![
        Graph::complete("k5", 5)?,
        Graph::cycle("c6", 6)?,
        Graph::star("star4", 4)?,
        Graph::new(
            "bowtie",
            5,
            vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)],
        )?,
    ];
    let registry = PropertyRegistry::canonical();
    println!("{:<8}{}", "graph", registry.names().join("  "));
    for g in &graphs {
        let v = registry.evaluate(g)?;
        let cells: Vec<String> = v.values.iter().map(|x| format!("{x:.4}")).collect();
        println!("{:<8}{}", g.id(), cells.join("  "));
    }

    let mut buf = Vec::new();
    write_jsonl_to(&mut buf, &graphs)?;
    print!("{}", String::from_utf8_lossy(&buf));
    let back = read_jsonl_from(&buf[..], std::path::Path::new("<memory>"))?;
    assert_eq!(back, graphs);
    Ok(())
}
