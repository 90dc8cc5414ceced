//! Plain-text exports of the maximal-cell neighbor graph.

use super::ComplexReport;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Graphviz rendering: one node per cell (labelled by type and dimension),
/// one edge per neighbor pair.  Output is deterministic.
pub fn export_dot(report: &ComplexReport) -> String {
    let mut out = String::from("graph complex {\n");
    for (i, cell) in report.cells.iter().enumerate() {
        let t = report.type_of[i];
        out.push_str(&format!(
            "  c{} [label=\"t{} d{}\"];\n",
            i,
            t,
            cell.dimension()
        ));
    }
    for (i, ns) in report.neighbors.iter().enumerate() {
        for &j in ns {
            if j > i {
                out.push_str(&format!("  c{i} -- c{j};\n"));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// GraphML rendering with `type` and `dim` node attributes.
pub fn export_graphml(report: &ComplexReport) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"type\" for=\"node\" attr.name=\"type\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"dim\" for=\"node\" attr.name=\"dim\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    out.push_str("  <graph id=\"complex\" edgedefault=\"undirected\">\n");
    for (i, cell) in report.cells.iter().enumerate() {
        out.push_str(&format!("    <node id=\"c{i}\">\n"));
        out.push_str(&format!(
            "      <data key=\"type\">{}</data>\n",
            report.type_of[i]
        ));
        out.push_str(&format!(
            "      <data key=\"dim\">{}</data>\n",
            cell.dimension()
        ));
        out.push_str(&format!(
            "      <data key=\"label\">{}</data>\n",
            escape(&cell.to_string())
        ));
        out.push_str("    </node>\n");
    }
    let mut k = 0;
    for (i, ns) in report.neighbors.iter().enumerate() {
        for &j in ns {
            if j > i {
                out.push_str(&format!(
                    "    <edge id=\"e{k}\" source=\"c{i}\" target=\"c{j}\"/>\n"
                ));
                k += 1;
            }
        }
    }
    out.push_str("  </graph>\n");
    out.push_str("</graphml>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::{cell_types_and_neighbors, maximal_cells, ComplexOptions};
    use super::*;
    use crate::group::{ball, MarkedGroup};

    fn report() -> ComplexReport {
        let g = MarkedGroup::parse("<s|>").unwrap();
        let w = ball(&g, 4, 100_000).unwrap();
        let mc = maximal_cells(&w, &ComplexOptions::default()).unwrap();
        cell_types_and_neighbors(&w, &mc.cells).unwrap()
    }

    #[test]
    fn dot_lists_every_cell_once() {
        let r = report();
        let dot = export_dot(&r);
        assert!(dot.starts_with("graph complex {"));
        assert_eq!(dot.matches("label=").count(), r.cells.len());
        assert_eq!(dot.matches(" -- ").count(), r.neighbors.iter().map(Vec::len).sum::<usize>() / 2);
    }

    #[test]
    fn graphml_is_well_formed_enough_and_deterministic() {
        let r = report();
        let a = export_graphml(&r);
        let b = export_graphml(&r);
        assert_eq!(a, b);
        assert_eq!(a.matches("<node ").count(), r.cells.len());
        assert!(a.contains("edgedefault=\"undirected\""));
        assert!(a.ends_with("</graphml>\n"));
    }
}
