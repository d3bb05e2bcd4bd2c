//! Plain-text and SVG tree rendering for terminal and report output.

use crate::phylo::{NodeId, PhyloTree};

/// Directory-listing style ASCII tree. Leaves show their label and edge
/// length; internal nodes show merge height when present.
///
/// ```text
/// (height 2.2361)
/// |-- (height 1.0000) [1.2361]
/// |   |-- en [1.0000]
/// |   `-- de [1.0000]
/// `-- fr [2.2361]
/// ```
pub fn render_ascii(tree: &PhyloTree) -> String {
    let mut out = String::new();
    out.push_str(&node_text(tree, tree.root(), true));
    out.push('\n');
    if let Some([l, r]) = tree.children(tree.root()) {
        branch(tree, l, "", false, &mut out);
        branch(tree, r, "", true, &mut out);
    }
    out
}

fn node_text(tree: &PhyloTree, id: NodeId, is_root: bool) -> String {
    let head = match tree.label(id) {
        Some(label) => label.to_string(),
        None => match tree.height(id) {
            Some(h) => format!("(height {h:.4})"),
            None => "(node)".to_string(),
        },
    };
    if is_root {
        head
    } else {
        format!("{head} [{:.4}]", tree.edge(id))
    }
}

fn branch(tree: &PhyloTree, id: NodeId, prefix: &str, last: bool, out: &mut String) {
    let connector = if last { "`-- " } else { "|-- " };
    out.push_str(prefix);
    out.push_str(connector);
    out.push_str(&node_text(tree, id, false));
    out.push('\n');
    if let Some([l, r]) = tree.children(id) {
        let child_prefix = format!("{prefix}{}", if last { "    " } else { "|   " });
        branch(tree, l, &child_prefix, false, out);
        branch(tree, r, &child_prefix, true, out);
    }
}

const ROW_H: f64 = 24.0;
const PLOT_W: f64 = 560.0;
const MARGIN: f64 = 12.0;
const LABEL_GUTTER: f64 = 90.0;

/// Rectangular phylogram as standalone SVG. Node depth is the summed
/// edge length from the root, so clustering output (ultrametric) gets
/// aligned leaves and parsed trees get proportional branches.
pub fn render_svg(tree: &PhyloTree) -> String {
    let n_nodes = tree.node_count();
    let mut depth = vec![0.0f64; n_nodes];
    let order = tree.postorder();
    for &id in order.iter().rev() {
        if let Some(p) = tree.parent(id) {
            depth[id] = depth[p] + tree.edge(id);
        }
    }
    let max_depth = depth.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let x = |id: NodeId| MARGIN + depth[id] / max_depth * PLOT_W;

    let leaves = tree.leaves();
    let mut y = vec![0.0f64; n_nodes];
    for (row, &leaf) in leaves.iter().enumerate() {
        y[leaf] = MARGIN + (row as f64 + 0.5) * ROW_H;
    }
    for &id in &order {
        if let Some([l, r]) = tree.children(id) {
            y[id] = (y[l] + y[r]) / 2.0;
        }
    }

    let width = MARGIN * 2.0 + PLOT_W + LABEL_GUTTER;
    let height = MARGIN * 2.0 + leaves.len() as f64 * ROW_H;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"monospace\" font-size=\"13\">\n"
    ));
    svg.push_str("<g stroke=\"#333\" stroke-width=\"1.5\" fill=\"none\">\n");
    for &id in &order {
        if let Some([l, r]) = tree.children(id) {
            svg.push_str(&format!(
                "<path d=\"M {x1:.2} {y1:.2} H {x0:.2} V {y2:.2} H {x2:.2}\"/>\n",
                x0 = x(id),
                x1 = x(l),
                y1 = y[l],
                x2 = x(r),
                y2 = y[r],
            ));
        }
    }
    svg.push_str("</g>\n");
    for &leaf in &leaves {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" dominant-baseline=\"middle\">{}</text>\n",
            x(leaf) + 6.0,
            y[leaf],
            escape(tree.label(leaf).unwrap())
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
