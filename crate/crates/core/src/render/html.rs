//! Self-contained static HTML report: embedded graph data, an inline
//! force-directed drawing and the color legend. The embedded data is
//! deterministic; layout positions are computed in the browser and never
//! serialized.

use super::{ColorMap, RenderedGraph};

/// Escapes `</` inside JSON embedded in a `<script>` block.
fn script_safe_json(json: &str) -> String {
    json.replace("</", "<\\/")
}

fn legend_stops(cmap: &ColorMap) -> String {
    cmap.anchors()
        .iter()
        .map(|(pos, [r, g, b])| format!("rgb({r},{g},{b}) {:.1}%", pos * 100.0))
        .collect::<Vec<_>>()
        .join(", ")
}

const TEMPLATE: &str = r##"<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>mapper graph</title>
<style>
  body { font-family: sans-serif; margin: 1.5em; background: #fafafa; color: #222; }
  #summary { margin-bottom: 0.8em; }
  #view { border: 1px solid #ccc; background: #fff; }
  #legend { margin-top: 0.6em; font-size: 0.85em; }
  #legendbar { display: inline-block; width: 260px; height: 14px; vertical-align: middle;
               background: linear-gradient(to right, @@STOPS@@); border: 1px solid #999; }
  .tick { margin: 0 0.5em; }
</style>
</head>
<body>
<h2>mapper graph</h2>
<div id="summary">@@NODE_COUNT@@ nodes, @@EDGE_COUNT@@ edges &mdash; @@TOOL@@</div>
<canvas id="view" width="960" height="640"></canvas>
<div id="legend">
  lens value:
  <span class="tick">@@LO@@</span><span id="legendbar"></span><span class="tick">@@HI@@</span>
</div>
<script id="graph-data" type="application/json">@@JSON@@</script>
<script>
(function () {
  var graph = JSON.parse(document.getElementById("graph-data").textContent);
  var canvas = document.getElementById("view");
  var ctx = canvas.getContext("2d");
  var W = canvas.width, H = canvas.height;
  var n = graph.nodes.length;
  if (n === 0) { ctx.fillText("empty graph", W / 2 - 30, H / 2); return; }

  // Deterministic initial layout on a circle, then a few hundred rounds of
  // spring relaxation. Positions are for display only.
  var pos = graph.nodes.map(function (node, i) {
    var a = 2 * Math.PI * i / n;
    return { x: W / 2 + 0.35 * W * Math.cos(a), y: H / 2 + 0.35 * H * Math.sin(a) };
  });
  var springLen = Math.min(W, H) / Math.max(3, Math.sqrt(n) * 1.8);
  for (var iter = 0; iter < 300; iter++) {
    var fx = new Array(n).fill(0), fy = new Array(n).fill(0);
    for (var i = 0; i < n; i++) {
      for (var j = i + 1; j < n; j++) {
        var dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
        var d2 = dx * dx + dy * dy + 0.01;
        var rep = 2200 / d2;
        var d = Math.sqrt(d2);
        fx[i] += rep * dx / d; fy[i] += rep * dy / d;
        fx[j] -= rep * dx / d; fy[j] -= rep * dy / d;
      }
    }
    graph.edges.forEach(function (e) {
      var a = e.source, b = e.target;
      var dx = pos[b].x - pos[a].x, dy = pos[b].y - pos[a].y;
      var d = Math.sqrt(dx * dx + dy * dy) + 1e-9;
      var pull = 0.02 * (d - springLen);
      fx[a] += pull * dx / d; fy[a] += pull * dy / d;
      fx[b] -= pull * dx / d; fy[b] -= pull * dy / d;
    });
    for (var k = 0; k < n; k++) {
      pos[k].x = Math.max(20, Math.min(W - 20, pos[k].x + Math.max(-6, Math.min(6, fx[k]))));
      pos[k].y = Math.max(20, Math.min(H - 20, pos[k].y + Math.max(-6, Math.min(6, fy[k]))));
    }
  }

  ctx.strokeStyle = "#999";
  graph.edges.forEach(function (e) {
    ctx.lineWidth = 1 + Math.log(e.weight);
    ctx.beginPath();
    ctx.moveTo(pos[e.source].x, pos[e.source].y);
    ctx.lineTo(pos[e.target].x, pos[e.target].y);
    ctx.stroke();
  });
  var maxSize = Math.max.apply(null, graph.nodes.map(function (d) { return d.size; }));
  var rScale = 14 / Math.sqrt(1 + maxSize);
  graph.nodes.forEach(function (node, i) {
    var r = Math.max(3, rScale * Math.sqrt(node.size));
    ctx.beginPath();
    ctx.arc(pos[i].x, pos[i].y, r, 0, 2 * Math.PI);
    ctx.fillStyle = "rgb(" + node.color.join(",") + ")";
    ctx.fill();
    ctx.strokeStyle = "#444";
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.fillStyle = "#222";
    ctx.font = "10px sans-serif";
    ctx.fillText(node.label, pos[i].x + r + 2, pos[i].y + 3);
  });
})();
</script>
</body>
</html>
"##;

/// Renders the report page. The color legend reflects the colormap named in
/// the graph metadata ("default" is the only built-in).
pub fn to_html_report(graph: &RenderedGraph) -> String {
    let cmap = ColorMap::default();
    let json = script_safe_json(&serde_json::to_string(graph).expect("graph serializes"));
    let (lo_label, hi_label) = if graph.metadata.color_scale == "pinned" {
        ("-1".to_string(), "1".to_string())
    } else {
        match graph.mean_lens_range() {
            Some((lo, hi)) => (format!("{lo:.3}"), format!("{hi:.3}")),
            None => (String::new(), String::new()),
        }
    };
    TEMPLATE
        .replace("@@STOPS@@", &legend_stops(&cmap))
        .replace("@@NODE_COUNT@@", &graph.nodes.len().to_string())
        .replace("@@EDGE_COUNT@@", &graph.edges.len().to_string())
        .replace("@@TOOL@@", &graph.metadata.tool)
        .replace("@@LO@@", &lo_label)
        .replace("@@HI@@", &hi_label)
        .replace("@@JSON@@", &json)
}

#[cfg(test)]
mod tests {
    use super::super::tests::sample_graph;
    use super::*;

    #[test]
    fn report_embeds_every_node_and_edge() {
        let graph = sample_graph();
        let html = to_html_report(&graph);
        assert_eq!(html.matches("\"node_id\":").count(), graph.nodes.len());
        assert_eq!(html.matches("\"source\":").count(), graph.edges.len());
        assert!(html.contains("<!DOCTYPE html>"));
    }

    #[test]
    fn report_is_deterministic() {
        let graph = sample_graph();
        assert_eq!(to_html_report(&graph), to_html_report(&graph));
    }

    #[test]
    fn empty_graph_report_is_valid() {
        let graph = RenderedGraph {
            nodes: vec![],
            edges: vec![],
            ..sample_graph()
        };
        let html = to_html_report(&graph);
        assert!(html.contains("0 nodes, 0 edges"));
    }
}
