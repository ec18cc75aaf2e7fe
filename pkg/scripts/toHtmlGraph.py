"""Write an interactive HTML view of a relation.

The page is fully self contained: nodes and edges are embedded as a
JSON literal and rendered by an inline script (circular layout on an
SVG canvas, hover highlighting).  Nothing is fetched from the network.
The output path is the first argument; the query emits the empty set.
"""

import json

import _lib

PAGE = """\
<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>graph</title>
<style>
  body { font-family: sans-serif; }
  line { stroke: #888; stroke-width: 1.5; marker-end: url(#arrow); }
  circle { fill: #4a90d9; }
  circle:hover { fill: #d94a4a; }
  text { font-size: 12px; }
</style>
</head>
<body>
<svg id="canvas" width="720" height="720">
  <defs>
    <marker id="arrow" viewBox="0 0 10 10" refX="22" refY="5"
            markerWidth="6" markerHeight="6" orient="auto-start-reverse">
      <path d="M 0 0 L 10 5 L 0 10 z" fill="#888"/>
    </marker>
  </defs>
</svg>
<script>
var graph = %(graph)s;
(function () {
  var svg = document.getElementById("canvas");
  var cx = 360, cy = 360, r = 280;
  var pos = {};
  graph.nodes.forEach(function (name, i) {
    var angle = 2 * Math.PI * i / graph.nodes.length - Math.PI / 2;
    pos[name] = [cx + r * Math.cos(angle), cy + r * Math.sin(angle)];
  });
  function make(tag, attrs) {
    var el = document.createElementNS("http://www.w3.org/2000/svg", tag);
    for (var k in attrs) el.setAttribute(k, attrs[k]);
    svg.appendChild(el);
    return el;
  }
  graph.edges.forEach(function (edge) {
    var a = pos[edge[0]], b = pos[edge[1]];
    make("line", {x1: a[0], y1: a[1], x2: b[0], y2: b[1]});
  });
  graph.nodes.forEach(function (name) {
    var p = pos[name];
    var c = make("circle", {cx: p[0], cy: p[1], r: 14});
    c.appendChild(document.createElementNS(
      "http://www.w3.org/2000/svg", "title")).textContent = name;
    var label = make("text", {x: p[0] + 18, y: p[1] + 4});
    label.textContent = name;
  });
})();
</script>
</body>
</html>
"""


def main():
    req = _lib.read_request()
    if not req["args"]:
        _lib.fail("toHtmlGraph needs an output path as an argument")

    edges = []
    nodes = set()
    for rec in req["input"]:
        refs = _lib.node_refs(rec)
        if len(refs) != 2:
            _lib.fail("input tuple is not a relation tuple (two node references)")
        edges.append([refs[0], refs[1]])
        nodes.update(refs)

    graph = {"nodes": sorted(nodes), "edges": sorted(edges)}
    try:
        with open(req["args"][0], "w") as f:
            f.write(PAGE % {"graph": json.dumps(graph, sort_keys=True)})
    except OSError as e:
        _lib.fail("cannot write graph: %s" % e)
    _lib.respond([])


if __name__ == "__main__":
    main()
