import { describe, expect, it } from "vitest";

import { isEdge, layoutGraph, renderGraphSvg } from "../src/graphview.js";
import { makeGraph } from "./fakes.js";

describe("layoutGraph", () => {
  it("places the diamond in three columns with stacked alternates", () => {
    const layout = layoutGraph(makeGraph());
    expect(layout.cols).toBe(3);
    expect(layout.rows).toBe(2);
    const byId = new Map(layout.positions.map((p) => [p.id, p]));
    expect(byId.get(0)).toMatchObject({ col: 0, row: 0 });
    expect(byId.get(1)).toMatchObject({ col: 1, row: 0 });
    expect(byId.get(2)).toMatchObject({ col: 1, row: 1 });
    expect(byId.get(3)).toMatchObject({ col: 2, row: 0 });
  });

  it("uses longest-path depth so shortcut edges still point right", () => {
    const graph = makeGraph({
      vertices: [
        { id: 0, text: "a", duration_s: 1 },
        { id: 1, text: "b", duration_s: 1 },
        { id: 2, text: "c", duration_s: 1 },
      ],
      edges: [
        [0, 1],
        [1, 2],
        [0, 2],
      ],
      natural_path: [0, 1, 2],
    });
    const layout = layoutGraph(graph);
    const byId = new Map(layout.positions.map((p) => [p.id, p]));
    expect(byId.get(2)!.col).toBe(2);
    expect(layout.cols).toBe(3);
  });
});

describe("isEdge", () => {
  it("answers from the edge list", () => {
    const graph = makeGraph();
    expect(isEdge(graph, 0, 1)).toBe(true);
    expect(isEdge(graph, 1, 0)).toBe(false);
    expect(isEdge(graph, 0, 3)).toBe(false);
  });
});

describe("renderGraphSvg", () => {
  it("bolds exactly the committed edges", () => {
    const svg = renderGraphSvg(makeGraph(), [0, 2, 3], null);
    const edges = svg.match(/<line[^>]*>/g) ?? [];
    expect(edges.length).toBe(4);
    const committed = edges.filter((e) => e.includes("committed"));
    expect(committed.length).toBe(2);
    for (const e of committed) expect(e).toContain('stroke-width="3"');
    const plain = edges.filter((e) => !e.includes("committed"));
    for (const e of plain) expect(e).toContain('stroke-width="1"');
  });

  it("highlights only the current vertex", () => {
    const svg = renderGraphSvg(makeGraph(), [0], 2);
    const groups = svg.match(/<g[^>]*>/g) ?? [];
    expect(groups.length).toBe(4);
    const current = groups.filter((g) => g.includes("current"));
    expect(current.length).toBe(1);
    expect(current[0]).toContain('data-vertex="2"');
  });

  it("shows every phrase label with markup escaped", () => {
    const graph = makeGraph({
      vertices: [
        { id: 0, text: "lift <carefully> & hold", duration_s: 1 },
        { id: 1, text: "done", duration_s: 1 },
      ],
      edges: [[0, 1]],
      natural_path: [0, 1],
    });
    const svg = renderGraphSvg(graph, [], null);
    expect(svg).toContain("lift &lt;carefully&gt; &amp; hold");
    expect(svg).toContain("done");
    expect(svg).not.toContain("<carefully>");
  });
});
