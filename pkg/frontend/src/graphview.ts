/** Phrasing-graph layout and SVG rendering.

Vertices are placed in columns by longest-path depth from the start so
edges always point rightward; alternates for the same slot stack
vertically. Rendering is a pure string so it can be tested without a
DOM.
*/

import type { GraphPayload } from "./protocol.js";

export interface VertexPos {
  id: number;
  col: number;
  row: number;
}

export interface GraphLayout {
  positions: VertexPos[];
  cols: number;
  rows: number;
}

export function layoutGraph(graph: GraphPayload): GraphLayout {
  const depth = new Map<number, number>();
  for (const v of graph.vertices) depth.set(v.id, 0);
  const out = new Map<number, number[]>();
  const indeg = new Map<number, number>();
  for (const v of graph.vertices) {
    out.set(v.id, []);
    indeg.set(v.id, 0);
  }
  for (const [u, v] of graph.edges) {
    out.get(u)!.push(v);
    indeg.set(v, indeg.get(v)! + 1);
  }
  // longest path from any source, Kahn order
  const queue = graph.vertices.filter((v) => indeg.get(v.id) === 0).map((v) => v.id);
  while (queue.length > 0) {
    const u = queue.shift()!;
    for (const v of out.get(u)!) {
      depth.set(v, Math.max(depth.get(v)!, depth.get(u)! + 1));
      indeg.set(v, indeg.get(v)! - 1);
      if (indeg.get(v) === 0) queue.push(v);
    }
  }
  const byCol = new Map<number, number[]>();
  for (const v of graph.vertices) {
    const col = depth.get(v.id)!;
    if (!byCol.has(col)) byCol.set(col, []);
    byCol.get(col)!.push(v.id);
  }
  const positions: VertexPos[] = [];
  let rows = 1;
  for (const [col, ids] of byCol) {
    ids.sort((x, y) => x - y);
    rows = Math.max(rows, ids.length);
    ids.forEach((id, row) => positions.push({ id, col, row }));
  }
  positions.sort((x, y) => x.id - y.id);
  return { positions, cols: byCol.size === 0 ? 1 : Math.max(...byCol.keys()) + 1, rows };
}

export function isEdge(graph: GraphPayload, u: number, v: number): boolean {
  return graph.edges.some(([a, b]) => a === u && b === v);
}

const CELL_W = 150;
const CELL_H = 64;
const BOX_W = 120;
const BOX_H = 40;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** SVG markup: committed edges bold, the current vertex highlighted. */
export function renderGraphSvg(
  graph: GraphPayload,
  committedPath: number[],
  currentVertex: number | null,
): string {
  const layout = layoutGraph(graph);
  const pos = new Map(layout.positions.map((p) => [p.id, p]));
  const committed = new Set<string>();
  for (let i = 0; i + 1 < committedPath.length; i += 1) {
    committed.add(`${committedPath[i]}>${committedPath[i + 1]}`);
  }
  const width = layout.cols * CELL_W;
  const height = layout.rows * CELL_H;
  const cx = (p: VertexPos) => p.col * CELL_W + CELL_W / 2;
  const cy = (p: VertexPos) => p.row * CELL_H + CELL_H / 2;
  const parts: string[] = [];
  parts.push(
    `<svg class="graph" viewBox="0 0 ${width} ${height}" ` +
      `xmlns="http://www.w3.org/2000/svg" role="img">`,
  );
  for (const [u, v] of graph.edges) {
    const a = pos.get(u);
    const b = pos.get(v);
    if (a === undefined || b === undefined) continue;
    const bold = committed.has(`${u}>${v}`);
    parts.push(
      `<line class="edge${bold ? " committed" : ""}" ` +
        `x1="${cx(a) + BOX_W / 2}" y1="${cy(a)}" ` +
        `x2="${cx(b) - BOX_W / 2}" y2="${cy(b)}" ` +
        `stroke-width="${bold ? 3 : 1}"/>`,
    );
  }
  for (const vert of graph.vertices) {
    const p = pos.get(vert.id);
    if (p === undefined) continue;
    const current = vert.id === currentVertex;
    parts.push(
      `<g class="vertex${current ? " current" : ""}" data-vertex="${vert.id}">` +
        `<rect x="${cx(p) - BOX_W / 2}" y="${cy(p) - BOX_H / 2}" ` +
        `width="${BOX_W}" height="${BOX_H}" rx="6"/>` +
        `<text x="${cx(p)}" y="${cy(p) + 4}" text-anchor="middle">` +
        `${esc(vert.text)}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
