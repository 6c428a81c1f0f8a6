import init, {
  availability_curve,
  placement_layout,
  scaling_curve,
  fitted_cost_model,
} from "./pkg/ecstore_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const SVG = "http://www.w3.org/2000/svg";

function el(name, attrs, text) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

// Draw named series of [x, y] points on one pair of axes.
function lineChart(svg, series, { xLabel, yLabel, yMin, yMax }) {
  svg.replaceChildren();
  const w = svg.clientWidth || 600;
  const h = svg.clientHeight || 300;
  const pad = 50;
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = yMin ?? Math.min(0, ...ys);
  const y1 = yMax ?? Math.max(...ys) * 1.1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  svg.append(el("path", { d: `M${pad},${pad} V${h - pad} H${w - pad}`, fill: "none", stroke: "#333" }));
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    svg.append(el("text", { x: pad - 6, y: sy(y) + 4, "text-anchor": "end", "font-size": 11 }, y.toPrecision(3)));
  }
  for (let i = 0; i <= 5; i++) {
    const x = x0 + ((x1 - x0) * i) / 5;
    svg.append(el("text", { x: sx(x), y: h - pad + 16, "text-anchor": "middle", "font-size": 11 }, +x.toFixed(2)));
  }
  svg.append(el("text", { x: w / 2, y: h - 8, "text-anchor": "middle", "font-size": 12 }, xLabel));
  svg.append(el("text", { x: 14, y: h / 2, "text-anchor": "middle", "font-size": 12,
                          transform: `rotate(-90 14 ${h / 2})` }, yLabel));
  series.forEach((s, i) => {
    const pts = s.points.map(([x, y]) => `${sx(x)},${sy(y)}`).join(" ");
    svg.append(el("polyline", { points: pts, fill: "none", stroke: s.color, "stroke-width": 2 }));
    svg.append(el("text", { x: w - pad - 4, y: pad + 14 * i, "text-anchor": "end", fill: s.color,
                            "font-size": 12 }, s.name));
  });
}

function guarded(noteId, fn) {
  return () => {
    try {
      $(noteId).classList.remove("error");
      fn();
    } catch (e) {
      $(noteId).textContent = String(e.message ?? e);
      $(noteId).classList.add("error");
    }
  };
}

const drawAvailability = guarded("av-note", () => {
  const c = JSON.parse(availability_curve(num("av-k"), num("av-m"), num("av-r"), num("av-pmin"), 60));
  lineChart($("av-chart"), [
    { name: `${c.erasure_label} (overhead ${c.erasure_overhead.toFixed(2)})`, color: "steelblue",
      points: c.points.map((p) => [p.p, p.erasure]) },
    { name: `${c.replication_label} (overhead ${c.replication_overhead.toFixed(2)})`, color: "darkorange",
      points: c.points.map((p) => [p.p, p.replication]) },
  ], { xLabel: "endpoint availability p", yLabel: "file availability", yMax: 1 });
  const at = c.points.reduce((a, b) => (Math.abs(b.p - 0.9) < Math.abs(a.p - 0.9) ? b : a));
  $("av-note").textContent =
    `At p = ${at.p.toFixed(3)}: ${c.erasure_label} ${at.erasure.toFixed(6)}, ` +
    `${c.replication_label} ${at.replication.toFixed(6)}.`;
});

const drawPlacement = guarded("pl-note", () => {
  const k = num("pl-k");
  const layout = JSON.parse(placement_layout(k, num("pl-m"), num("pl-s"), num("pl-p")));
  const grid = $("pl-grid");
  grid.replaceChildren();
  for (const se of layout.endpoints) {
    const box = document.createElement("div");
    box.className = "se";
    box.innerHTML = `<h3>${se.id}</h3>`;
    for (const c of se.chunks) {
      const chip = document.createElement("span");
      chip.className = `chunk ${c < k ? "data" : "coding"}`;
      chip.textContent = c;
      box.append(chip);
    }
    grid.append(box);
  }
  $("pl-note").textContent =
    `Availability as placed: ${layout.placed_availability.toFixed(6)}; ` +
    `with one chunk per endpoint it would be ${layout.spread_availability.toFixed(6)}.`;
});

const drawScaling = guarded("sc-note", () => {
  const pts = JSON.parse(scaling_curve(num("sc-size") * 1e6, num("sc-k"), num("sc-m"), num("sc-t"),
                                       num("sc-lat"), num("sc-bw") * 1e6, num("sc-codec") * 1e6));
  lineChart($("sc-chart"), [
    { name: "upload", color: "steelblue", points: pts.map((p) => [p.threads, p.put_s]) },
    { name: "download", color: "darkorange", points: pts.map((p) => [p.threads, p.get_s]) },
    { name: "encode share of upload", color: "gray", points: pts.map((p) => [p.threads, p.put_encode_s]) },
  ], { xLabel: "worker threads", yLabel: "virtual seconds" });
  const last = pts[pts.length - 1];
  $("sc-note").textContent =
    `1 thread: upload ${pts[0].put_s.toFixed(1)} s, download ${pts[0].get_s.toFixed(1)} s. ` +
    `${last.threads} threads: upload ${last.put_s.toFixed(1)} s, download ${last.get_s.toFixed(1)} s.`;
});

await init();
const [lat, bw] = fitted_cost_model();
$("sc-lat").value = lat.toFixed(3);
$("sc-bw").value = (bw / 1e6).toFixed(3);

for (const [prefix, draw] of [["av", drawAvailability], ["pl", drawPlacement], ["sc", drawScaling]]) {
  document.querySelectorAll(`input[id^=${prefix}-]`).forEach((i) => i.addEventListener("change", draw));
  draw();
}
