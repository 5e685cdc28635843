import init, { Demo } from "./pkg/flatsphere_wasm.js";

// heatmap sample grid; upscaled onto the display canvas
const W = 240, H = 120;

const el = (id) => document.getElementById(id);
const canvas = el("map");
const ctx = canvas.getContext("2d");
const grid = document.createElement("canvas");
grid.width = W;
grid.height = H;
const gridCtx = grid.getContext("2d");

let demo = null;
let nodes = [];

// four-stop dark-to-light ramp, t in [0, 1]
function colormap(t) {
  const stops = [
    [0, 0, 8], [120, 28, 109], [237, 105, 37], [252, 255, 164],
  ];
  const x = Math.min(Math.max(t, 0), 1) * (stops.length - 1);
  const k = Math.min(Math.floor(x), stops.length - 2);
  const f = x - k;
  return [0, 1, 2].map((c) => stops[k][c] + f * (stops[k + 1][c] - stops[k][c]));
}

function setStatus(text) {
  el("status").textContent = text;
}

function draw() {
  if (!demo) return;
  const index = +el("index").value;
  el("index-val").value = index;

  const values = demo.heatmap(index, W, H);
  let max = 1e-300;
  for (const v of values) max = Math.max(max, v);

  const img = gridCtx.createImageData(W, H);
  for (let p = 0; p < values.length; p++) {
    const [r, g, b] = colormap(values[p] / max);
    img.data[4 * p] = r;
    img.data[4 * p + 1] = g;
    img.data[4 * p + 2] = b;
    img.data[4 * p + 3] = 255;
  }
  gridCtx.putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(grid, 0, 0, canvas.width, canvas.height);

  // node overlay: lon/lat -> equirectangular pixel
  for (const [x, y, z] of nodes) {
    const lon = Math.atan2(y, x);
    const lat = Math.asin(Math.min(Math.max(z, -1), 1));
    const px = ((lon + Math.PI) / (2 * Math.PI)) * canvas.width;
    const py = ((Math.PI / 2 - lat) / Math.PI) * canvas.height;
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, 2 * Math.PI);
    ctx.fillStyle = "#27d4a0";
    ctx.fill();
    ctx.strokeStyle = "#14161a";
    ctx.stroke();
  }
}

function renderSummary(s) {
  const f = (v, d = 4) => Number(v).toFixed(d);
  el("summary").textContent = [
    `functions            n = ${s.n}   (space dim k_L = ${s.k_L}, ratio ${f(s.ratio, 3)})`,
    `cutoff / taper       L = ${s.degree_cutoff}, epsilon = ${f(s.epsilon, 2)}, node degree ${s.node_degree}`,
    `node separation      ${f(s.separation)} rad`,
    `frame bounds         lambda_min = ${f(s.lambda_min)}, lambda_max = ${f(s.lambda_max)}`,
    `orthonormality       residual ${Number(s.orthonormality_residual).toExponential(2)}`,
    `uniform bound        max_i sup|s_i| = ${f(s.sup_max)}`,
  ].join("\n");
}

function rebuild() {
  const L = +el("cutoff").value;
  const eps = +el("epsilon").value;
  setStatus(`building L = ${L}, epsilon = ${eps.toFixed(2)} ...`);
  el("build").disabled = true;

  // let the status paint before the main thread blocks on the build
  setTimeout(() => {
    try {
      if (demo) demo.free();
      demo = new Demo(L, eps);
      nodes = JSON.parse(demo.nodesJson());
      const summary = JSON.parse(demo.summaryJson());
      renderSummary(summary);

      const slider = el("index");
      slider.max = demo.size() - 1;
      slider.value = Math.min(+slider.value, demo.size() - 1);
      slider.disabled = false;
      setStatus("");
      draw();
    } catch (e) {
      setStatus(`error: ${e}`);
    } finally {
      el("build").disabled = false;
    }
  }, 30);
}

async function main() {
  await init();
  el("cutoff").addEventListener("input", () => (el("cutoff-val").value = el("cutoff").value));
  el("epsilon").addEventListener(
    "input",
    () => (el("epsilon-val").value = Number(el("epsilon").value).toFixed(2)),
  );
  el("index").addEventListener("input", draw);
  el("build").addEventListener("click", rebuild);
  rebuild();
}

main().catch((e) => setStatus(`failed to load wasm module: ${e}`));
