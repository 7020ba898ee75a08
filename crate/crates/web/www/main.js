import init, { branchCurve, groundStateProfile, rearrangeDemo } from "./pkg/dnls_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x) => (Number.isFinite(x) ? x.toPrecision(8) : String(x));

function extent(values) {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

// series: [{x, y, color, label}], x on a log axis
function plot(canvas, series, { ylo, yhi, vlines = [] } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const [xlo, xhi] = extent(series.flatMap((s) => s.x.map(Math.log10)));
  const ys = series.flatMap((s) => s.y);
  const [a, b] = extent(ys);
  const y0 = ylo ?? a, y1 = yhi ?? b;
  const X = (x) => pad + ((Math.log10(x) - xlo) / (xhi - xlo)) * (W - 2 * pad);
  const Y = (y) => H - pad + ((y0 - y) / (y1 - y0)) * (H - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  for (let e = Math.ceil(xlo); e <= Math.floor(xhi); e++) {
    const x = pad + ((e - xlo) / (xhi - xlo)) * (W - 2 * pad);
    ctx.fillText(`1e${e}`, x - 10, H - pad + 14);
  }
  for (let k = 0; k <= 4; k++) {
    const y = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(y.toPrecision(3), 2, Y(y) + 4);
  }
  for (const [x, color] of vlines) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ctx.moveTo(X(x), pad);
    ctx.lineTo(X(x), H - pad);
    ctx.stroke();
  }
  series.forEach((s, i) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    s.x.forEach((x, j) => {
      const y = s.y[j];
      if (!Number.isFinite(y)) { pen = false; return; }
      const py = Math.min(Math.max(Y(y), pad), H - pad);
      pen ? ctx.lineTo(X(x), py) : ctx.moveTo(X(x), py);
      pen = true;
    });
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, W - pad - 120, pad + 14 * (i + 1));
  });
}

function heat(canvas, values, n, hi) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  values.forEach((v, k) => {
    const t = Math.min(v / hi, 1);
    img.data.set([255 * t, 80 + 120 * t, 255 * (1 - t), 255], 4 * k);
  });
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function guard(out, f) {
  try {
    out.classList.remove("err");
    f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function runBranch() {
  guard($("nb-out"), () => {
    const c = JSON.parse(branchCurve(num("nb-p"), num("nb-alpha"), num("nb-omega"), 600));
    const y = c.action.map((a, i) => (c.admissible[i] ? a : NaN));
    const lines = [[c.omega0, "#c60"]];
    if (c.forbidden) lines.push([c.forbidden[0], "#888"], [c.forbidden[1], "#888"]);
    plot($("nb-plot"), [{ x: c.lambda, y, color: "#06c", label: "branch action" }], { ylo: 0, vlines: lines });
    $("nb-out").textContent = c.forbidden
      ? `forbidden interval [${fmt(c.forbidden[0])}, ${fmt(c.forbidden[1])}]; infimum 0 (collapse at lambda1)`
      : `every lambda admissible; branch infimum ${fmt(c.infimum)}`;
  });
}

function runGround() {
  guard($("gs-out"), () => {
    const g = JSON.parse(groundStateProfile(num("gs-mu"), num("gs-p"), num("gs-alpha"), num("gs-nodes")));
    const [, hi] = extent(g.phi);
    plot(
      $("gs-plot"),
      [
        { x: g.r, y: g.u, color: "#06c", label: "u" },
        { x: g.r, y: g.phi, color: "#c60", label: "phi_lambda" },
        { x: g.r, y: g.singular, color: "#393", label: "q G_lambda" },
      ],
      { ylo: 0, yhi: 4 * hi },
    );
    $("gs-out").textContent =
      `E = ${fmt(g.energy)}  omega = ${fmt(g.omega)} (omega0 = ${fmt(g.omega0)})  q = ${fmt(g.q)}\n` +
      `${g.converged ? "converged" : "NOT converged"} after ${g.iterations} iterations`;
  });
}

function runRearrange() {
  guard($("re-out"), () => {
    const n = num("re-n");
    const d = JSON.parse(rearrangeDemo(num("re-seed"), n));
    const [, hi] = extent(d.f);
    heat($("re-f"), d.f, n, hi);
    heat($("re-star"), d.f_star, n, hi);
    $("re-out").textContent =
      `Dirichlet energy: f ${fmt(d.dirichlet_f)}  f* ${fmt(d.dirichlet_star)}  ` +
      `ratio ${fmt(d.dirichlet_star / d.dirichlet_f)}\nequimeasurable: ${d.equimeasurable}`;
  });
}

await init();
$("nb-run").onclick = runBranch;
$("gs-run").onclick = runGround;
$("re-run").onclick = runRearrange;
runBranch();
runGround();
runRearrange();
