import init, { alpha, spectrum, classify } from "./pkg/qes_web.js";

const presets = {
  euler: { V: 1, N: 4, expr: { gen: "D" } },
  sl2: {
    V: 1, N: 3,
    expr: { node: "add", args: [
      { node: "mul", args: [{ gen: "J", a: 0, b: 0 }, { gen: "J", a: 0, b: 0 }] },
      { gen: "J", a: 1, b: 0 },
      { gen: "d", k: 1 },
    ] },
  },
  casimir: { V: 2, N: 2, expr: { gen: "Cas", p: 2 } },
  graded: { V: 1, N: 3, delta: 1, expr: { gen: "T" } },
};

const $ = (id) => document.getElementById(id);

function show(out, f) {
  out.classList.remove("err");
  try {
    out.textContent = f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function eigenLine(e) {
  switch (e.kind) {
    case "rational": return `${e.value}  (×${e.multiplicity})`;
    case "quadratic": return `roots of λ² + (${e.b})λ + (${e.c})  (×${e.multiplicity})`;
    default: return `≈ ${e.re.toPrecision(12)} ${e.im >= 0 ? "+" : "−"} ${Math.abs(e.im).toPrecision(12)}i  (×${e.multiplicity}, residual ${e.residual.toExponential(1)})`;
  }
}

function loadPreset() {
  $("spectrum-doc").value = JSON.stringify(presets[$("spectrum-preset").value], null, 1);
}

await init();

$("alpha-run").onclick = () => show($("alpha-out"), () => {
  const r = JSON.parse(alpha(Number($("alpha-delta").value)));
  return r.alpha.map((a, k) => `α_${k} = ${a}`).join("\n");
});

$("spectrum-preset").onchange = loadPreset;
$("spectrum-run").onclick = () => show($("spectrum-out"), () => {
  const r = JSON.parse(spectrum($("spectrum-doc").value, $("spectrum-float").checked));
  const lines = [`operator: ${r.operator}`, `dimension ${r.dim}`, ...r.eigenvalues.map(eigenLine)];
  for (const u of r.unresolved) lines.push(`unresolved factor [${u.coefficients.join(", ")}] (×${u.multiplicity})`);
  return lines.join("\n");
});

$("classify-run").onclick = () => show($("classify-out"), () => {
  const reports = JSON.parse(classify(Number($("classify-max").value)));
  return reports.map((r) => {
    const coeffs = ["x1", "y1", "x2", "y2"].map((k) => `${k.toUpperCase()}=${r[k] ?? "–"}`).join(" ");
    return `Δ=${r.delta} p=${r.p}: ${coeffs}  k ∈ {${r.admissible_k.join(", ")}}`;
  }).join("\n");
});

loadPreset();
