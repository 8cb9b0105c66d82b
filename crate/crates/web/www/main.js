import init, { GazeguideDemo, fixations } from "./pkg/gazeguide_web.js";

const $ = (id) => document.getElementById(id);

function drawFixations() {
  const view = JSON.parse(fixations(Number($("threshold").value), Number($("seed").value) >>> 0));
  const canvas = $("gaze");
  const ctx = canvas.getContext("2d");
  const right = Math.max(...view.words.map((w) => w.x_max)) + 20;
  const bottom = Math.max(...view.words.map((w) => w.y_max)) + 30;
  const scale = Math.min(canvas.width / right, canvas.height / bottom);
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.setTransform(scale, 0, 0, scale, 0, 0);

  ctx.font = "20px monospace";
  ctx.textBaseline = "middle";
  for (const w of view.words) {
    ctx.strokeStyle = "#ddd";
    ctx.strokeRect(w.x_min, w.y_min, w.x_max - w.x_min, w.y_max - w.y_min);
    ctx.fillStyle = "#333";
    ctx.fillText(w.word, w.x_min, (w.y_min + w.y_max) / 2);
  }
  ctx.fillStyle = "rgba(0, 90, 200, 0.05)";
  for (const [x, y] of view.samples) ctx.fillRect(x - 1, y - 1, 2, 2);

  view.fixations.forEach((f, i) => {
    const r = Math.sqrt(f.duration_ms) / 1.5;
    ctx.beginPath();
    ctx.arc(f.x, f.y, r, 0, 2 * Math.PI);
    ctx.fillStyle = view.assigned[i] === null ? "rgba(200, 40, 40, 0.5)" : "rgba(240, 140, 0, 0.45)";
    ctx.fill();
  });

  const onWords = view.assigned.filter((w) => w !== null).length;
  const read = view.fprt_ms.filter((v) => v !== null).length;
  $("fixation-summary").textContent =
    `${view.fixations.length} fixations (${onWords} on words), threshold ${view.threshold_px.toFixed(0)} px, ` +
    `${read} of ${view.words.length} words read in first pass`;
}

function showStats(demo) {
  const table = $("stats");
  table.replaceChildren();
  try {
    const stats = JSON.parse(demo.stats($("stats-text").value));
    for (const [key, value] of Object.entries(stats)) {
      const row = table.insertRow();
      row.insertCell().textContent = key.replaceAll("_", " ");
      row.insertCell().textContent = value === null ? "n/a" : Number.isInteger(value) ? value : value.toFixed(3);
    }
  } catch (e) {
    table.insertRow().insertCell().textContent = String(e);
  }
}

function runGenerate(demo) {
  try {
    const g = JSON.parse(demo.generate($("prompt").value, Number($("weight").value), 40));
    $("generated").textContent = `${$("prompt").value} ${g.text}`;
    $("scores").textContent =
      `log-probability ${g.token_score.toFixed(2)}, gaze score ${g.gaze_score.toFixed(2)}, total ${g.total_score.toFixed(2)}`;
    $("stats-text").value = g.text;
    showStats(demo);
  } catch (e) {
    $("generated").textContent = String(e);
  }
}

async function main() {
  await init();
  $("threshold").addEventListener("input", () => {
    $("threshold-value").textContent = Number($("threshold").value).toFixed(1);
    drawFixations();
  });
  $("seed").addEventListener("change", drawFixations);
  drawFixations();

  // yield once so the status line paints before training blocks
  await new Promise((r) => setTimeout(r, 0));
  const demo = new GazeguideDemo();
  $("status").textContent = "Ready.";
  $("weight").addEventListener("input", () => ($("weight-value").textContent = $("weight").value));
  $("run-generate").addEventListener("click", () => runGenerate(demo));
  $("run-stats").addEventListener("click", () => showStats(demo));
  $("run-generate").disabled = false;
  $("run-stats").disabled = false;
  showStats(demo);
}

main().catch((e) => ($("status").textContent = `Failed to start: ${e}`));
