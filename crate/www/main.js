import init, { evaluate, simulate_alerts, forecast } from "./pkg/fogtrace_wasm.js";

const POPULATION = 10000;
const $ = (id) => document.getElementById(id);

const meetups = [
  { peer: 1.0, tau: 240, nu: -0.4 },
  { peer: 0.9, tau: 60, nu: -0.5 },
  { peer: 0.5, tau: 30, nu: -0.7 },
];

function showValue(input) {
  const out = input.parentElement.querySelector("output");
  if (out) out.textContent = input.value;
}

function numberCell(value, step, onChange) {
  const td = document.createElement("td");
  const input = document.createElement("input");
  input.type = "number";
  input.step = step;
  input.value = value;
  input.style.width = "6em";
  input.addEventListener("input", () => onChange(parseFloat(input.value)));
  td.appendChild(input);
  return td;
}

function buildMeetupTable() {
  const body = $("s-meetups");
  meetups.forEach((m, i) => {
    const tr = document.createElement("tr");
    const label = document.createElement("td");
    label.textContent = String(i + 1);
    tr.append(
      label,
      numberCell(m.peer, 0.05, (v) => { m.peer = v; score(); }),
      numberCell(m.tau, 10, (v) => { m.tau = v; score(); }),
      numberCell(m.nu, 0.05, (v) => { m.nu = v; score(); }),
    );
    body.appendChild(tr);
  });
}

function report(err) {
  $("error").textContent = err ? String(err.message ?? err) : "";
}

function score() {
  try {
    const e = evaluate(
      parseFloat($("s-theta").value),
      parseFloat($("s-tau0").value),
      parseFloat($("s-nu0").value),
      $("s-symptom").checked,
      Float64Array.from(meetups.map((m) => m.peer)),
      Float64Array.from(meetups.map((m) => m.tau)),
      Float64Array.from(meetups.map((m) => m.nu)),
    );
    $("s-p").textContent = e.contact.toFixed(4);
    $("s-alpha").textContent = e.symptom.toFixed(4);
    $("s-total").textContent = e.total.toFixed(4);
    const level = $("s-level");
    level.textContent = e.level.replace("_", " ") + (e.infected ? " (infected)" : "");
    level.className = "level " + e.level;
    e.free();
    report(null);
  } catch (err) {
    report(err);
  }
}

function plot(canvas, series) {
  const ratio = window.devicePixelRatio || 1;
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  canvas.width = w * ratio;
  canvas.height = h * ratio;
  const ctx = canvas.getContext("2d");
  ctx.scale(ratio, ratio);
  ctx.clearRect(0, 0, w, h);
  const pad = { l: 44, r: 12, t: 10, b: 26 };
  const days = Math.max(1, ...series.map((s) => s.offset + s.values.length));
  const top = Math.max(1, ...series.flatMap((s) => Array.from(s.values)));
  const x = (d) => pad.l + (d / Math.max(1, days - 1)) * (w - pad.l - pad.r);
  const y = (v) => h - pad.b - (v / top) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, h - pad.b);
  ctx.lineTo(w - pad.r, h - pad.b);
  ctx.stroke();
  ctx.fillText(String(top), 4, pad.t + 8);
  ctx.fillText("0", 4, h - pad.b);
  ctx.fillText("day 1", pad.l, h - 8);
  ctx.fillText("day " + days, w - pad.r - 40, h - 8);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.values.forEach((v, i) => {
      const px = x(s.offset + i);
      const py = y(v);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
}

function alerts() {
  try {
    const run = simulate_alerts(
      parseInt($("a-case").value, 10),
      POPULATION,
      parseInt($("a-meetups").value, 10),
      15,
      parseInt($("a-seed").value, 10) || 0,
      parseFloat($("a-compliance").value),
    );
    plot($("a-plot"), [
      { values: run.baseline, offset: 0, color: "#c0392b" },
      { values: run.alerted, offset: 0, color: "#2471a3" },
    ]);
    run.free();
    report(null);
  } catch (err) {
    report(err);
  }
}

function lockdown() {
  try {
    const observedDays = parseInt($("f-days").value, 10);
    const f = forecast(
      parseInt($("a-case").value, 10),
      POPULATION,
      parseInt($("a-meetups").value, 10),
      observedDays,
      parseInt($("a-seed").value, 10) || 0,
      parseInt($("f-horizon").value, 10),
      parseInt($("f-lockdown").value, 10),
    );
    plot($("f-plot"), [
      { values: f.observed, offset: 0, color: "#555" },
      { values: f.current, offset: observedDays, color: "#c0392b" },
      { values: f.lockdown, offset: observedDays, color: "#27ae60" },
    ]);
    f.free();
    report(null);
  } catch (err) {
    report(err);
  }
}

function wire(ids, handler) {
  for (const id of ids) {
    const el = $(id);
    showValue(el);
    el.addEventListener("input", () => { showValue(el); handler(); });
  }
}

async function main() {
  await init();
  for (let c = 1; c <= 8; c++) {
    const opt = document.createElement("option");
    opt.value = String(c);
    opt.textContent = String(c);
    $("a-case").appendChild(opt);
  }
  buildMeetupTable();
  wire(["s-theta", "s-tau0", "s-nu0", "s-symptom"], score);
  wire(["a-case", "a-meetups", "a-compliance", "a-seed"], () => { alerts(); lockdown(); });
  wire(["f-days", "f-horizon", "f-lockdown"], lockdown);
  score();
  alerts();
  lockdown();
}

main().catch(report);
