// DOM projection of the panel models: builds the per-joint cards and keeps
// them in sync with model state. All numeric displays come from the server
// (counts and server-computed degrees); the dashboard never converts units.

import type { JointPanelModel } from "./panel.js";
import { drawSeries } from "./plot.js";

export interface PanelElements {
  root: HTMLElement;
  canvas: HTMLCanvasElement;
  readout: HTMLElement;
  lamps: HTMLElement;
  warning: HTMLElement;
}

export function buildPanel(
  model: JointPanelModel,
  onGains: (kp: string, ki: string, kd: string) => void,
  onReference: (raw: string, unit: "counts" | "si") => void,
): PanelElements {
  const root = el("section", "panel");
  root.appendChild(el("h2", "", `Joint ${model.joint}`));

  const lamps = el("div", "lamps");
  root.appendChild(lamps);

  const canvas = document.createElement("canvas");
  canvas.width = 360;
  canvas.height = 120;
  root.appendChild(canvas);

  const readout = el("div", "readout", "--");
  root.appendChild(readout);

  const warning = el("div", "warning");
  root.appendChild(warning);

  // reference form: counts always; SI only for calibrated joints
  const refForm = el("form", "controls") as HTMLFormElement;
  const refInput = input("reference");
  const unitSelect = document.createElement("select");
  for (const unit of model.calibrated ? ["counts", "si"] : ["counts"]) {
    const option = document.createElement("option");
    option.value = unit;
    option.textContent = unit;
    unitSelect.appendChild(option);
  }
  refForm.append(refInput, unitSelect, button("go"));
  refForm.onsubmit = (event) => {
    event.preventDefault();
    onReference(refInput.value, unitSelect.value as "counts" | "si");
  };
  root.appendChild(refForm);

  // gain words
  const gainForm = el("form", "controls gains") as HTMLFormElement;
  const kp = input("kp");
  const ki = input("ki");
  const kd = input("kd");
  gainForm.append(label("kp", kp), label("ki", ki), label("kd", kd),
                  button("set"));
  gainForm.onsubmit = (event) => {
    event.preventDefault();
    onGains(kp.value, ki.value, kd.value);
  };
  root.appendChild(gainForm);

  kp.value = String(model.gains.kp);
  ki.value = String(model.gains.ki);
  kd.value = String(model.gains.kd);

  return { root, canvas, readout, lamps, warning };
}

export function refreshPanel(model: JointPanelModel, els: PanelElements): void {
  const ctx = els.canvas.getContext("2d");
  if (ctx) {
    drawSeries(ctx, els.canvas.width, els.canvas.height,
               model.windowedSeries());
  }
  const last = model.series.last();
  if (last) {
    const deg = last.deg === null ? "" : ` (${last.deg.toFixed(2)} deg)`;
    els.readout.textContent =
      `ref ${last.ref}  pos ${last.pos}${deg}  drive ${last.rate.toFixed(0)}/s`;
  }
  const lamps = model.lamps;
  els.lamps.innerHTML = "";
  for (const [name, on, color] of [
    ["homed", lamps.homed, "#3fae6a"],
    ["home-sw", lamps.homeSwitch, "#3fae6a"],
    ["limit", lamps.limit, "#d9534f"],
    ["estop", lamps.estopped, "#d9534f"],
  ] as const) {
    const lamp = el("span", "lamp", name);
    lamp.style.background = on ? color : "#333a45";
    els.lamps.appendChild(lamp);
  }
  els.warning.textContent = model.warning ?? "";
}

export function setWarning(els: PanelElements, text: string | null): void {
  els.warning.textContent = text ?? "";
}

function el(tag: string, cls = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

function input(placeholder: string): HTMLInputElement {
  const node = document.createElement("input");
  node.placeholder = placeholder;
  node.size = 7;
  return node;
}

function label(text: string, child: HTMLElement): HTMLElement {
  const node = el("label", "", text);
  node.appendChild(child);
  return node;
}

function button(text: string): HTMLButtonElement {
  const node = document.createElement("button");
  node.type = "submit";
  node.textContent = text;
  return node;
}
