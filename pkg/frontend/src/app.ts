// Dashboard bootstrap: reconstruct panel state from GET /state (the UI is
// stateless with respect to the robot), subscribe to telemetry, and wire
// the controls. A reload always rebuilds the same view.

import { ApiClient } from "./api.js";
import { JointPanelModel } from "./panel.js";
import { buildPanel, refreshPanel, setWarning, type PanelElements } from "./render.js";
import { TelemetrySocket } from "./socket.js";
import { JOINTS, type TelemetryFrame } from "./types.js";

async function main(): Promise<void> {
  const api = new ApiClient("");
  const app = document.getElementById("app")!;
  const banner = document.getElementById("banner")!;
  const simTime = document.getElementById("sim-time")!;

  const snapshot = await api.getState();
  const panels = new Map<number, { model: JointPanelModel; els: PanelElements }>();

  for (const joint of JOINTS) {
    const model = new JointPanelModel(joint, api);
    model.restore(snapshot.joints[String(joint)]);
    const els = buildPanel(
      model,
      async (kp, ki, kd) => {
        const result = await model.submitGains(kp, ki, kd);
        setWarning(els, result.message);
      },
      async (raw, unit) => {
        const result = await model.submitReference(raw, unit);
        setWarning(els, result.message);
      },
    );
    app.appendChild(els.root);
    panels.set(joint, { model, els });
  }

  document.getElementById("home-all")!.onclick = () => void api.home();
  document.getElementById("estop-all")!.onclick = () => void api.estop();

  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/telemetry`;
  const socket = new TelemetrySocket(wsUrl);
  socket.onframe = (frame: TelemetryFrame) => {
    simTime.textContent = `sim t = ${(frame.t_ms / 1000).toFixed(2)} s`;
    for (const { model, els } of panels.values()) {
      model.ingest(frame);
      refreshPanel(model, els);
    }
  };
  socket.onstate = (state) => {
    banner.textContent =
      state === "open" ? "" : `telemetry ${state}… retrying`;
    banner.style.display = state === "open" ? "none" : "block";
  };
  socket.connect();
}

window.addEventListener("load", () => {
  void main().catch((err) => {
    const banner = document.getElementById("banner")!;
    banner.textContent = `failed to load state: ${err}`;
    banner.style.display = "block";
  });
});
