/** Page bootstrap: create or join a session, then render the dashboard. */

import { RollingSeries } from "./buffer.js";
import { ChartSeries, drawChart } from "./chart.js";
import {
  SessionApi,
  SessionStream,
  SocketLike,
  StreamStatus,
  streamUrl,
} from "./client.js";
import { mountControls } from "./controls.js";
import { ControlMessage, isStateSnapshot } from "./protocol.js";
import { ConsoleViewModel } from "./viewmodel.js";

const PALETTE = ["#2266cc", "#cc4422", "#22a066", "#9944bb", "#b89122",
                 "#cc5588", "#448899", "#77551d"];

const DEFAULT_CONFIG = {
  learners: [
    {
      variant: "workability",
      params: { alpha: [0.1], gamma: [0.01] },
      initial: { Z: [0.0] },
    },
    {
      variant: "workability",
      params: { alpha: [0.08], gamma: [0.02] },
      initial: { Z: [0.0] },
    },
  ],
  timeline: [
    { kind: "lesson", duration_min: 45, U: 6.0, S: 0.2 },
    { kind: "break", duration_min: 15 },
    { kind: "lesson", duration_min: 30, U: 8.0 },
  ],
  dt_min: 0.1,
  tick_min: 1.0,
  tick_rate: 4,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const adapter: SocketLike = {
    onopen: null,
    onmessage: null,
    onclose: null,
    send: (data) => ws.send(data),
    close: () => ws.close(),
  };
  ws.onopen = () => adapter.onopen?.();
  ws.onmessage = (event) => adapter.onmessage?.({ data: String(event.data) });
  ws.onclose = () => adapter.onclose?.();
  return adapter;
}

function seriesOf(trace: RollingSeries, label: string, color: string): ChartSeries {
  return { label, color, points: trace.sampled(600) };
}

function main(): void {
  const base = window.location.origin;
  const api = new SessionApi(base, (url, init) => fetch(url, init));
  const vm = new ConsoleViewModel();
  let stream: SessionStream | null = null;
  let sessionId = "";

  const setup = el<HTMLElement>("setup");
  const dashboard = el<HTMLElement>("dashboard");
  const configBox = el<HTMLTextAreaElement>("config");
  const joinBox = el<HTMLInputElement>("join-id");
  const setupError = el<HTMLElement>("setup-error");
  configBox.value = JSON.stringify(DEFAULT_CONFIG, null, 2);

  const knowledgeCanvas = el<HTMLCanvasElement>("chart-knowledge");
  const workabilityCanvas = el<HTMLCanvasElement>("chart-workability");
  const effortCanvas = el<HTMLCanvasElement>("chart-effort");

  const controls = mountControls(
    el<HTMLElement>("controls"),
    vm,
    (msg: ControlMessage) => {
      try {
        vm.noteSent(msg);
        stream?.send(msg);
      } catch (error) {
        vm.lastError = String(error);
      }
      render();
    },
    () => {
      // tick_rate 0 sessions only; paced ones answer 409 and the detail
      // lands in the error box
      if (sessionId !== "") {
        api.advance(sessionId, 1).catch((error) => {
          vm.lastError = String(error);
          render();
        });
      }
    },
  );

  function render(): void {
    el("pill-connection").textContent = vm.connection;
    el("pill-status").textContent = vm.sessionStatus;
    el("pill-phase").textContent = vm.phase;
    el("pill-clock").textContent =
      `tick ${vm.tick} | t = ${vm.tMin.toFixed(1)} min`;
    el("pill-session").textContent = sessionId === "" ? "-" : sessionId;

    const knowledge: ChartSeries[] = [];
    const workability: ChartSeries[] = [];
    const effortSeries: ChartSeries[] = [];
    vm.learners.forEach((traces, i) => {
      const color = PALETTE[i % PALETTE.length]!;
      knowledge.push(seriesOf(traces.total, `L${i + 1} total`, color));
      knowledge.push(seriesOf(traces.strong, `L${i + 1} strong`, shade(color)));
      workability.push(seriesOf(traces.workability, `L${i + 1}`, color));
      effortSeries.push(seriesOf(traces.effort, `F L${i + 1}`, color));
    });
    effortSeries.push(seriesOf(vm.requirementTrace, "U", "#111111"));

    drawCanvas(knowledgeCanvas, knowledge, {});
    drawCanvas(workabilityCanvas, workability, { yMin: 0, yMax: 1 });
    drawCanvas(effortCanvas, effortSeries, {});

    renderFeed();
    renderProbe();
    renderScore();
    controls.render();

    const errorBox = el("error-box");
    errorBox.textContent = vm.lastError ?? "";
    errorBox.hidden = vm.lastError === null;
  }

  function drawCanvas(
    canvas: HTMLCanvasElement,
    series: ChartSeries[],
    opts: { yMin?: number; yMax?: number },
  ): void {
    const ctx = canvas.getContext("2d");
    if (ctx !== null) drawChart(ctx, canvas.width, canvas.height, series, opts);
  }

  function renderFeed(): void {
    const list = el<HTMLUListElement>("feed");
    list.innerHTML = "";
    for (const entry of vm.feed.slice(-12).reverse()) {
      const item = document.createElement("li");
      item.textContent = `[${entry.tick}] ${entry.text}`;
      list.appendChild(item);
    }
  }

  function renderProbe(): void {
    const box = el("probe");
    if (vm.probe === null) {
      box.hidden = true;
      return;
    }
    box.hidden = false;
    const rows = vm.probe.learners
      .map((l, i) =>
        `<tr><td>L${i + 1}</td><td>${l.Z_total.toFixed(3)}</td>` +
        `<td>${l.Z_n.toFixed(3)}</td></tr>`)
      .join("");
    el("probe-body").innerHTML = rows;
    el("probe-when").textContent = `t = ${vm.probe.t_min.toFixed(1)} min`;
  }

  function renderScore(): void {
    const box = el("score");
    if (vm.score === null) {
      box.hidden = true;
      return;
    }
    box.hidden = false;
    el("score-grade").textContent = vm.score.grade.toFixed(3);
    el("score-mean").textContent = vm.score.class_mean.toFixed(3);
    el("score-ref").textContent = vm.score.reference_objective.toFixed(3);
    el("score-each").textContent =
      vm.score.per_learner_final.map((v) => v.toFixed(3)).join(", ");
  }

  async function attach(id: string): Promise<void> {
    const snapshot = await api.state(id);
    if (!isStateSnapshot(snapshot)) {
      throw new Error("state response has an unexpected shape");
    }
    sessionId = id;
    vm.applySnapshot(snapshot);
    stream = new SessionStream(
      (fromTick) => streamUrl(base, id, fromTick),
      browserSocket,
      {
        onDocument: (doc) => {
          vm.apply(doc);
          render();
        },
        onStatus: (status: StreamStatus) => {
          vm.setConnection(status);
          render();
        },
        onProtocolError: (error) => {
          vm.lastError = error.message;
          render();
        },
      },
    );
    stream.connect(0);
    setup.hidden = true;
    dashboard.hidden = false;
    render();
  }

  el("create").addEventListener("click", () => {
    setupError.textContent = "";
    let doc: unknown;
    try {
      doc = JSON.parse(configBox.value);
    } catch (error) {
      setupError.textContent = `config is not valid JSON: ${error}`;
      return;
    }
    api
      .create(doc)
      .then((id) => attach(id))
      .catch((error) => {
        setupError.textContent = String(error);
      });
  });

  el("join").addEventListener("click", () => {
    setupError.textContent = "";
    const id = joinBox.value.trim();
    if (id === "") {
      setupError.textContent = "enter a session id to join";
      return;
    }
    attach(id).catch((error) => {
      setupError.textContent = String(error);
    });
  });

  const fromQuery = new URLSearchParams(window.location.search).get("session");
  if (fromQuery !== null) {
    attach(fromQuery).catch((error) => {
      setupError.textContent = String(error);
    });
  }

  render();
}

function shade(color: string): string {
  return color + "88"; // same hue, translucent
}

main();
