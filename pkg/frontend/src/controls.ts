/** Teacher control widgets: sliders and buttons wired to the stream. */

import { ControlMessage } from "./protocol.js";
import { ConsoleViewModel } from "./viewmodel.js";

export type ControlSender = (msg: ControlMessage) => void;

interface Widgets {
  requirement: HTMLInputElement;
  requirementValue: HTMLSpanElement;
  complexity: HTMLInputElement;
  complexityValue: HTMLSpanElement;
  breakBtn: HTMLButtonElement;
  lessonBtn: HTMLButtonElement;
  testBtn: HTMLButtonElement;
  pauseBtn: HTMLButtonElement;
  resumeBtn: HTMLButtonElement;
  finishBtn: HTMLButtonElement;
  stepBtn: HTMLButtonElement;
}

export interface ControlsHandle {
  render(): void;
}

export function mountControls(
  root: HTMLElement,
  vm: ConsoleViewModel,
  send: ControlSender,
  step: (() => void) | null,
): ControlsHandle {
  root.innerHTML = `
    <div class="row">
      <label>requirement U
        <input type="range" data-id="requirement" min="0" max="20" step="0.5" value="0">
        <span data-id="requirement-value">0</span>
      </label>
      <label>complexity S
        <input type="range" data-id="complexity" min="0" max="0.95" step="0.05" value="0">
        <span data-id="complexity-value">0</span>
      </label>
    </div>
    <div class="row">
      <button data-id="break">break</button>
      <button data-id="lesson">lesson</button>
      <button data-id="test">give test</button>
      <button data-id="pause">pause</button>
      <button data-id="resume">resume</button>
      <button data-id="step" hidden>step +1</button>
      <button data-id="finish" class="danger">finish</button>
    </div>
  `;

  const byId = <T extends HTMLElement>(id: string): T => {
    const el = root.querySelector<T>(`[data-id="${id}"]`);
    if (el === null) throw new Error(`missing widget ${id}`);
    return el;
  };

  const w: Widgets = {
    requirement: byId("requirement"),
    requirementValue: byId("requirement-value"),
    complexity: byId("complexity"),
    complexityValue: byId("complexity-value"),
    breakBtn: byId("break"),
    lessonBtn: byId("lesson"),
    testBtn: byId("test"),
    pauseBtn: byId("pause"),
    resumeBtn: byId("resume"),
    finishBtn: byId("finish"),
    stepBtn: byId("step"),
  };

  w.requirement.addEventListener("input", () => {
    w.requirementValue.textContent = w.requirement.value;
  });
  w.requirement.addEventListener("change", () => {
    send({ type: "set_requirement", U: Number(w.requirement.value) });
  });
  w.complexity.addEventListener("input", () => {
    w.complexityValue.textContent = w.complexity.value;
  });
  w.complexity.addEventListener("change", () => {
    send({ type: "set_complexity", S: Number(w.complexity.value) });
  });
  w.breakBtn.addEventListener("click", () => send({ type: "start_break" }));
  w.lessonBtn.addEventListener("click", () => send({ type: "end_break" }));
  w.testBtn.addEventListener("click", () => send({ type: "give_test" }));
  w.pauseBtn.addEventListener("click", () => send({ type: "pause" }));
  w.resumeBtn.addEventListener("click", () => send({ type: "resume" }));
  w.finishBtn.addEventListener("click", () => {
    if (window.confirm("Finish the session and grade it?")) {
      send({ type: "finish" });
    }
  });
  if (step !== null) {
    w.stepBtn.hidden = false;
    w.stepBtn.addEventListener("click", step);
  }

  const syncSlider = (input: HTMLInputElement, label: HTMLSpanElement, value: number) => {
    if (document.activeElement !== input) {
      input.value = String(value);
      label.textContent = String(value);
    }
  };

  function render(): void {
    const enabled = vm.controlsEnabled();
    for (const el of [
      w.requirement, w.complexity, w.breakBtn, w.lessonBtn,
      w.testBtn, w.pauseBtn, w.resumeBtn, w.finishBtn, w.stepBtn,
    ]) {
      el.toggleAttribute("disabled", !enabled);
    }
    syncSlider(w.requirement, w.requirementValue, vm.requirement);
    syncSlider(w.complexity, w.complexityValue, vm.complexity);
    w.requirement.classList.toggle("pending", vm.isPending("set_requirement"));
    w.complexity.classList.toggle("pending", vm.isPending("set_complexity"));
    w.breakBtn.classList.toggle("pending", vm.isPending("start_break"));
    w.lessonBtn.classList.toggle("pending", vm.isPending("end_break"));
    w.pauseBtn.hidden = vm.sessionStatus !== "running";
    w.resumeBtn.hidden = vm.sessionStatus === "running";
  }

  render();
  return { render };
}
