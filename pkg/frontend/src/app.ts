// Workbench wiring: parameter editor on the left, EU and action panels on
// the right, region slice below.  All numbers displayed verbatim from the
// service; edits re-request after a short debounce and stale responses are
// dropped.

import { WorkbenchClient, ServiceError } from "./api";
import {
  DEBOUNCE_MS,
  Debouncer,
  SequenceGate,
  SpecEditor,
  configKey,
  entryDisplay,
  tightBlocks,
} from "./state";
import { drawHeatmap, labelAt } from "./heatmap";
import type { ModelResponse, SweepResponse } from "./types";

const MARGIN_WARN = 0.001;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export async function start(baseUrl = ""): Promise<void> {
  const client = new WorkbenchClient(baseUrl);
  const banner = el<HTMLDivElement>("banner");
  let model: ModelResponse;
  try {
    model = await client.getModel();
  } catch (err) {
    banner.textContent = `cannot reach the evaluation service: ${String(err)}`;
    banner.classList.add("error");
    return;
  }
  el<HTMLSpanElement>("model-name").textContent = model.document.name;
  el<HTMLSpanElement>("model-ds").textContent = model.derived.decisionSequence;

  const specNames = Object.keys(model.document.specs ?? {});
  const specSelect = el<HTMLSelectElement>("spec-select");
  for (const name of specNames) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    specSelect.appendChild(opt);
  }

  const stageInput = el<HTMLInputElement>("stage-input");
  const decisionInput = el<HTMLInputElement>("decision-input");
  const policySelect = el<HTMLSelectElement>("policy-select");
  for (const name of Object.keys(model.document.policies ?? {})) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    policySelect.appendChild(opt);
  }

  let editor = new SpecEditor();
  const gate = new SequenceGate();
  const sweepGate = new SequenceGate();

  const paramTable = el<HTMLTableSectionElement>("param-rows");
  const euPanel = el<HTMLTableSectionElement>("eu-rows");
  const actionPanel = el<HTMLTableSectionElement>("action-rows");
  const diagnostics = el<HTMLUListElement>("diagnostics");

  function loadSpec(name: string): void {
    const doc = (model.document.specs ?? {})[name];
    editor = doc
      ? SpecEditor.fromDocument({
          numeric: doc.numeric ?? {},
          relations: doc.relations ?? {},
          free: doc.free ?? [],
        })
      : new SpecEditor();
    renderParams();
    refresh.trigger();
  }

  function renderParams(): void {
    paramTable.replaceChildren();
    for (const name of model.derived.parameters) {
      const role = editor.role(name);
      const row = document.createElement("tr");
      const label = document.createElement("td");
      label.textContent = name;
      const roleCell = document.createElement("td");
      const select = document.createElement("select");
      for (const kind of ["unset", "numeric", "relation", "free"]) {
        const opt = document.createElement("option");
        opt.value = opt.textContent = kind;
        select.appendChild(opt);
      }
      select.value = role?.kind ?? "unset";
      const valueCell = document.createElement("td");
      const input = document.createElement("input");
      input.value =
        role?.kind === "numeric" ? role.value : role?.kind === "relation" ? role.expr : "";
      input.disabled = !role || role.kind === "free";
      valueCell.appendChild(input);
      select.addEventListener("change", () => {
        if (select.value === "numeric") editor.setNumeric(name, input.value || "0");
        else if (select.value === "relation") editor.setRelation(name, input.value || name);
        else if (select.value === "free") editor.setFree(name);
        else editor.clear(name);
        renderParams();
        refresh.trigger();
      });
      input.addEventListener("input", () => {
        if (select.value === "numeric") editor.setNumeric(name, input.value);
        if (select.value === "relation") editor.setRelation(name, input.value);
        refresh.trigger();
      });
      roleCell.appendChild(select);
      row.append(label, roleCell, valueCell);
      paramTable.appendChild(row);
    }
  }

  const refresh = new Debouncer(DEBOUNCE_MS, () => {
    void refreshPanels();
  });

  async function refreshPanels(): Promise<void> {
    const seq = gate.issue();
    diagnostics.replaceChildren();
    try {
      const spec = editor.toSpec();
      const [evaluation, table] = await Promise.all([
        client.evaluate({
          policy: policySelect.value,
          spec,
          stage: Number(stageInput.value),
        }),
        client.policyTable({ spec, decision: Number(decisionInput.value) }),
      ]);
      if (!gate.isCurrent(seq)) return;
      euPanel.replaceChildren();
      for (const entry of evaluation.entries) {
        const row = document.createElement("tr");
        const cfg = document.createElement("td");
        cfg.textContent = configKey(entry.config);
        const val = document.createElement("td");
        val.textContent = entryDisplay(entry);
        val.className = entry.value === null ? "symbolic" : "numeric";
        row.append(cfg, val);
        euPanel.appendChild(row);
      }
      actionPanel.replaceChildren();
      for (const r of table.rows) {
        const row = document.createElement("tr");
        const cells = [
          configKey(r.block),
          `Y${table.decision}=${r.bestAction}`,
          r.value,
          r.margin ?? "",
        ];
        for (const text of cells) {
          const td = document.createElement("td");
          td.textContent = text;
          row.appendChild(td);
        }
        if (tightBlocks([r], MARGIN_WARN).length) row.classList.add("tight");
        actionPanel.appendChild(row);
      }
      for (const note of table.diagnostics) {
        const li = document.createElement("li");
        li.textContent = note;
        diagnostics.appendChild(li);
      }
      banner.textContent = "";
      banner.classList.remove("error");
    } catch (err) {
      if (!gate.isCurrent(seq)) return;
      banner.textContent =
        err instanceof ServiceError ? err.message : `request failed: ${String(err)}`;
      banner.classList.add("error");
    }
  }

  // -- region slice ----------------------------------------------------------

  const axisX = el<HTMLSelectElement>("axis-x");
  const axisY = el<HTMLSelectElement>("axis-y");
  const slider = el<HTMLInputElement>("third-slider");
  const sliderLabel = el<HTMLSpanElement>("third-label");
  const blockInput = el<HTMLInputElement>("block-input");
  const canvas = el<HTMLCanvasElement>("region-canvas");
  const regionNote = el<HTMLSpanElement>("region-note");

  function freeChoices(): string[] {
    return editor.freeParameters();
  }

  function syncAxisChoices(): void {
    for (const select of [axisX, axisY]) {
      const current = select.value;
      select.replaceChildren();
      for (const name of freeChoices()) {
        const opt = document.createElement("option");
        opt.value = opt.textContent = name;
        select.appendChild(opt);
      }
      if (current) select.value = current;
    }
  }

  const renderRegion = new Debouncer(DEBOUNCE_MS, () => {
    void sweepOnce();
  });

  async function sweepOnce(): Promise<void> {
    const seq = sweepGate.issue();
    const free = freeChoices();
    const third = free.find((p) => p !== axisX.value && p !== axisY.value);
    if (third) sliderLabel.textContent = `${third} = ${slider.value}`;
    const block: Record<string, number> = {};
    for (const part of blockInput.value.split(",").filter(Boolean)) {
      const [k, v] = part.split("=");
      block[k.trim()] = Number(v);
    }
    try {
      const sweep: SweepResponse = await client.sweep({
        spec: editor.toSpec(),
        stage: Number(stageInput.value),
        decision: Number(decisionInput.value),
        block,
        axes: [
          { name: axisX.value, lo: 0, hi: 1, steps: 50 },
          { name: axisY.value, lo: 0, hi: 1, steps: 50 },
        ],
        fixed: third ? { [third]: slider.value } : {},
      });
      if (!sweepGate.isCurrent(seq)) return;
      const ctx = canvas.getContext("2d");
      if (!ctx) return;
      const marked: [number, number] | undefined = currentPoint();
      drawHeatmap(ctx, sweep, canvas.width, canvas.height, marked);
      if (marked) {
        regionNote.textContent = `elicited point lies in the ${labelAt(sweep, marked)} region`;
      }
    } catch (err) {
      if (!sweepGate.isCurrent(seq)) return;
      regionNote.textContent = String(err);
    }
  }

  function currentPoint(): [number, number] | undefined {
    // the elicited point: the current numeric edit if any, otherwise the
    // complete elicitation's resolved value (sum-to-one closures included)
    const resolved = model.derived.resolvedSpecs?.["complete"] ?? {};
    const read = (name: string): number | undefined => {
      const role = editor.role(name);
      if (role?.kind === "numeric") return Number(role.value);
      if (name in resolved) return Number(resolved[name]);
      return undefined;
    };
    const x = read(axisX.value);
    const y = read(axisY.value);
    return x === undefined || y === undefined ? undefined : [x, y];
  }

  specSelect.addEventListener("change", () => {
    loadSpec(specSelect.value);
    syncAxisChoices();
  });
  for (const control of [stageInput, decisionInput, policySelect]) {
    control.addEventListener("change", () => refresh.trigger());
  }
  for (const control of [axisX, axisY, blockInput]) {
    control.addEventListener("change", () => renderRegion.trigger());
  }
  slider.addEventListener("input", () => renderRegion.trigger());
  el<HTMLButtonElement>("render-region").addEventListener("click", () =>
    renderRegion.trigger(),
  );

  if (specNames.length) {
    specSelect.value = specNames[0];
    loadSpec(specNames[0]);
  } else {
    renderParams();
  }
  syncAxisChoices();
}

if (typeof document !== "undefined" && document.getElementById("banner")) {
  void start();
}
