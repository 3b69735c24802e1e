/**
 * Trainer console wiring: one WebSocket session, a canvas view of the
 * environment, the prompt/advice panels, and the rule builder.
 */

import { connectWebSocket } from "./client.js";
import {
  BuilderRow,
  buildRuleText,
  emptyRow,
  FeatureInfo,
  formIsComplete,
} from "./ruleBuilder.js";
import {
  describeUpdate,
  MapInfo,
  Pose,
  renderDriving,
  renderEpisodeChart,
  renderMountainCar,
} from "./render.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const client = connectWebSocket(wsUrl);

const envCanvas = $<HTMLCanvasElement>("env-canvas");
const chartCanvas = $<HTMLCanvasElement>("chart-canvas");
const banner = $<HTMLDivElement>("banner");
const statusLine = $<HTMLDivElement>("status");
const promptBox = $<HTMLDivElement>("prompt-box");
const promptMeta = $<HTMLDivElement>("prompt-meta");
const diffTable = $<HTMLTableElement>("diff-table");
const actionButtons = $<HTMLDivElement>("action-buttons");
const errorsBox = $<HTMLDivElement>("errors");
const ruleRowsBox = $<HTMLDivElement>("rule-rows");
const rulePreview = $<HTMLDivElement>("rule-preview");
const ruleActionSelect = $<HTMLSelectElement>("rule-action");
const ruleSubmit = $<HTMLButtonElement>("rule-submit");

let features: FeatureInfo[] = [];
let builderRows: BuilderRow[] = [];

$<HTMLButtonElement>("btn-step").onclick = () => client.step();
$<HTMLButtonElement>("btn-pause").onclick = () => client.pause();
$<HTMLButtonElement>("btn-run").onclick = () => {
  const rate = Number($<HTMLInputElement>("run-rate").value) || 5;
  client.run(rate);
};
$<HTMLButtonElement>("btn-approve").onclick = () => {
  if (client.canSubmit()) {
    client.approve();
  }
};
$<HTMLButtonElement>("btn-eval-plus").onclick = () => {
  if (client.canSubmit()) {
    client.evaluate(1);
  }
};
$<HTMLButtonElement>("btn-eval-minus").onclick = () => {
  if (client.canSubmit()) {
    client.evaluate(-1);
  }
};
$<HTMLButtonElement>("rule-add-row").onclick = () => {
  builderRows.push(emptyRow(features));
  renderBuilder();
};
ruleSubmit.onclick = () => {
  try {
    const text = buildRuleText(builderRows, features);
    client.recommendRule(text, ruleActionSelect.value);
    builderRows = [emptyRow(features)];
    renderBuilder();
  } catch (err) {
    showError(String(err));
  }
};

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement) {
    return;
  }
  if (event.key === " ") {
    event.preventDefault();
    client.step();
  } else if (event.key === "a" && client.canSubmit()) {
    client.approve();
  }
});

function showError(message: string): void {
  const div = document.createElement("div");
  div.className = "error";
  div.textContent = message;
  errorsBox.prepend(div);
  while (errorsBox.childElementCount > 5) {
    errorsBox.lastElementChild?.remove();
  }
}

function renderBuilder(): void {
  ruleRowsBox.replaceChildren();
  builderRows.forEach((row, index) => {
    const div = document.createElement("div");
    div.className = "rule-row";
    if (index > 0) {
      const joiner = document.createElement("select");
      for (const j of ["AND", "OR"]) {
        joiner.add(new Option(j, j));
      }
      joiner.value = row.joiner;
      joiner.onchange = () => {
        row.joiner = joiner.value as "AND" | "OR";
        refreshPreview();
      };
      div.append(joiner);
    }
    const feature = document.createElement("select");
    for (const f of features) {
      feature.add(new Option(f.name, f.name));
    }
    feature.value = row.feature;
    feature.onchange = () => {
      row.feature = feature.value;
      const info = features.find((f) => f.name === row.feature);
      if (info?.kind === "bool") {
        row.op = "==";
        row.value = "true";
      }
      refreshPreview();
    };
    const op = document.createElement("select");
    for (const o of ["<", "<=", ">", ">=", "==", "!="]) {
      op.add(new Option(o, o));
    }
    op.value = row.op;
    op.onchange = () => {
      row.op = op.value as BuilderRow["op"];
      refreshPreview();
    };
    const value = document.createElement("input");
    value.value = row.value;
    value.size = 8;
    value.oninput = () => {
      row.value = value.value;
      refreshPreview();
    };
    const remove = document.createElement("button");
    remove.textContent = "x";
    remove.onclick = () => {
      builderRows.splice(index, 1);
      renderBuilder();
    };
    div.append(feature, op, value, remove);
    ruleRowsBox.append(div);
  });
  refreshPreview();
}

function refreshPreview(): void {
  try {
    rulePreview.textContent = builderRows.length
      ? buildRuleText(builderRows, features)
      : "(empty)";
  } catch (err) {
    rulePreview.textContent = `invalid: ${String(err)}`;
  }
  ruleSubmit.disabled = !(client.canSubmit() && formIsComplete(builderRows, features));
}

function renderActionButtons(actions: string[]): void {
  actionButtons.replaceChildren();
  ruleActionSelect.replaceChildren();
  for (const action of actions) {
    const button = document.createElement("button");
    button.textContent = action;
    button.onclick = () => {
      if (client.canSubmit()) {
        client.recommendAction(action);
      }
    };
    actionButtons.append(button);
    ruleActionSelect.add(new Option(action, action));
  }
}

function renderPrompt(): void {
  const prompt = client.state.pendingPrompt;
  if (!prompt) {
    promptBox.classList.add("idle");
    promptMeta.textContent = client.state.promptStale
      ? "prompt expired (step moved on)"
      : "no pending prompt";
    diffTable.replaceChildren();
    return;
  }
  promptBox.classList.remove("idle");
  promptMeta.textContent =
    `step ${prompt.step}: agent intends ${prompt.intended_action} ` +
    `(${prompt.source})`;
  diffTable.replaceChildren();
  if (prompt.diff && prompt.diff.length) {
    const head = diffTable.insertRow();
    for (const title of ["feature", "now", "cornerstone"]) {
      const th = document.createElement("th");
      th.textContent = title;
      head.append(th);
    }
    for (const entry of prompt.diff) {
      const row = diffTable.insertRow();
      row.insertCell().textContent = entry.feature;
      row.insertCell().textContent = String(entry.current);
      row.insertCell().textContent = String(entry.cornerstone);
    }
  }
}

function draw(): void {
  const state = client.state;
  banner.hidden = state.connected;
  if (state.info && features.length === 0) {
    features = state.info.features.map(([name, kind]) => ({
      name,
      kind: kind as FeatureInfo["kind"],
    }));
    builderRows = [emptyRow(features)];
    renderActionButtons(state.info.actions);
    renderBuilder();
  }
  const ctx = envCanvas.getContext("2d");
  const update = state.lastUpdate;
  if (ctx && update && state.info) {
    const payload = update as typeof update & { pose?: Pose };
    if (state.info.environment === "driving" && payload.pose) {
      const info = state.info as typeof state.info & {
        map?: MapInfo;
        sensor_offsets?: Record<string, [number, number]>;
      };
      if (info.map && info.sensor_offsets) {
        renderDriving(ctx, envCanvas.width, envCanvas.height, info.map,
                      payload.pose, update.case, info.sensor_offsets,
                      state.crashFlash);
      }
    } else {
      renderMountainCar(ctx, envCanvas.width, envCanvas.height, update.case,
                        state.crashFlash);
    }
    statusLine.textContent = describeUpdate(update);
  }
  const chartCtx = chartCanvas.getContext("2d");
  if (chartCtx) {
    renderEpisodeChart(chartCtx, chartCanvas.width, chartCanvas.height,
                       state.episodes.map((e) => e.steps));
  }
  for (const error of state.errors.splice(0)) {
    showError(`${error.code}: ${error.message}`);
  }
  renderPrompt();
  ruleSubmit.disabled = !(client.canSubmit() && formIsComplete(builderRows, features));
  requestAnimationFrame(draw);
}

requestAnimationFrame(draw);
