/**
 * DOM rendering for the live turn view.
 *
 * Each turn renders as: semantic frame panel, then one block per
 * mini-turn in arrival order, then the system response. A mini-turn
 * block shows the 64-cell state strip, the context-feature heatmap and
 * the action probability chart with the argmax marked. Probabilities
 * are displayed exactly as received, never renormalized.
 */

import type {
  FramePayload,
  MiniTurnPayload,
  StreamEnvelope,
  TranscriptEntry,
  TurnPayload,
} from "./types.js";

const STATE_BITS = 64;
// heatmap: 32 columns, at most 8 rows; wider vectors average in chunks
const HEATMAP_COLS = 32;
const HEATMAP_MAX_CELLS = 256;

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTranscript(el: HTMLElement, entries: TranscriptEntry[]): void {
  el.innerHTML = entries
    .map(
      (e) => `
      <div class="line ${e.speaker}">
        <span class="who">${e.speaker === "usr" ? "you" : "system"}</span>
        <span class="text">${esc(e.text)}</span>
      </div>`,
    )
    .join("");
  el.scrollTop = el.scrollHeight;
}

export function framePanelHtml(frame: FramePayload, utterance: string): string {
  const informed = Object.entries(frame.informed)
    .map(([k, v]) => `<span class="chip">${esc(k)}=${esc(v)}</span>`)
    .join("");
  const requested = frame.requested
    .map((slot) => `<span class="chip req">${esc(slot)}</span>`)
    .join("");
  return `
    <div class="frame-panel">
      <div class="utterance">${esc(utterance) || "<em>(session start)</em>"}</div>
      <table class="frame">
        <tr><th>intent</th><td>${esc(frame.intent)}</td></tr>
        <tr><th>informed</th><td>${informed || "<em>none</em>"}</td></tr>
        <tr><th>requested</th><td>${requested || "<em>none</em>"}</td></tr>
      </table>
    </div>`;
}

/** Exactly 64 cells; set bits get the `on` class. */
export function stateStripHtml(vec: number[]): string {
  let cells = "";
  for (let i = 0; i < STATE_BITS; i++) {
    const bit = (vec[i] ?? 0) > 0.5;
    cells += `<span class="cell${bit ? " on" : ""}" title="bit ${i}: ${vec[i] ?? 0}"></span>`;
  }
  return `<div class="state-strip">${cells}</div>`;
}

/**
 * Context feature as a 32-wide grid. Vectors longer than 256 entries
 * are averaged in consecutive chunks (by absolute value); the hover
 * title keeps the raw numbers of each chunk.
 */
export function contextHeatmapHtml(ctx: number[]): string {
  const chunk = Math.max(1, Math.ceil(ctx.length / HEATMAP_MAX_CELLS));
  const cells: string[] = [];
  const means: number[] = [];
  for (let start = 0; start < ctx.length; start += chunk) {
    const slice = ctx.slice(start, start + chunk);
    means.push(slice.reduce((acc, v) => acc + Math.abs(v), 0) / slice.length);
  }
  const top = Math.max(...means, 0);
  for (let i = 0; i < means.length; i++) {
    const start = i * chunk;
    const raw = ctx
      .slice(start, start + chunk)
      .map((v) => String(v))
      .join(", ");
    const alpha = top > 0 ? (means[i] ?? 0) / top : 0;
    cells.push(
      `<span class="hm-cell" style="opacity: ${alpha.toFixed(3)}"` +
        ` title="dims ${start}..${Math.min(start + chunk, ctx.length) - 1}: ${raw}"></span>`,
    );
  }
  return `
    <div class="ctx-heatmap" style="grid-template-columns: repeat(${HEATMAP_COLS}, 1fr)">
      ${cells.join("")}
    </div>`;
}

/**
 * Vertical bars, one per action in action-id order, heights
 * proportional to the probabilities exactly as sent. The first maximum
 * gets the `argmax` class, mirroring how the server breaks ties.
 */
export function probChartHtml(probs: number[], actionNames: string[]): string {
  let argmax = 0;
  for (let i = 1; i < probs.length; i++) {
    if ((probs[i] ?? 0) > (probs[argmax] ?? 0)) argmax = i;
  }
  const bars = probs
    .map((p, i) => {
      const name = actionNames[i] ?? `action ${i}`;
      return `
      <div class="bar-slot" data-action-id="${i}">
        <div class="bar${i === argmax ? " argmax" : ""}" data-action-id="${i}"
             style="height: ${(p * 100).toFixed(3)}%" title="${esc(name)}: ${p}"></div>
        <span class="bar-label">${i}</span>
      </div>`;
    })
    .join("");
  return `<div class="prob-chart">${bars}</div>`;
}

function ruleFireHtml(mt: MiniTurnPayload): string {
  const rules = (mt.activated ?? [])
    .map((r) => `<span class="chip">${esc(r)}</span>`)
    .join("");
  return `<div class="rule-fire">rules fired: ${rules || "<em>none</em>"}</div>`;
}

function miniTurnHtml(
  mt: MiniTurnPayload,
  ctx: number[],
  actionNames: string[],
): string {
  const name = actionNames[mt.action_id] ?? `action ${mt.action_id}`;
  const picker =
    mt.probabilities !== null
      ? probChartHtml(mt.probabilities, actionNames)
      : ruleFireHtml(mt);
  return `
    <article class="mini-turn" data-action-id="${mt.action_id}">
      <header>
        <span class="idx">#${mt.mini_turn_index}</span>
        ${mt.event !== null ? `<span class="event">${esc(mt.event)}</span>` : ""}
        <span class="action">${esc(name)} (${mt.action_id})</span>
      </header>
      ${picker}
      <div class="viz-label">state bits</div>
      ${stateStripHtml(mt.state_feature)}
      <div class="viz-label">context feature</div>
      ${contextHeatmapHtml(ctx)}
      <div class="fragment">${esc(mt.response_fragment) || "<em>no output</em>"}</div>
    </article>`;
}

/**
 * Live view of one turn. Feed it stream envelopes as they arrive, or
 * replay a stored turn summary after a reconnect; both paths produce
 * the same DOM.
 */
export class TurnView {
  private contextFeature: number[] = [];
  private miniTurns = 0;

  constructor(
    private readonly root: HTMLElement,
    private actionNames: string[],
  ) {}

  setActionNames(names: string[]): void {
    this.actionNames = names;
  }

  get miniTurnCount(): number {
    return this.miniTurns;
  }

  handleEnvelope(env: StreamEnvelope): void {
    switch (env.type) {
      case "frame":
        this.beginTurn(env.turn_index, env.payload.frame, env.payload.utterance);
        this.contextFeature = env.payload.context_feature;
        break;
      case "mini_turn":
        this.addMiniTurn(env.payload);
        break;
      case "turn_done": {
        const note = env.payload.truncated
          ? `<span class="truncated">truncated at mini-turn budget</span>`
          : "";
        this.finishTurn(env.payload.sequence, env.payload.response, note);
        break;
      }
    }
  }

  /** Re-render a whole turn from its REST summary. */
  showTurn(turn: TurnPayload): void {
    this.beginTurn(turn.turn_index, turn.frame, turn.utterance);
    this.contextFeature = turn.result.context_feature;
    for (const mt of turn.result.trace) this.addMiniTurn(mt);
    const note = turn.result.truncated
      ? `<span class="truncated">truncated at mini-turn budget</span>`
      : "";
    this.finishTurn(turn.result.sequence, turn.result.response, note);
  }

  private beginTurn(turnIndex: number, frame: FramePayload, utterance: string): void {
    this.miniTurns = 0;
    this.contextFeature = [];
    this.root.innerHTML = `
      <section class="turn" data-turn-index="${turnIndex}">
        <h3>turn ${turnIndex}</h3>
        ${framePanelHtml(frame, utterance)}
        <div class="mini-turns"></div>
        <div class="turn-footer"></div>
      </section>`;
  }

  private addMiniTurn(mt: MiniTurnPayload): void {
    const host = this.root.querySelector(".mini-turns");
    if (!host) return;
    host.insertAdjacentHTML(
      "beforeend",
      miniTurnHtml(mt, this.contextFeature, this.actionNames),
    );
    this.miniTurns += 1;
  }

  private finishTurn(sequence: number[], response: string, note: string): void {
    const footer = this.root.querySelector(".turn-footer");
    if (!footer) return;
    footer.innerHTML = `
      <div class="sequence">actions: [${sequence.join(", ")}]</div>
      <div class="response">${esc(response) || "<em>no response</em>"}</div>
      ${note}`;
  }
}
