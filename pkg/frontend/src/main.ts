/** Page wiring: session lifecycle, input handling, stream plumbing. */

import { ApiError, createSession, getModel, getSession, postTurn } from "./api.js";
import { renderTranscript, TurnView } from "./render.js";
import { connectStream } from "./stream.js";
import type {
  ConnectionStatus,
  FramePayload,
  Policy,
  TranscriptEntry,
} from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const statusBanner = el<HTMLDivElement>("status");
const transcriptEl = el<HTMLDivElement>("transcript");
const turnViewEl = el<HTMLDivElement>("turn-view");
const policySelect = el<HTMLSelectElement>("policy");
const utteranceInput = el<HTMLInputElement>("utterance");
const overrideInput = el<HTMLTextAreaElement>("frame-override");
const sendButton = el<HTMLButtonElement>("send");
const errorEl = el<HTMLDivElement>("error");
const modelInfoEl = el<HTMLSpanElement>("model-info");

const turnView = new TurnView(turnViewEl, []);
let sessionId: string | null = null;
let transcript: TranscriptEntry[] = [];
let status: ConnectionStatus = "connecting";
let sending = false;
let closeStream: (() => void) | null = null;

function showError(message: string): void {
  errorEl.textContent = message;
  errorEl.hidden = message === "";
}

function refreshControls(): void {
  const ready = status === "open" && sessionId !== null && !sending;
  sendButton.disabled = !ready || utteranceInput.value.trim() === "";
  utteranceInput.disabled = status !== "open";
}

function setStatus(next: ConnectionStatus): void {
  status = next;
  const labels: Record<ConnectionStatus, string> = {
    open: "connected",
    retrying: "reconnecting",
    connecting: "connecting",
    closed: "disconnected",
  };
  statusBanner.textContent = labels[next];
  statusBanner.className = `status ${next}`;
  refreshControls();
}

async function resync(): Promise<void> {
  if (!sessionId) return;
  try {
    const doc = await getSession(sessionId);
    transcript = doc.transcript;
    renderTranscript(transcriptEl, transcript);
    const last = doc.turns[doc.turns.length - 1];
    if (last) turnView.showTurn(last);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

async function startSession(policy: Policy): Promise<void> {
  closeStream?.();
  showError("");
  try {
    const created = await createSession(policy);
    sessionId = created.session_id;
    turnView.setActionNames(created.action_names);
    transcript = created.greeting ? [{ speaker: "sys", text: created.greeting }] : [];
    renderTranscript(transcriptEl, transcript);
    turnView.showTurn(created.turn);
    closeStream = connectStream(sessionId, {
      onEnvelope: (env) => {
        turnView.handleEnvelope(env);
        if (env.type === "turn_done" && env.payload.response) {
          transcript.push({ speaker: "sys", text: env.payload.response });
          renderTranscript(transcriptEl, transcript);
        }
      },
      onStatus: setStatus,
      onResync: () => void resync(),
    });
  } catch (err) {
    sessionId = null;
    setStatus("closed");
    showError(err instanceof Error ? err.message : String(err));
  }
}

function parseOverride(): FramePayload | undefined {
  const text = overrideInput.value.trim();
  if (!text) return undefined;
  const parsed = JSON.parse(text) as FramePayload;
  return parsed;
}

async function send(): Promise<void> {
  if (!sessionId || sending) return;
  const utterance = utteranceInput.value.trim();
  if (!utterance) return;
  let frame: FramePayload | undefined;
  try {
    frame = parseOverride();
  } catch {
    showError("frame override is not valid JSON");
    return;
  }
  sending = true;
  refreshControls();
  showError("");
  transcript.push({ speaker: "usr", text: utterance });
  renderTranscript(transcriptEl, transcript);
  try {
    await postTurn(sessionId, utterance, frame);
    utteranceInput.value = "";
  } catch (err) {
    if (err instanceof ApiError) showError(`turn failed: ${err.message}`);
    else showError(String(err));
  } finally {
    sending = false;
    refreshControls();
  }
}

sendButton.addEventListener("click", () => void send());
utteranceInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && !sendButton.disabled) void send();
});
utteranceInput.addEventListener("input", refreshControls);
policySelect.addEventListener("change", () => {
  void startSession(policySelect.value as Policy);
});

async function boot(): Promise<void> {
  setStatus("connecting");
  try {
    const info = await getModel();
    modelInfoEl.textContent = info.loaded
      ? `model loaded (${info.backend}, ${info.action_names.length} actions)`
      : "no model loaded: rules policy only";
  } catch {
    modelInfoEl.textContent = "model info unavailable";
  }
  await startSession(policySelect.value as Policy);
}

void boot();
