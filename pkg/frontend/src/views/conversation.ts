/** Q&A conversation view: the transcript, exactly four suggestion controls
 * whenever the last turn is an answer, a modify flow that pre-fills the input
 * box, and the free-typing input itself. Controls disable while a query is in
 * flight; there is never more than one.
 */

import type { Cause, FollowUp, Turn } from "../api.js";
import type { ViewState } from "../state.js";

export interface ConversationCallbacks {
  onTyped(text: string): void;
  onClickSuggestion(slot: number): void;
  onModifiedSubmit(slot: number, text: string): void;
}

/** One-line meanings shown as badge tooltips. */
export const CAUSE_HINTS: Record<Cause, string> = {
  Material: "That out of which a thing comes to be and which persists.",
  Formal: "The form or the archetype, i.e. the statement of the essence.",
  Efficient: "The primary source of change and the various factors that contribute to that change.",
  Final: "In the sense of end or 'that for the sake of which' a thing is done.",
};

interface ModifyState {
  slot: number | null;
}

export function renderConversation(
  root: HTMLElement,
  turns: Turn[],
  state: ViewState,
  callbacks: ConversationCallbacks,
): void {
  root.replaceChildren();
  const modify: ModifyState = { slot: null };

  const log = document.createElement("ol");
  log.className = "turn-log";
  for (const turn of turns) {
    const item = document.createElement("li");
    item.className = `turn turn-${turn.role}`;
    item.dataset.index = String(turn.index);
    const who = document.createElement("span");
    who.className = "turn-role";
    who.textContent = turn.role === "user" ? "You" : "Tutor";
    const text = document.createElement("p");
    text.textContent = turn.text;
    item.append(who, text);
    log.appendChild(item);
  }

  const suggestions = document.createElement("div");
  suggestions.className = "suggestions";
  const lastIsAnswer = turns.length > 0 && turns[turns.length - 1].role === "assistant";
  const visible: FollowUp[] = lastIsAnswer ? state.suggestions : [];

  const input = document.createElement("textarea");
  input.className = "query-input";
  input.placeholder = "Ask about the material";
  input.disabled = state.pending;

  visible.forEach((followUp, i) => {
    const slot = i + 1;
    const chip = document.createElement("div");
    chip.className = "suggestion";
    chip.dataset.slot = String(slot);

    const badge = document.createElement("span");
    badge.className = `cause-badge cause-${followUp.cause.toLowerCase()}`;
    badge.textContent = followUp.cause;
    badge.title = CAUSE_HINTS[followUp.cause];

    const ask = document.createElement("button");
    ask.type = "button";
    ask.className = "suggestion-ask";
    ask.textContent = followUp.text;
    ask.disabled = state.pending;
    ask.addEventListener("click", () => callbacks.onClickSuggestion(slot));

    const edit = document.createElement("button");
    edit.type = "button";
    edit.className = "suggestion-modify";
    edit.textContent = "modify";
    edit.disabled = state.pending;
    edit.addEventListener("click", () => {
      modify.slot = slot;
      input.value = followUp.text;
      input.focus?.();
    });

    chip.append(badge, ask, edit);
    suggestions.appendChild(chip);
  });

  const form = document.createElement("form");
  form.className = "query-form";
  const send = document.createElement("button");
  send.type = "submit";
  send.className = "query-send";
  send.textContent = "Send";
  send.disabled = state.pending;
  form.append(input, send);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || state.pending) return;
    if (modify.slot !== null) {
      callbacks.onModifiedSubmit(modify.slot, text);
    } else {
      callbacks.onTyped(text);
    }
  });
  input.addEventListener("input", () => {
    // Free edits unrelated to a suggestion drop back to typed provenance.
    if (modify.slot !== null && input.value.trim() === "") {
      modify.slot = null;
    }
  });

  root.append(log, suggestions, form);
}
