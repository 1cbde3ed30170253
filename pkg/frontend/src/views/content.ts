/** Embedded content view: navigation sidebar (hideable) + the document text,
 * plus a "find in source" box backed by GET /locate for verifying answers.
 */

import type { DocumentOut, Excerpt, Section } from "../api.js";
import type { ViewState } from "../state.js";

export interface ContentCallbacks {
  onJump(anchor: string): void;
  onLocate(quote: string): Promise<Excerpt[]>;
}

function renderSection(section: Section): HTMLElement {
  const wrap = document.createElement("section");
  wrap.className = "doc-section";
  wrap.id = `section-${section.anchor}`;
  wrap.dataset.anchor = section.anchor;

  const heading = document.createElement(`h${Math.min(section.level, 6)}`);
  heading.textContent = section.heading;
  wrap.appendChild(heading);

  if (section.body) {
    for (const para of section.body.split(/\n{2,}/)) {
      const p = document.createElement("p");
      p.textContent = para;
      wrap.appendChild(p);
    }
  }
  section.children.forEach((child) => wrap.appendChild(renderSection(child)));
  return wrap;
}

export function renderContent(
  root: HTMLElement,
  doc: DocumentOut,
  state: ViewState,
  callbacks: ContentCallbacks,
): void {
  root.replaceChildren();

  const nav = document.createElement("nav");
  nav.className = "content-nav";
  nav.hidden = !state.navVisible;

  for (const entry of doc.navigation) {
    const link = document.createElement("button");
    link.type = "button";
    link.className = "nav-entry";
    link.dataset.anchor = entry.anchor;
    link.style.paddingLeft = `${(entry.level - 1) * 14}px`;
    link.textContent = entry.heading;
    link.addEventListener("click", () => callbacks.onJump(entry.anchor));
    nav.appendChild(link);
  }

  const toggle = document.createElement("button");
  toggle.type = "button";
  toggle.className = "nav-toggle";
  toggle.textContent = state.navVisible ? "Hide contents" : "Show contents";
  toggle.addEventListener("click", () => {
    state.navVisible = !state.navVisible;
    nav.hidden = !state.navVisible;
    toggle.textContent = state.navVisible ? "Hide contents" : "Show contents";
  });

  const body = document.createElement("div");
  body.className = "content-body";

  const meta = document.createElement("header");
  meta.className = "doc-meta";
  const title = document.createElement("h1");
  title.textContent = doc.title;
  meta.appendChild(title);
  if (doc.authors.length || doc.published) {
    const byline = document.createElement("p");
    byline.className = "doc-byline";
    byline.textContent = [doc.authors.join(", "), doc.published ?? ""].filter(Boolean).join(" · ");
    meta.appendChild(byline);
  }
  body.appendChild(meta);
  doc.sections.forEach((section) => body.appendChild(renderSection(section)));

  const finder = document.createElement("form");
  finder.className = "locate-form";
  const input = document.createElement("input");
  input.type = "search";
  input.placeholder = "Find a quote in the source";
  input.className = "locate-input";
  const results = document.createElement("div");
  results.className = "locate-results";
  finder.append(input, results);
  finder.addEventListener("submit", (event) => {
    event.preventDefault();
    const quote = input.value.trim();
    if (quote.length < 3) return;
    void callbacks.onLocate(quote).then((excerpts) => {
      results.replaceChildren();
      if (!excerpts.length) {
        results.textContent = "Not found in the material.";
        return;
      }
      for (const excerpt of excerpts) {
        const hit = document.createElement("button");
        hit.type = "button";
        hit.className = "locate-hit";
        hit.textContent = `…${excerpt.text}… (${excerpt.anchor})`;
        hit.addEventListener("click", () => callbacks.onJump(excerpt.anchor));
        results.appendChild(hit);
      }
    });
  });

  root.append(toggle, finder, nav, body);
}

/** Scroll the viewport to a section; jsdom lacks scrollIntoView, so guard.
 * Anchors are slugs ([a-z0-9-]), safe to splice into a selector directly.
 */
export function jumpToAnchor(root: HTMLElement, anchor: string, state: ViewState): void {
  state.lastJumpAnchor = anchor;
  const target = root.querySelector<HTMLElement>(`#section-${anchor}`);
  if (!target) return;
  root.querySelectorAll(".jump-target").forEach((el) => el.classList.remove("jump-target"));
  target.classList.add("jump-target");
  target.scrollIntoView?.({ block: "start" });
}
