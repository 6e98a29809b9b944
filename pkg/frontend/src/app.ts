/**
 * Static-page wiring: pick a bundle directory, review each operation
 * with the three comparison modes, record verdicts, export verdicts.json.
 * No backend; everything stays in the browser.
 */
import { buildComparison, CompareMode, COMPARE_MODES, highlightRefs } from "./compare.js";
import {
  BundleFiles,
  LoadedBundle,
  ReviewSession,
  loadBundle,
} from "./session.js";

interface UiState {
  bundle: LoadedBundle;
  session: ReviewSession;
  controls: Map<string, number>; // per-operation slider value 0..1
  highlight: boolean;
}

let ui: UiState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

async function filesFromInput(input: HTMLInputElement): Promise<BundleFiles> {
  const files = new Map<string, string>();
  const list = input.files ? Array.from(input.files) : [];
  for (const file of list) {
    const rel = (file as File & { webkitRelativePath?: string }).webkitRelativePath || file.name;
    const inBundle = rel.split("/").slice(1).join("/") || rel;
    files.set(inBundle, await file.text());
  }
  return files;
}

function render(): void {
  if (ui === null) return;
  const { bundle, session } = ui;
  el<HTMLElement>("bundle-meta").textContent =
    `${bundle.manifest.figure_info.figure_number} · ` +
    `${bundle.manifest.figure_info.iteration_version} · ` +
    `${bundle.operations.length} operation(s) · reviewer ${session.reviewer.name} (${session.reviewer.role})`;

  const scoreBox = el<HTMLElement>("score-panel");
  const score = bundle.manifest.assessment_info.final_score;
  scoreBox.querySelector("pre")!.textContent = JSON.stringify(score, null, 2);

  const cards = el<HTMLElement>("cards");
  cards.innerHTML = "";
  for (const op of bundle.operations) {
    const card = document.createElement("section");
    card.className = "card";
    const draft = session.draft(op.entry.id);
    const errors = op.diff.findings.filter((f) => f.severity === "error").length;
    const control = ui.controls.get(op.entry.id) ?? 0.5;
    const highlights = ui.highlight ? highlightRefs(op.diff) : undefined;
    const composite = buildComparison(
      session.activeMode, op.beforeSvg, op.afterSvg, control, highlights,
    );
    card.innerHTML = `
      <header>
        <h2>${op.entry.id}</h2>
        <code>${escapeHtml(op.entry.message)}</code>
        <span class="badges">
          <span class="badge ${errors ? "bad" : "ok"}">${errors ? `${errors} lint error(s)` : "lint clean"}</span>
          <span class="badge">fidelity: ${op.diff.fidelity.status}</span>
          <span class="badge ${draft ? (draft.decision === "approve" ? "ok" : "bad") : ""}">
            ${draft ? draft.decision : "no verdict"}
          </span>
        </span>
      </header>
      <div class="viewer">${composite}</div>
      <div class="viewer-controls">
        <label>${session.activeMode === "onion-skin" ? "opacity" : "boundary"}
          <input type="range" min="0" max="100" value="${Math.round(control * 100)}"
                 data-op="${op.entry.id}" class="control-slider"
                 ${session.activeMode === "two-up" ? "disabled" : ""}/>
        </label>
      </div>
      <details>
        <summary>${op.diff.changes.length} change(s), ${op.diff.findings.length} finding(s)</summary>
        <pre>${escapeHtml(JSON.stringify({ changes: op.diff.changes, findings: op.diff.findings }, null, 2))}</pre>
      </details>
      <div class="verdict">
        <button data-op="${op.entry.id}" data-decision="approve">approve</button>
        <button data-op="${op.entry.id}" data-decision="reject">reject</button>
        <input type="text" placeholder="comment (required to reject)" data-comment="${op.entry.id}"
               value="${escapeHtml(draft?.comment ?? "")}"/>
      </div>`;
    cards.appendChild(card);
  }

  for (const button of cards.querySelectorAll<HTMLButtonElement>(".verdict button")) {
    button.addEventListener("click", () => {
      const opId = button.dataset.op!;
      const decision = button.dataset.decision as "approve" | "reject";
      const comment = cards.querySelector<HTMLInputElement>(`[data-comment="${opId}"]`)!.value;
      try {
        session.recordVerdict(opId, decision, comment);
      } catch (err) {
        alert((err as Error).message);
      }
      render();
    });
  }
  for (const slider of cards.querySelectorAll<HTMLInputElement>(".control-slider")) {
    slider.addEventListener("input", () => {
      ui!.controls.set(slider.dataset.op!, Number(slider.value) / 100);
      render();
    });
  }
  el<HTMLElement>("draft-count").textContent = `${session.draftCount()} draft verdict(s)`;
}

function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function boot(): void {
  el<HTMLInputElement>("bundle-input").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const files = await filesFromInput(input);
    try {
      const bundle = loadBundle(files);
      const name = el<HTMLInputElement>("reviewer-name").value.trim() || "anonymous";
      const role = el<HTMLSelectElement>("reviewer-role").value as "climate" | "visualization";
      const session = new ReviewSession(bundle, { name, role }, window.localStorage);
      ui = { bundle, session, controls: new Map(), highlight: true };
      render();
    } catch (err) {
      el<HTMLElement>("bundle-meta").textContent = `cannot load bundle: ${(err as Error).message}`;
    }
  });

  const tabs = el<HTMLElement>("mode-tabs");
  for (const mode of COMPARE_MODES) {
    const button = document.createElement("button");
    button.textContent = mode;
    button.addEventListener("click", () => {
      ui?.session.setMode(mode as CompareMode);
      render();
    });
    tabs.appendChild(button);
  }

  el<HTMLInputElement>("highlight-toggle").addEventListener("change", (event) => {
    if (ui) {
      ui.highlight = (event.target as HTMLInputElement).checked;
      render();
    }
  });

  el<HTMLElement>("score-panel").addEventListener("toggle", (event) => {
    if ((event.target as HTMLDetailsElement).open) ui?.session.logScorePanelOpened();
  });

  el<HTMLButtonElement>("export-button").addEventListener("click", () => {
    if (ui === null) return;
    try {
      const payload = ui.session.exportVerdicts();
      const blob = new Blob([payload], { type: "application/json" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "verdicts.json";
      link.click();
      URL.revokeObjectURL(link.href);
    } catch (err) {
      alert((err as Error).message);
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("bundle-input") !== null) {
  boot();
}
