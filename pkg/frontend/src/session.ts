/**
 * Review session over a loaded bundle: per-operation verdict drafts,
 * comparison-mode state, and the verdicts.json export consumed by the
 * pipeline's merge command. Drafts persist through a storage interface
 * (localStorage in the page, anything map-like in tests) so they
 * survive page reloads; the session never mutates bundled figures.
 */
import {
  DiffDocument,
  Manifest,
  OperationEntry,
  ReviewerRole,
  Verdict,
  diffDocumentSchema,
  manifestSchema,
  verdictsFileSchema,
} from "./schema.js";
import { COMPARE_MODES, CompareMode } from "./compare.js";

export class BundleSchemaError extends Error {}
export class MissingSvg extends Error {
  constructor(readonly operationId: string, file: string) {
    super(`${operationId}: bundle is missing ${file}`);
  }
}
export class MissingComment extends Error {}
export class UnknownOperation extends Error {}

/** Bundle contents keyed by path relative to the bundle root. */
export type BundleFiles = ReadonlyMap<string, string>;

export interface LoadedOperation {
  entry: OperationEntry;
  beforeSvg: string;
  afterSvg: string;
  diff: DiffDocument;
}

export interface LoadedBundle {
  id: string;
  manifest: Manifest;
  operations: LoadedOperation[];
}

export function loadBundle(files: BundleFiles): LoadedBundle {
  const manifestRaw = files.get("manifest.json");
  if (manifestRaw === undefined) {
    throw new BundleSchemaError("not a reviewer bundle: manifest.json is missing");
  }
  let manifest: Manifest;
  try {
    manifest = manifestSchema.parse(JSON.parse(manifestRaw));
  } catch (err) {
    throw new BundleSchemaError(`manifest.json is invalid: ${(err as Error).message}`);
  }
  const operations: LoadedOperation[] = [];
  for (const entry of manifest.operations) {
    const beforeSvg = files.get(entry.before_svg);
    if (beforeSvg === undefined) throw new MissingSvg(entry.id, entry.before_svg);
    const afterSvg = files.get(entry.after_svg);
    if (afterSvg === undefined) throw new MissingSvg(entry.id, entry.after_svg);
    const diffRaw = files.get(`${entry.id.toLowerCase()}/diff.json`);
    let diff: DiffDocument;
    if (diffRaw === undefined) {
      diff = { changes: entry.changes, fidelity: fallbackFidelity(), findings: entry.findings };
    } else {
      try {
        diff = diffDocumentSchema.parse(JSON.parse(diffRaw));
      } catch (err) {
        throw new BundleSchemaError(
          `${entry.id}: diff.json is invalid: ${(err as Error).message}`,
        );
      }
    }
    operations.push({ entry, beforeSvg, afterSvg, diff });
  }
  const ordered = manifest.operations.map((op) => op.id).join(",");
  const expected = manifest.operations.map((_op, k) => `Op${k + 1}`).join(",");
  if (ordered !== expected) {
    throw new BundleSchemaError(`operations must be dense Op1..OpN in order, got ${ordered}`);
  }
  return {
    id: `${manifest.figure_info.figure_number}:${manifest.figure_info.iteration_version}`,
    manifest,
    operations,
  };
}

function fallbackFidelity(): DiffDocument["fidelity"] {
  return {
    status: "no-marks",
    mark_changes: [],
    fitted_transform: null,
    residual: 0,
    declared_transforms: [],
  };
}

export interface ReviewerIdentity {
  name: string;
  role: ReviewerRole;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

interface VerdictDraft {
  decision: "approve" | "reject";
  comment: string;
  timestamp: string;
}

interface PersistedState {
  drafts: Record<string, VerdictDraft>;
  activeMode: CompareMode;
  scorePanelOpened: boolean;
}

export class MemoryStorage implements StorageLike {
  private readonly map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
}

export class ReviewSession {
  private state: PersistedState;

  constructor(
    readonly bundle: LoadedBundle,
    readonly reviewer: ReviewerIdentity,
    private readonly storage: StorageLike = new MemoryStorage(),
    private readonly clock: () => string = () => new Date().toISOString(),
  ) {
    this.state = this.restore();
  }

  private get storageKey(): string {
    return `figchain-review:${this.bundle.id}:${this.reviewer.name}:${this.reviewer.role}`;
  }

  private restore(): PersistedState {
    const raw = this.storage.getItem(this.storageKey);
    if (raw !== null) {
      try {
        const parsed = JSON.parse(raw) as PersistedState;
        if (parsed && typeof parsed === "object" && parsed.drafts) return parsed;
      } catch {
        // fall through to a clean state
      }
    }
    return { drafts: {}, activeMode: "two-up", scorePanelOpened: false };
  }

  private persist(): void {
    this.storage.setItem(this.storageKey, JSON.stringify(this.state));
  }

  get activeMode(): CompareMode {
    return this.state.activeMode;
  }

  setMode(mode: CompareMode): void {
    if (!COMPARE_MODES.includes(mode)) throw new Error(`unknown comparison mode ${mode}`);
    this.state.activeMode = mode;
    this.persist();
  }

  get scorePanelOpened(): boolean {
    return this.state.scorePanelOpened;
  }

  /** Assessment scores start collapsed; opening them is recorded. */
  logScorePanelOpened(): void {
    this.state.scorePanelOpened = true;
    this.persist();
  }

  draft(operationId: string): VerdictDraft | null {
    return this.state.drafts[operationId] ?? null;
  }

  recordVerdict(operationId: string, decision: "approve" | "reject", comment = ""): void {
    if (!this.bundle.operations.some((op) => op.entry.id === operationId)) {
      throw new UnknownOperation(`no operation ${operationId} in this bundle`);
    }
    if (decision === "reject" && comment.trim().length === 0) {
      throw new MissingComment(`rejecting ${operationId} requires a comment`);
    }
    this.state.drafts[operationId] = { decision, comment, timestamp: this.clock() };
    this.persist();
  }

  draftCount(): number {
    return Object.keys(this.state.drafts).length;
  }

  exportVerdicts(): string {
    const verdicts: Verdict[] = Object.entries(this.state.drafts)
      .sort(([a], [b]) => Number(a.slice(2)) - Number(b.slice(2)))
      .map(([operationId, draft]) => ({
        operation_id: operationId,
        decision: draft.decision,
        reviewer: { name: this.reviewer.name, role: this.reviewer.role },
        comment: draft.comment,
        timestamp: draft.timestamp,
      }));
    return JSON.stringify(verdictsFileSchema.parse(verdicts), null, 2) + "\n";
  }
}
