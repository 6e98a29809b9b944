/**
 * Full loop with the pipeline: record verdicts in a session, export,
 * feed the file to `figchain verdicts merge`, and check the decision.
 */
import { execFileSync } from "node:child_process";
import { cpSync, mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewSession, loadBundle } from "../src/session.js";
import { BUNDLE_DIR, readBundleFiles } from "./helpers.js";

let workDir: string;

beforeAll(() => {
  workDir = mkdtempSync(join(tmpdir(), "figchain-ui-"));
  cpSync(BUNDLE_DIR, join(workDir, "bundle"), { recursive: true });
});

afterAll(() => {
  rmSync(workDir, { recursive: true, force: true });
});

function mergeVerdicts(file: string): { merged: number; decision: { status: string; reasons: string[] } } {
  const stdout = execFileSync(
    "python3",
    ["-m", "figchain.cli", "verdicts", "merge", file, "--bundle", join(workDir, "bundle")],
    { encoding: "utf-8" },
  );
  return JSON.parse(stdout);
}

describe("verdict export round trip", () => {
  it("merge accepts the export and the rejection forces a revision", () => {
    const session = new ReviewSession(
      loadBundle(readBundleFiles()),
      { name: "Dr. Climate", role: "climate" },
    );
    for (const id of ["Op1", "Op2", "Op4", "Op5"]) session.recordVerdict(id, "approve");
    session.recordVerdict("Op3", "reject", "removing the stroke hides the legend grouping");

    const exported = session.exportVerdicts();
    const file = join(workDir, "verdicts.json");
    writeFileSync(file, exported);

    const result = mergeVerdicts(file);
    expect(result.merged).toBe(5);
    expect(result.decision.status).toBe("needs-revision");
    expect(result.decision.reasons.join(" ")).toContain("Op3");
  });

  it("a later climate approval cannot outvote the standing rejection", () => {
    const followup = [
      {
        operation_id: "Op3",
        decision: "approve",
        reviewer: { name: "Second Reviewer", role: "climate" },
        comment: "",
        timestamp: new Date().toISOString(),
      },
    ];
    const file = join(workDir, "more-verdicts.json");
    writeFileSync(file, JSON.stringify(followup));
    const result = mergeVerdicts(file);
    expect(result.decision.status).toBe("needs-revision");
  });
});
