import { readdirSync, readFileSync, statSync } from "node:fs";
import { join, relative } from "node:path";
import { fileURLToPath } from "node:url";

import type { BundleFiles } from "../src/session.js";

export const FIXTURES_DIR = fileURLToPath(new URL("./fixtures", import.meta.url));
export const BUNDLE_DIR = join(FIXTURES_DIR, "bundle");

export function readBundleFiles(dir: string = BUNDLE_DIR): BundleFiles {
  const files = new Map<string, string>();
  const walk = (current: string): void => {
    for (const name of readdirSync(current)) {
      const full = join(current, name);
      if (statSync(full).isDirectory()) walk(full);
      else files.set(relative(dir, full).split("\\").join("/"), readFileSync(full, "utf-8"));
    }
  };
  walk(dir);
  return files;
}
