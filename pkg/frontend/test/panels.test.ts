// The EU panel shows service strings byte for byte; recorded fixtures are
// asserted against the live service by the backend test suite.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { entryDisplay, configKey, tightBlocks } from "../src/state";
import type { EvaluateResponse, PolicyTableResponse } from "../src/types";

function fixture<T>(name: string): T {
  const path = join(__dirname, "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

describe("complete elicitation panel", () => {
  const evaluation = fixture<EvaluateResponse>("evaluate_complete.json");

  it("displays the four stage-5 values exactly as the service sends them", () => {
    const shown = new Map(
      evaluation.entries.map((e) => [configKey(e.config), entryDisplay(e)]),
    );
    expect(shown.get("Y4=1,Y3=1")).toBe("0.307424");
    expect(shown.get("Y4=0,Y3=1")).toBe("0.375504");
    expect(shown.get("Y4=1,Y3=0")).toBe("0.446464");
    expect(shown.get("Y4=0,Y3=0")).toBe("0.446016");
  });

  it("flags the tight margin at y3 = 0", () => {
    const table = fixture<PolicyTableResponse>("policy_table_complete.json");
    const tight = tightBlocks(table.rows, 0.001);
    expect(tight).toHaveLength(1);
    expect(tight[0].block).toEqual({ Y3: 0 });
    expect(tight[0].margin).toBe("0.000448");
  });
});

describe("partial elicitation panel", () => {
  const evaluation = fixture<EvaluateResponse>("evaluate_partial.json");

  it("switches freed entries to polynomial text", () => {
    const byConfig = new Map(
      evaluation.entries.map((e) => [configKey(e.config), e]),
    );
    const quad = byConfig.get("Y4=1,Y3=1")!;
    expect(quad.value).toBeNull();
    expect(entryDisplay(quad)).toContain("p5111^2");
    expect(entryDisplay(quad)).toContain("psi301");
  });
});
