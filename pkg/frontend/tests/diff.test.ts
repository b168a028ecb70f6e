import { describe, expect, it } from "vitest";

import { changedOnly, diffReports } from "../src/diff";
import type { StructuredReport } from "../src/types";

function report(sections: Array<[string, string, boolean]>): StructuredReport {
  return {
    sections: sections.map(([region_name, text, abnormal]) => ({
      region_name,
      text,
      abnormal,
    })),
    context_summary: null,
    raw_text: "",
    unstructured: false,
  };
}

describe("diffReports", () => {
  it("identical reports produce an empty visible diff", () => {
    const a = report([["spine", "intact .", false], ["right lung", "clear .", false]]);
    const diffs = diffReports(a, a);
    expect(changedOnly(diffs)).toHaveLength(0);
    expect(diffs.every((d) => d.kind === "unchanged")).toBe(true);
  });

  it("a section missing from b is one removal", () => {
    const a = report([["spine", "intact .", false], ["right lung", "clear .", false]]);
    const b = report([["right lung", "clear .", false]]);
    const visible = changedOnly(diffReports(a, b));
    expect(visible).toHaveLength(1);
    expect(visible[0]).toMatchObject({ region: "spine", kind: "removed" });
  });

  it("a section only in b is an addition", () => {
    const a = report([["spine", "intact .", false]]);
    const b = report([["spine", "intact .", false], ["abdomen", "tube noted .", false]]);
    const visible = changedOnly(diffReports(a, b));
    expect(visible).toEqual([
      expect.objectContaining({ region: "abdomen", kind: "added" }),
    ]);
  });

  it("abnormal flag flip badges the region", () => {
    const a = report([["spine", "intact .", false]]);
    const b = report([["spine", "intact .", true]]);
    const diffs = diffReports(a, b);
    expect(diffs[0].kind).toBe("changed");
    expect(diffs[0].abnormalChanged).toBe(true);
  });

  it("text edits are changes without the abnormal badge", () => {
    const a = report([["spine", "intact .", false]]);
    const b = report([["spine", "degenerative change .", false]]);
    const diffs = diffReports(a, b);
    expect(diffs[0].kind).toBe("changed");
    expect(diffs[0].abnormalChanged).toBe(false);
  });
});
