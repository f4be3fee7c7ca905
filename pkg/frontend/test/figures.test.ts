import { describe, expect, it } from "vitest";
import { mkdtempSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";

import { FIGURE_KINDS, renderFigure } from "../src/figures.js";
import { main } from "../src/cli.js";

const SAMPLES = path.join(__dirname, "..", "samples");

const INPUT_FOR: Record<string, string> = {
  density_loglog: path.join(SAMPLES, "critical"),
  survival_loglog: path.join(SAMPLES, "family"),
  spread_loglog: path.join(SAMPLES, "critical"),
  collapse: path.join(SAMPLES, "family"),
  otoc_heatmap: path.join(SAMPLES, "critical"),
  otoc_profile_collapse: path.join(SAMPLES, "family"),
  fidelity_vs_p: path.join(SAMPLES, "decode"),
  info_vs_t: path.join(SAMPLES, "decode"),
};

describe("figure kinds render from the shipped samples", () => {
  for (const kind of FIGURE_KINDS) {
    it(`renders ${kind}`, () => {
      const svg = renderFigure(kind, INPUT_FOR[kind]);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.length).toBeGreaterThan(2000);
      expect(svg).toContain("</svg>");
    });
  }
});

describe("figure semantics", () => {
  it("log-log figures carry decade gridlines", () => {
    const svg = renderFigure("density_loglog", INPUT_FOR.density_loglog);
    // decade ticks on the time axis: 1, 10, 100
    expect(svg).toContain(">10<");
    expect(svg).toContain(">100<");
    expect(svg).toContain(">0.02<"); // 1-2-5 ticks on the narrow density axis
  });

  it("density figure overlays the fitted power law when fit.csv is present", () => {
    const svg = renderFigure("density_loglog", INPUT_FOR.density_loglog);
    expect(svg).toContain("fit t^");
    expect(svg).toContain("stroke-dasharray");
  });

  it("collapse uses green below and purple above the critical point", () => {
    const svg = renderFigure("collapse", INPUT_FOR.collapse);
    expect(svg).toContain("#a1d99b"); // first green of the below palette
    expect(svg).toContain("#bcbddc"); // first purple of the above palette
    expect(svg).toContain("below p =");
    expect(svg).toContain("above p =");
  });

  it("heatmap announces its logarithmic color scale", () => {
    const svg = renderFigure("otoc_heatmap", INPUT_FOR.otoc_heatmap);
    expect(svg).toContain("log scale");
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(1000);
  });

  it("profile collapse draws one series per time slice", () => {
    const svg = renderFigure("otoc_profile_collapse", INPUT_FOR.otoc_profile_collapse);
    expect((svg.match(/t = /g) ?? []).length).toBeGreaterThanOrEqual(3);
  });

  it("renders are deterministic", () => {
    const a = renderFigure("survival_loglog", INPUT_FOR.survival_loglog);
    const b = renderFigure("survival_loglog", INPUT_FOR.survival_loglog);
    expect(a).toBe(b);
  });

  it("rejects schema mismatches with a column-precise message", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "radperc-plot-"));
    writeFileSync(path.join(dir, "curves.csv"),
      "t,rho,rho_sem,P,P_sem,R2,R2_sem,front\n1,1,0,1,0,0,0,0\n");
    expect(() => renderFigure("density_loglog", dir))
      .toThrow(/column 9/);
  });
});

describe("cli", () => {
  it("writes an SVG file and exits 0", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "radperc-plot-out-"));
    const out = path.join(dir, "density.svg");
    const code = main(["density_loglog", "--input", INPUT_FOR.density_loglog,
                       "--output", out, "--style", "width=500,title=Density"]);
    expect(code).toBe(0);
    expect(statSync(out).size).toBeGreaterThan(2000);
  });

  it("rejects unknown kinds with exit 2", () => {
    expect(main(["starfield", "--input", ".", "--output", "x.svg"])).toBe(2);
  });

  it("fails cleanly on missing inputs with exit 1", () => {
    expect(main(["collapse", "--input", "/nonexistent", "--output",
                 "/tmp/never.svg"])).toBe(1);
  });
});
