import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, it } from "node:test";
import assert from "node:assert/strict";
import { inflateSync } from "zlib";
import { SchemaError, parseCsv } from "../src/csv.js";
import { DIAGNOSTICS_HEADER, buildFigure } from "../src/figures.js";
import { makeMapper } from "../src/plot.js";
import { renderPng } from "../src/png.js";
import { renderSvg } from "../src/svg.js";
import { main } from "../src/render.js";
const DIAG_CSV = [
    DIAGNOSTICS_HEADER.join(","),
    "2,0.0177,0.025,0.025,0.0024,0.0048,0",
    "4,0.0177,0.025,0.027,0.0012,0.0048,1.2e-05",
    "8,0.0177,0.025,0.031,0.0006,0.0048,8.0e-06",
].join("\n");
const REPORT_CSV = [
    "t,piece,norm_name,value,envelope,quotient",
    "2,g,l2_f,0,7.07e-05,0",
    "4,g,l2_f,2e-05,5e-05,0.4",
    "8,g,l2_f,1.5e-05,3.5e-05,0.42",
    "2,h,l2_xf,0,1e-04,0",
].join("\n");
const SCATTER_CSV = [
    "x0,x1,x2,x3,abs_phase,abs_grad,classification",
    "0,0,0,0,0,0,R",
    "1,0,0.5,0,0,0.1,T",
    "2,0,1,0,0.3,0,S",
].join("\n");
describe("figure models", () => {
    it("decay figure picks the decay column", () => {
        const model = buildFigure(parseCsv(DIAG_CSV), {
            kind: "decay", input: "x", output: "y",
        });
        assert.equal(model.series.length, 1);
        assert.deepEqual(model.series[0].y, [0.0048, 0.0048, 0.0048]);
    });
    it("cauchy figure defaults to log y", () => {
        const model = buildFigure(parseCsv(DIAG_CSV), {
            kind: "cauchy", input: "x", output: "y",
        });
        assert.equal(model.logY, true);
    });
    it("envelope figure filters piece and norm and overlays the envelope", () => {
        const model = buildFigure(parseCsv(REPORT_CSV), {
            kind: "envelope", input: "x", output: "y", piece: "g", norm: "l2_f",
        });
        assert.equal(model.series.length, 2);
        assert.deepEqual(model.series[0].x, [2, 4, 8]);
        assert.equal(model.series[1].label, "envelope");
        assert.ok(model.series[1].dash);
    });
    it("envelope figure refuses absent series", () => {
        assert.throws(() => buildFigure(parseCsv(REPORT_CSV), {
            kind: "envelope", input: "x", output: "y", piece: "h", norm: "linf_u",
        }), SchemaError);
    });
    it("scatter classifies by the last column", () => {
        const model = buildFigure(parseCsv(SCATTER_CSV), {
            kind: "resonant-scatter", input: "x", output: "y", axes: [0, 2],
        });
        const r = model.series.find((s) => s.label === "R");
        assert.deepEqual(r.x, [0]);
        assert.deepEqual(r.y, [0]);
    });
    it("refuses a wrong header", () => {
        assert.throws(() => buildFigure(parseCsv("a,b,c\n1,2,3"), {
            kind: "decay", input: "x", output: "y",
        }), SchemaError);
    });
});
describe("scales", () => {
    it("maps data corners onto the frame", () => {
        const model = buildFigure(parseCsv(DIAG_CSV), {
            kind: "decay", input: "x", output: "y",
        });
        const m = makeMapper(model);
        assert.ok(Math.abs(m.sx(m.xRange[0]) - 72) < 1e-9);
        assert.ok(Math.abs(m.sx(m.xRange[1]) - (800 - 24)) < 1e-9);
    });
    it("handles an empty table without NaNs", () => {
        const empty = parseCsv(DIAGNOSTICS_HEADER.join(","));
        const model = buildFigure(empty, { kind: "decay", input: "x", output: "y" });
        const m = makeMapper(model);
        assert.ok(Number.isFinite(m.sx(0.5)));
        assert.match(renderSvg(model), /<svg/);
    });
});
describe("outputs", () => {
    it("svg bytes are deterministic and contain the series", () => {
        const model = buildFigure(parseCsv(DIAG_CSV), {
            kind: "decay", input: "x", output: "y",
        });
        const a = renderSvg(model);
        assert.equal(a, renderSvg(model));
        assert.match(a, /polyline/);
    });
    it("png bytes are deterministic and carry the signature", () => {
        const model = buildFigure(parseCsv(SCATTER_CSV), {
            kind: "resonant-scatter", input: "x", output: "y",
        });
        const a = renderPng(model);
        assert.equal(Buffer.compare(a, renderPng(model)), 0);
        assert.deepEqual([...a.subarray(0, 8)], [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    });
    it("zlib stream decompresses back to the raster", () => {
        const model = buildFigure(parseCsv(DIAG_CSV), {
            kind: "decay", input: "x", output: "y",
        });
        const png = renderPng(model);
        const idatLen = png.readUInt32BE(33);
        assert.equal(png.subarray(37, 41).toString("latin1"), "IDAT");
        const raw = inflateSync(png.subarray(41, 41 + idatLen));
        assert.equal(raw.length, 520 * (1 + 800 * 3));
    });
});
describe("cli", () => {
    it("renders both files from flags and exits 0", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        const csv = join(dir, "diag.csv");
        writeFileSync(csv, DIAG_CSV);
        const out = join(dir, "decay");
        assert.equal(main(["--kind", "decay", "--input", csv, "--output", out]), 0);
        assert.match(readFileSync(`${out}.svg`, "utf-8"), /<\/svg>/);
        assert.ok(readFileSync(`${out}.png`).length > 500);
    });
    it("empty csv with a valid header renders empty axes, exit 0", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        const csv = join(dir, "empty.csv");
        writeFileSync(csv, DIAGNOSTICS_HEADER.join(",") + "\n");
        assert.equal(main(["--kind", "cauchy", "--input", csv, "--output", join(dir, "c")]), 0);
    });
    it("schema mismatch exits 1", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        const csv = join(dir, "bad.csv");
        writeFileSync(csv, "a,b\n1,2\n");
        assert.equal(main(["--kind", "decay", "--input", csv, "--output", join(dir, "x")]), 1);
    });
    it("missing input exits 1; missing flags exit 2", () => {
        assert.equal(main(["--kind", "decay", "--input", "/nope.csv", "--output", "/tmp/x"]), 1);
        assert.equal(main(["--kind", "decay"]), 2);
    });
    it("spec file drives multiple figures", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        writeFileSync(join(dir, "diag.csv"), DIAG_CSV);
        writeFileSync(join(dir, "report.csv"), REPORT_CSV);
        const spec = [
            { kind: "decay", input: join(dir, "diag.csv"), output: join(dir, "f1") },
            { kind: "envelope", input: join(dir, "report.csv"), output: join(dir, "f2") },
        ];
        writeFileSync(join(dir, "spec.json"), JSON.stringify(spec));
        assert.equal(main(["--spec", join(dir, "spec.json")]), 0);
        assert.match(readFileSync(join(dir, "f2.svg"), "utf-8"), /envelope/);
    });
});
