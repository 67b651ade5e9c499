/**
 * The four figure kinds, each consuming one documented CSV schema:
 *
 *   decay            diagnostics.csv   t_linf_u against t
 *   cauchy           diagnostics.csv   cauchy_inc against t (log y)
 *   envelope         norm_report.csv   value and its a-priori envelope vs t
 *   resonant-scatter resonance_*.csv   classified frequency-cloud projection
 */
import { SchemaError, column, requireHeader, requirePrefix, textColumn } from "./csv.js";
export const DIAGNOSTICS_HEADER = [
    "t", "l2_f", "l2_xf", "l2_x2f", "linf_u", "t_linf_u", "cauchy_inc",
];
export const REPORT_HEADER = ["t", "piece", "norm_name", "value", "envelope", "quotient"];
export function decayFigure(table, spec) {
    requireHeader(table, DIAGNOSTICS_HEADER, "decay figure");
    return {
        title: "dispersive decay: t * sup|u|",
        xLabel: "t",
        yLabel: "t * linf(u)",
        logX: spec.logX ?? false,
        logY: spec.logY ?? false,
        series: [
            {
                x: column(table, "t"),
                y: column(table, "t_linf_u"),
                color: "#1f77b4",
                label: "t*linf_u",
                kind: "line",
            },
        ],
    };
}
export function cauchyFigure(table, spec) {
    requireHeader(table, DIAGNOSTICS_HEADER, "cauchy figure");
    const t = column(table, "t");
    const inc = column(table, "cauchy_inc");
    return {
        title: "profile Cauchy increments",
        xLabel: "t",
        yLabel: "l2(f(t) - f(prev))",
        logX: spec.logX ?? false,
        logY: spec.logY ?? true,
        series: [
            { x: t, y: inc, color: "#d62728", label: "cauchy_inc", kind: "line" },
            { x: t, y: inc, color: "#d62728", label: "outputs", kind: "scatter" },
        ],
    };
}
export function envelopeFigure(table, spec) {
    requireHeader(table, REPORT_HEADER, "envelope figure");
    const piece = spec.piece ?? "g";
    const norm = spec.norm ?? "l2_f";
    const pieces = textColumn(table, "piece");
    const norms = textColumn(table, "norm_name");
    const t = column(table, "t");
    const value = column(table, "value");
    const env = column(table, "envelope");
    const keep = pieces.map((p, i) => p === piece && norms[i] === norm);
    const pick = (xs) => xs.filter((_, i) => keep[i]);
    if (!keep.some(Boolean)) {
        throw new SchemaError(`no rows for piece=${piece} norm=${norm}`);
    }
    return {
        title: `norm growth vs envelope: ${piece} ${norm}`,
        xLabel: "t",
        yLabel: norm,
        logX: spec.logX ?? false,
        logY: spec.logY ?? true,
        series: [
            { x: pick(t), y: pick(value), color: "#1f77b4", label: "measured", kind: "line" },
            { x: pick(t), y: pick(env), color: "#ff7f0e", label: "envelope", kind: "line", dash: "6 4" },
        ],
    };
}
const CLASS_COLORS = {
    S: "#2ca02c",
    T: "#1f77b4",
    R: "#d62728",
};
export function resonantScatterFigure(table, spec) {
    requirePrefix(table, ["x0", "x1"], "resonant scatter");
    const tail = table.header.slice(-3).join(",");
    if (tail !== "abs_phase,abs_grad,classification") {
        throw new SchemaError(`resonant scatter: unexpected trailing columns ${tail}`);
    }
    const [ax, ay] = spec.axes ?? [0, 1];
    for (const a of [ax, ay]) {
        if (!table.header.includes(`x${a}`)) {
            throw new SchemaError(`projection axis x${a} not present`);
        }
    }
    const xs = column(table, `x${ax}`);
    const ys = column(table, `x${ay}`);
    const cls = textColumn(table, "classification");
    const series = Object.entries(CLASS_COLORS)
        .map(([tag, color]) => ({
        x: xs.filter((_, i) => cls[i] === tag),
        y: ys.filter((_, i) => cls[i] === tag),
        color,
        label: tag,
        kind: "scatter",
    }))
        .filter((s) => s.x.length > 0 || s.label === "R");
    return {
        title: `resonant sets, (x${ax}, x${ay}) projection`,
        xLabel: `x${ax}`,
        yLabel: `x${ay}`,
        logX: false,
        logY: false,
        series,
    };
}
export function buildFigure(table, spec) {
    switch (spec.kind) {
        case "decay":
            return decayFigure(table, spec);
        case "cauchy":
            return cauchyFigure(table, spec);
        case "envelope":
            return envelopeFigure(table, spec);
        case "resonant-scatter":
            return resonantScatterFigure(table, spec);
        default:
            throw new SchemaError(`unknown figure kind ${spec.kind}`);
    }
}
