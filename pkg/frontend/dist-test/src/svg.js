/** Hand-written SVG output for a PlotModel (no DOM, deterministic bytes). */
import { FRAME, fmtTick, makeMapper } from "./plot.js";
const BG = "#ffffff";
const FG = "#222222";
const GRID = "#dddddd";
function esc(s) {
    return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
function r2(v) {
    return (Math.round(v * 100) / 100).toFixed(2);
}
export function renderSvg(model) {
    const f = FRAME;
    const m = makeMapper(model);
    const out = [];
    out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${f.width}" height="${f.height}" viewBox="0 0 ${f.width} ${f.height}" font-family="Helvetica,Arial,sans-serif">`);
    out.push(`<rect width="${f.width}" height="${f.height}" fill="${BG}"/>`);
    // grid and ticks
    for (const t of m.xTicks) {
        const x = r2(m.sx(t));
        out.push(`<line x1="${x}" y1="${f.top}" x2="${x}" y2="${f.height - f.bottom}" stroke="${GRID}"/>`);
        out.push(`<text x="${x}" y="${f.height - f.bottom + 18}" font-size="11" fill="${FG}" text-anchor="middle">${fmtTick(t)}</text>`);
    }
    for (const t of m.yTicks) {
        const y = r2(m.sy(t));
        out.push(`<line x1="${f.left}" y1="${y}" x2="${f.width - f.right}" y2="${y}" stroke="${GRID}"/>`);
        out.push(`<text x="${f.left - 6}" y="${y}" font-size="11" fill="${FG}" text-anchor="end" dominant-baseline="middle">${fmtTick(t)}</text>`);
    }
    out.push(`<rect x="${f.left}" y="${f.top}" width="${f.width - f.left - f.right}" height="${f.height - f.top - f.bottom}" fill="none" stroke="${FG}"/>`);
    // series
    for (const s of model.series) {
        const pts = [];
        for (let i = 0; i < s.x.length; i++) {
            const vx = s.x[i];
            const vy = s.y[i];
            if (!Number.isFinite(vx) || !Number.isFinite(vy))
                continue;
            if (model.logX && vx <= 0)
                continue;
            if (model.logY && vy <= 0)
                continue;
            pts.push([m.sx(vx), m.sy(vy)]);
        }
        if (s.kind === "line" && pts.length > 1) {
            const d = pts.map(([x, y]) => `${r2(x)},${r2(y)}`).join(" ");
            const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
            out.push(`<polyline points="${d}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash}/>`);
        }
        else {
            for (const [x, y] of pts) {
                out.push(`<circle cx="${r2(x)}" cy="${r2(y)}" r="2.2" fill="${s.color}"/>`);
            }
        }
    }
    // labels and legend
    out.push(`<text x="${f.width / 2}" y="22" font-size="14" fill="${FG}" text-anchor="middle">${esc(model.title)}</text>`);
    out.push(`<text x="${f.width / 2}" y="${f.height - 14}" font-size="12" fill="${FG}" text-anchor="middle">${esc(model.xLabel)}</text>`);
    out.push(`<text x="18" y="${f.height / 2}" font-size="12" fill="${FG}" text-anchor="middle" transform="rotate(-90 18 ${f.height / 2})">${esc(model.yLabel)}</text>`);
    let ly = f.top + 14;
    for (const s of model.series) {
        const lx = f.width - f.right - 170;
        out.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 24}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`);
        out.push(`<text x="${lx + 30}" y="${ly}" font-size="11" fill="${FG}">${esc(s.label)}</text>`);
        ly += 16;
    }
    out.push("</svg>");
    return out.join("\n") + "\n";
}
