/**
 * Strict CSV loading for the run outputs.
 *
 * Each figure kind documents the exact header it consumes; anything else is
 * refused up front so a schema drift in the producer fails loudly here.
 */
import { readFileSync } from "fs";
export class SchemaError extends Error {
}
export function parseCsv(text) {
    const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
    if (lines.length === 0) {
        throw new SchemaError("empty file: no header row");
    }
    const header = lines[0].split(",").map((h) => h.trim());
    const rows = lines.slice(1).map((line) => line.split(",").map((cell) => {
        const v = Number(cell);
        return Number.isFinite(v) && cell.trim() !== "" ? v : cell.trim();
    }));
    return { header, rows };
}
export function loadCsv(path) {
    return parseCsv(readFileSync(path, "utf-8"));
}
/** Require the header to match exactly (order included). */
export function requireHeader(table, expected, what) {
    const got = table.header.join(",");
    const want = expected.join(",");
    if (got !== want) {
        throw new SchemaError(`${what}: header "${got}" does not match "${want}"`);
    }
}
/** Require the header to start with the expected prefix columns. */
export function requirePrefix(table, expected, what) {
    const got = table.header.slice(0, expected.length).join(",");
    if (got !== expected.join(",")) {
        throw new SchemaError(`${what}: header prefix "${got}" does not match "${expected.join(",")}"`);
    }
}
export function column(table, name) {
    const idx = table.header.indexOf(name);
    if (idx < 0) {
        throw new SchemaError(`missing column ${name}`);
    }
    return table.rows.map((r) => {
        const v = r[idx];
        if (typeof v !== "number") {
            throw new SchemaError(`non-numeric cell in column ${name}: ${v}`);
        }
        return v;
    });
}
export function textColumn(table, name) {
    const idx = table.header.indexOf(name);
    if (idx < 0) {
        throw new SchemaError(`missing column ${name}`);
    }
    return table.rows.map((r) => String(r[idx]));
}
