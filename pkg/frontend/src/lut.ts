// LUT model shared by the curve editors: ordered control points on [0,1]^2,
// x strictly increasing, endpoints pinned at x=0 and x=1. All drag handling
// funnels through clampDrag so a widget can only ever emit valid LUTs.

export interface LutPoint {
    x: number;
    y: number;
}

export type Lut = LutPoint[];

// minimum x spacing between neighboring control points
export const MIN_GAP = 0.01;

export function identityLut(): Lut {
    return [{ x: 0, y: 0 }, { x: 1, y: 1 }];
}

export function cloneLut(lut: Lut): Lut {
    return lut.map(p => ({ x: p.x, y: p.y }));
}

export function isValidLut(lut: Lut): boolean {
    if (lut.length < 2) return false;
    if (lut[0].x !== 0 || lut[lut.length - 1].x !== 1) return false;
    for (let i = 0; i < lut.length; i++) {
        const { x, y } = lut[i];
        if (!Number.isFinite(x) || !Number.isFinite(y)) return false;
        if (y < 0 || y > 1) return false;
        if (i > 0 && x <= lut[i - 1].x) return false;
    }
    return true;
}

export function isIdentity(lut: Lut): boolean {
    return lut.length === 2 && lut[0].x === 0 && lut[0].y === 0
        && lut[1].x === 1 && lut[1].y === 1;
}

// Clamp a drag of point `index` toward (nx, ny): endpoints keep their x,
// interior points stay strictly between their neighbors, y stays in [0,1].
export function clampDrag(lut: Lut, index: number, nx: number, ny: number): LutPoint {
    const y = Math.min(1, Math.max(0, ny));
    if (index === 0) return { x: 0, y };
    if (index === lut.length - 1) return { x: 1, y };
    const lo = lut[index - 1].x + MIN_GAP;
    const hi = lut[index + 1].x - MIN_GAP;
    const x = Math.min(hi, Math.max(lo, nx));
    return { x, y };
}

export function movePoint(lut: Lut, index: number, nx: number, ny: number): Lut {
    const out = cloneLut(lut);
    out[index] = clampDrag(lut, index, nx, ny);
    return out;
}

// Insert a point at x (clamped away from existing neighbors); returns the
// new LUT and the inserted index, or null when there is no room.
export function insertPoint(lut: Lut, x: number, y: number): { lut: Lut; index: number } | null {
    if (x <= 0 || x >= 1) return null;
    let index = lut.findIndex(p => p.x > x);
    if (index <= 0) index = lut.length - 1;
    const lo = lut[index - 1].x + MIN_GAP;
    const hi = lut[index].x - MIN_GAP;
    if (lo > hi) return null;
    const px = Math.min(hi, Math.max(lo, x));
    const py = Math.min(1, Math.max(0, y));
    const out = cloneLut(lut);
    out.splice(index, 0, { x: px, y: py });
    return { lut: out, index };
}

export function removePoint(lut: Lut, index: number): Lut | null {
    if (index <= 0 || index >= lut.length - 1) return null;  // endpoints stay
    const out = cloneLut(lut);
    out.splice(index, 1);
    return out;
}

// Piecewise-linear evaluation with input clamped to [0,1].
export function evalLut(lut: Lut, v: number): number {
    const x = Math.min(1, Math.max(0, v));
    for (let i = 1; i < lut.length; i++) {
        if (x <= lut[i].x) {
            const a = lut[i - 1];
            const b = lut[i];
            const t = (x - a.x) / (b.x - a.x);
            return a.y + t * (b.y - a.y);
        }
    }
    return lut[lut.length - 1].y;
}

export function lutToJson(lut: Lut): [number, number][] {
    return lut.map(p => [p.x, p.y]);
}

export function lutFromJson(points: [number, number][]): Lut {
    return points.map(([x, y]) => ({ x, y }));
}
