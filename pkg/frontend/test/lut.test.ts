import { describe, expect, it } from "vitest";

import {
    MIN_GAP,
    clampDrag,
    evalLut,
    identityLut,
    insertPoint,
    isIdentity,
    isValidLut,
    movePoint,
    removePoint,
} from "../src/lut.js";

describe("lut model", () => {
    it("identity is valid and renders the diagonal", () => {
        const lut = identityLut();
        expect(isValidLut(lut)).toBe(true);
        expect(isIdentity(lut)).toBe(true);
        expect(evalLut(lut, 0.37)).toBeCloseTo(0.37, 12);
    });

    it("locks endpoint x while letting y move", () => {
        const lut = identityLut();
        expect(clampDrag(lut, 0, 0.4, 0.2)).toEqual({ x: 0, y: 0.2 });
        expect(clampDrag(lut, 1, 0.1, 0.9)).toEqual({ x: 1, y: 0.9 });
    });

    it("clamps drags past the right neighbor", () => {
        const base = insertPoint(identityLut(), 0.5, 0.5)!;
        const dragged = clampDrag(base.lut, base.index, 2.0, 0.5);
        expect(dragged.x).toBeCloseTo(1 - MIN_GAP, 12);
    });

    it("clamps drags past the left neighbor", () => {
        const base = insertPoint(identityLut(), 0.5, 0.5)!;
        const dragged = clampDrag(base.lut, base.index, -3.0, 0.5);
        expect(dragged.x).toBeCloseTo(0 + MIN_GAP, 12);
    });

    it("clamps y into [0, 1]", () => {
        const lut = identityLut();
        expect(clampDrag(lut, 0, 0, 7).y).toBe(1);
        expect(clampDrag(lut, 0, 0, -7).y).toBe(0);
    });

    it("never emits an invalid lut under violating drags (fuzz)", () => {
        let lut = identityLut();
        let seed = 123456789;
        const rand = () => {
            seed = (seed * 1103515245 + 12345) & 0x7fffffff;
            return seed / 0x7fffffff;
        };
        for (let step = 0; step < 2000; step++) {
            const action = rand();
            if (action < 0.25 && lut.length < 12) {
                const res = insertPoint(lut, rand(), rand() * 3 - 1);
                if (res) lut = res.lut;
            } else if (action < 0.35 && lut.length > 2) {
                const res = removePoint(lut, 1 + Math.floor(rand() * (lut.length - 2)));
                if (res) lut = res;
            } else {
                const idx = Math.floor(rand() * lut.length);
                lut = movePoint(lut, idx, rand() * 4 - 2, rand() * 4 - 2);
            }
            expect(isValidLut(lut)).toBe(true);
        }
    });

    it("refuses to remove endpoints", () => {
        const lut = identityLut();
        expect(removePoint(lut, 0)).toBeNull();
        expect(removePoint(lut, 1)).toBeNull();
    });

    it("inserts keep ordering and clamp into the gap", () => {
        const res = insertPoint(identityLut(), 0.5, 0.8)!;
        expect(res.index).toBe(1);
        const crowded = insertPoint(res.lut, 0.5 + 1e-9, 0.5);
        if (crowded) expect(isValidLut(crowded.lut)).toBe(true);
    });
});
