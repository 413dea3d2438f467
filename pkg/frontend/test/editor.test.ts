// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { CurveEditor } from "../src/curve-editor.js";
import { Lut, identityLut, isValidLut } from "../src/lut.js";

function makeEditor() {
    const canvas = document.createElement("canvas");
    canvas.width = 280;
    canvas.height = 280;
    const commits: Lut[] = [];
    const editor = new CurveEditor(canvas, lut => commits.push(lut));
    return { canvas, commits, editor };
}

function pev(x: number, y: number): PointerEvent {
    return { offsetX: x, offsetY: y, pointerId: 1 } as unknown as PointerEvent;
}

describe("curve editor", () => {
    let ed: ReturnType<typeof makeEditor>;

    beforeEach(() => {
        ed = makeEditor();
    });

    it("starts on the identity diagonal", () => {
        expect(ed.editor.getLut()).toEqual(identityLut());
    });

    it("dragging the low endpoint moves y only", () => {
        // low endpoint of the identity sits at canvas (0, 280)
        ed.editor.pointerDown(pev(2, 278));
        ed.editor.pointerMove(pev(150, 140));   // try to drag to the middle
        ed.editor.pointerUp(pev(150, 140));
        expect(ed.commits).toHaveLength(1);
        const lut = ed.commits[0];
        expect(lut[0].x).toBe(0);               // x stays locked
        expect(lut[0].y).toBeCloseTo(0.5, 2);   // y followed the drag
        expect(isValidLut(lut)).toBe(true);
    });

    it("double-click inserts, drag past neighbor clamps", () => {
        ed.editor.doubleClick(pev(140, 140) as unknown as MouseEvent);
        expect(ed.commits).toHaveLength(1);
        expect(ed.commits[0]).toHaveLength(3);

        // grab the new midpoint and yank it far past the right endpoint
        ed.editor.pointerDown(pev(140, 140));
        ed.editor.pointerMove(pev(900, -400));
        ed.editor.pointerUp(pev(900, -400));
        const lut = ed.commits[1];
        expect(isValidLut(lut)).toBe(true);
        expect(lut[1].x).toBeLessThan(1);
        expect(lut[1].y).toBe(1);
    });

    it("every commit under a violating drag storm is a valid lut", () => {
        ed.editor.doubleClick(pev(90, 200) as unknown as MouseEvent);
        ed.editor.doubleClick(pev(200, 60) as unknown as MouseEvent);
        let seed = 42;
        const rand = () => {
            seed = (seed * 1103515245 + 12345) & 0x7fffffff;
            return seed / 0x7fffffff;
        };
        for (let i = 0; i < 200; i++) {
            const px = rand() * 600 - 150;
            const py = rand() * 600 - 150;
            ed.editor.pointerDown(pev(rand() * 280, rand() * 280));
            ed.editor.pointerMove(pev(px, py));
            ed.editor.pointerUp(pev(px, py));
        }
        expect(ed.commits.length).toBeGreaterThan(0);
        for (const lut of ed.commits) {
            expect(isValidLut(lut)).toBe(true);
        }
    });

    it("right-click removes interior points but never endpoints", () => {
        ed.editor.doubleClick(pev(140, 140) as unknown as MouseEvent);
        const ev = {
            offsetX: 0, offsetY: 280, pointerId: 1,
            preventDefault: () => {},
        } as unknown as MouseEvent;
        ed.editor.rightClick(ev);             // endpoint: refused
        expect(ed.editor.getLut()).toHaveLength(3);
        const mid = {
            offsetX: 140, offsetY: 140, pointerId: 1,
            preventDefault: () => {},
        } as unknown as MouseEvent;
        ed.editor.rightClick(mid);            // interior: removed
        expect(ed.editor.getLut()).toHaveLength(2);
        expect(isValidLut(ed.editor.getLut())).toBe(true);
    });
});
