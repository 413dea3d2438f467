// Canvas curve editor for one LUT. Pointer interaction only mutates the
// model through lut.ts's clamped operations, so every commit is a valid
// LUT: endpoints locked at x=0/1, interior x strictly between neighbors,
// y in [0, 1]. Double-click inserts a point, right-click removes one.

import { Lut, clampDrag, cloneLut, evalLut, identityLut, insertPoint, removePoint } from "./lut.js";

const POINT_RADIUS = 6;
const HIT_RADIUS = 12;

export class CurveEditor {
    private lut: Lut = identityLut();
    private dragIndex: number | null = null;
    selectedIndex: number | null = null;

    constructor(
        private canvas: HTMLCanvasElement,
        private onCommit: (lut: Lut) => void,
        private onSelect: (index: number | null) => void = () => {},
    ) {
        canvas.addEventListener("pointerdown", e => this.pointerDown(e));
        canvas.addEventListener("pointermove", e => this.pointerMove(e));
        canvas.addEventListener("pointerup", e => this.pointerUp(e));
        canvas.addEventListener("dblclick", e => this.doubleClick(e));
        canvas.addEventListener("contextmenu", e => this.rightClick(e));
        this.draw();
    }

    getLut(): Lut {
        return cloneLut(this.lut);
    }

    setLut(lut: Lut): void {
        this.lut = cloneLut(lut);
        this.selectedIndex = null;
        this.dragIndex = null;
        this.draw();
    }

    // canvas pixels <-> unit square (y axis flipped)
    private toUnit(e: { offsetX: number; offsetY: number }): { x: number; y: number } {
        return {
            x: e.offsetX / this.canvas.width,
            y: 1 - e.offsetY / this.canvas.height,
        };
    }

    private hitTest(e: { offsetX: number; offsetY: number }): number | null {
        for (let i = 0; i < this.lut.length; i++) {
            const px = this.lut[i].x * this.canvas.width;
            const py = (1 - this.lut[i].y) * this.canvas.height;
            if (Math.hypot(px - e.offsetX, py - e.offsetY) <= HIT_RADIUS) return i;
        }
        return null;
    }

    pointerDown(e: PointerEvent): void {
        const hit = this.hitTest(e);
        this.dragIndex = hit;
        this.selectedIndex = hit;
        this.onSelect(hit);
        if (hit !== null && this.canvas.setPointerCapture) {
            try { this.canvas.setPointerCapture(e.pointerId); } catch { /* headless */ }
        }
        this.draw();
    }

    pointerMove(e: PointerEvent): void {
        if (this.dragIndex === null) return;
        const { x, y } = this.toUnit(e);
        this.lut[this.dragIndex] = clampDrag(this.lut, this.dragIndex, x, y);
        this.draw();
    }

    pointerUp(_e: PointerEvent): void {
        if (this.dragIndex === null) return;
        this.dragIndex = null;
        this.onCommit(this.getLut());
    }

    doubleClick(e: MouseEvent): void {
        const { x, y } = this.toUnit(e as unknown as { offsetX: number; offsetY: number });
        const res = insertPoint(this.lut, x, y);
        if (res === null) return;
        this.lut = res.lut;
        this.selectedIndex = res.index;
        this.onSelect(res.index);
        this.draw();
        this.onCommit(this.getLut());
    }

    rightClick(e: MouseEvent): void {
        e.preventDefault();
        const hit = this.hitTest(e as unknown as { offsetX: number; offsetY: number });
        if (hit === null) return;
        const out = removePoint(this.lut, hit);
        if (out === null) return;  // endpoints are not removable
        this.lut = out;
        this.selectedIndex = null;
        this.onSelect(null);
        this.draw();
        this.onCommit(this.getLut());
    }

    draw(): void {
        const ctx = this.canvas.getContext && this.canvas.getContext("2d");
        if (!ctx) return;  // headless test environment
        const w = this.canvas.width;
        const h = this.canvas.height;
        ctx.clearRect(0, 0, w, h);
        ctx.fillStyle = "#181c20";
        ctx.fillRect(0, 0, w, h);

        ctx.strokeStyle = "#2c3238";
        ctx.lineWidth = 1;
        for (let i = 1; i < 4; i++) {
            ctx.beginPath();
            ctx.moveTo((i / 4) * w, 0);
            ctx.lineTo((i / 4) * w, h);
            ctx.moveTo(0, (i / 4) * h);
            ctx.lineTo(w, (i / 4) * h);
            ctx.stroke();
        }

        ctx.strokeStyle = "#3a4148";
        ctx.setLineDash([4, 4]);
        ctx.beginPath();
        ctx.moveTo(0, h);
        ctx.lineTo(w, 0);
        ctx.stroke();
        ctx.setLineDash([]);

        ctx.strokeStyle = "#6fc2ff";
        ctx.lineWidth = 2;
        ctx.beginPath();
        for (let px = 0; px <= w; px++) {
            const y = evalLut(this.lut, px / w);
            const py = (1 - y) * h;
            if (px === 0) ctx.moveTo(px, py);
            else ctx.lineTo(px, py);
        }
        ctx.stroke();

        for (let i = 0; i < this.lut.length; i++) {
            const px = this.lut[i].x * w;
            const py = (1 - this.lut[i].y) * h;
            ctx.beginPath();
            ctx.arc(px, py, POINT_RADIUS, 0, 2 * Math.PI);
            ctx.fillStyle = i === this.selectedIndex ? "#ffd166" : "#e8edf2";
            ctx.fill();
            ctx.strokeStyle = "#181c20";
            ctx.stroke();
        }
    }
}
