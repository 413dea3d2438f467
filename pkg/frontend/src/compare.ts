// Before/after comparison rendering. The pixel math is kept pure
// (amplifyDifference) so it is testable without a canvas; the view
// class handles bitmaps, the wipe divider, and mode switching.

export const DIFF_GAIN = 5;

// |current - baseline| amplified, alpha forced opaque.
export function amplifyDifference(
    baseline: Uint8ClampedArray,
    current: Uint8ClampedArray,
    gain: number = DIFF_GAIN,
): Uint8ClampedArray {
    const n = Math.min(baseline.length, current.length);
    const out = new Uint8ClampedArray(n);
    for (let i = 0; i < n; i += 4) {
        out[i] = Math.min(255, Math.abs(current[i] - baseline[i]) * gain);
        out[i + 1] = Math.min(255, Math.abs(current[i + 1] - baseline[i + 1]) * gain);
        out[i + 2] = Math.min(255, Math.abs(current[i + 2] - baseline[i + 2]) * gain);
        out[i + 3] = 255;
    }
    return out;
}

export type CompareMode = "side-by-side" | "wipe" | "difference";

export class CompareView {
    mode: CompareMode = "side-by-side";
    wipe = 0.5;
    private baseline: ImageBitmap | null = null;
    private current: ImageBitmap | null = null;

    constructor(private canvas: HTMLCanvasElement) {}

    async setBaseline(png: ArrayBuffer): Promise<void> {
        this.baseline = await createImageBitmap(new Blob([png], { type: "image/png" }));
        this.render();
    }

    async setCurrent(png: ArrayBuffer): Promise<void> {
        this.current = await createImageBitmap(new Blob([png], { type: "image/png" }));
        this.render();
    }

    setMode(mode: CompareMode): void {
        this.mode = mode;
        this.render();
    }

    setWipe(position: number): void {
        this.wipe = Math.min(1, Math.max(0, position));
        if (this.mode === "wipe") this.render();
    }

    render(): void {
        const ctx = this.canvas.getContext && this.canvas.getContext("2d");
        if (!ctx || !this.current) return;
        const img = this.current;
        const w = img.width;
        const h = img.height;
        if (this.mode === "side-by-side" && this.baseline) {
            this.canvas.width = w * 2 + 4;
            this.canvas.height = h;
            ctx.drawImage(this.baseline, 0, 0);
            ctx.drawImage(img, w + 4, 0);
            return;
        }
        this.canvas.width = w;
        this.canvas.height = h;
        if (this.mode === "wipe" && this.baseline) {
            const split = Math.round(w * this.wipe);
            ctx.drawImage(this.baseline, 0, 0);
            ctx.drawImage(img, split, 0, w - split, h, split, 0, w - split, h);
            ctx.fillStyle = "#ffd166";
            ctx.fillRect(split - 1, 0, 2, h);
            return;
        }
        if (this.mode === "difference" && this.baseline) {
            ctx.drawImage(this.baseline, 0, 0);
            const base = ctx.getImageData(0, 0, w, h);
            ctx.drawImage(img, 0, 0);
            const cur = ctx.getImageData(0, 0, w, h);
            const diff = ctx.createImageData(w, h);
            diff.data.set(amplifyDifference(base.data, cur.data));
            ctx.putImageData(diff, 0, 0);
            return;
        }
        ctx.drawImage(img, 0, 0);
    }
}
