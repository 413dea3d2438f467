// Tuning console wiring: upload, curve editors, strength slider,
// comparison views, map overlays, presets. All server interaction goes
// through PreviewSync (debounced, version-ordered).

import { ApiError, PreviewSync, TuningApi } from "./api.js";
import { CompareView, CompareMode } from "./compare.js";
import { CurveEditor } from "./curve-editor.js";
import { Lut } from "./lut.js";
import { CurveId, ProfileState, profileToPatch, serializeProfile, defaultProfile } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
};

const api = new TuningApi("");
const state = new ProfileState();

let sessionId: string | null = null;
let sync: PreviewSync | null = null;
let baselineBytes: ArrayBuffer | null = null;

const compare = new CompareView($<HTMLCanvasElement>("compare-canvas"));
const versionLabel = $<HTMLSpanElement>("version-label");
const banner = $<HTMLDivElement>("banner");

function showBanner(text: string): void {
    banner.textContent = text;
    banner.classList.add("visible");
    setTimeout(() => banner.classList.remove("visible"), 4000);
}

function onPreview(bytes: ArrayBuffer, version: number): void {
    state.ackVersion = version;
    versionLabel.textContent = `v${version}`;
    void compare.setCurrent(bytes);
    if (baselineBytes === null) {
        baselineBytes = bytes;
        void compare.setBaseline(bytes);
    }
}

function onError(err: ApiError): void {
    // non-blocking: keep the last good preview
    showBanner(`${err.code}: ${err.message}`);
}

function pushProfile(): void {
    if (!sync) return;
    sync.queuePatch(profileToPatch(state.profile));
}

// --- curve editors --------------------------------------------------------

const editors = new Map<CurveId, CurveEditor>();
const curveIds: CurveId[] = ["lut_weight", "lut_exp0", "lut_exp1"];
for (const id of curveIds) {
    const canvas = $<HTMLCanvasElement>(`curve-${id}`);
    const editor = new CurveEditor(canvas, (lut: Lut) => {
        if (state.setLut(id, lut)) pushProfile();
    });
    editors.set(id, editor);
}

const tabs = $<HTMLDivElement>("curve-tabs");
tabs.addEventListener("click", e => {
    const target = e.target as HTMLElement;
    const curve = target.dataset.curve as CurveId | undefined;
    if (!curve) return;
    state.selectedCurve = curve;
    for (const id of curveIds) {
        $(`curve-${id}`).classList.toggle("active", id === curve);
        tabs.querySelector(`[data-curve="${id}"]`)?.classList.toggle("active", id === curve);
    }
});

// --- strength -------------------------------------------------------------

const strengthSlider = $<HTMLInputElement>("strength");
const strengthLabel = $<HTMLSpanElement>("strength-label");
strengthSlider.addEventListener("input", () => {
    const v = Number(strengthSlider.value) / 100;
    if (state.setStrength(v)) {
        strengthLabel.textContent = v.toFixed(2);
        pushProfile();
    }
});

// --- compare modes --------------------------------------------------------

$<HTMLSelectElement>("compare-mode").addEventListener("change", e => {
    const mode = (e.target as HTMLSelectElement).value as CompareMode;
    state.compareMode = mode;
    compare.setMode(mode);
    $<HTMLInputElement>("wipe").style.display = mode === "wipe" ? "" : "none";
});

$<HTMLInputElement>("wipe").addEventListener("input", e => {
    compare.setWipe(Number((e.target as HTMLInputElement).value) / 100);
});

$<HTMLButtonElement>("set-baseline").addEventListener("click", async () => {
    if (!sessionId) return;
    const preview = await api.getPreview(sessionId);
    baselineBytes = preview.bytes;
    void compare.setBaseline(preview.bytes);
    showBanner(`baseline pinned at v${preview.version}`);
});

// --- reset ----------------------------------------------------------------

$<HTMLButtonElement>("reset").addEventListener("click", () => {
    state.reset();
    for (const id of curveIds) editors.get(id)!.setLut(state.profile[id]);
    strengthSlider.value = "100";
    strengthLabel.textContent = "1.00";
    if (serializeProfile(state.profile) !== serializeProfile(defaultProfile())) {
        showBanner("reset failed to restore defaults");
        return;
    }
    pushProfile();
});

// --- map overlays ---------------------------------------------------------

$<HTMLSelectElement>("map-kind").addEventListener("change", async e => {
    const kind = (e.target as HTMLSelectElement).value;
    const overlay = $<HTMLImageElement>("map-overlay");
    if (!sessionId || kind === "none") {
        overlay.style.display = "none";
        return;
    }
    const bytes = await api.getMap(sessionId, kind);
    overlay.src = URL.createObjectURL(new Blob([bytes], { type: "image/png" }));
    overlay.style.display = "";
});

// --- presets ----------------------------------------------------------------

$<HTMLButtonElement>("preset-save").addEventListener("click", async () => {
    const name = $<HTMLInputElement>("preset-name").value.trim();
    if (!name) return showBanner("preset needs a name");
    try {
        await api.savePreset(name, profileToPatch(state.profile), true);
        showBanner(`saved preset ${name}`);
        await refreshPresets();
    } catch (err) {
        onError(err as ApiError);
    }
});

async function refreshPresets(): Promise<void> {
    const names = await api.listPresets();
    const select = $<HTMLSelectElement>("preset-list");
    select.innerHTML = "<option value=''>load preset…</option>"
        + names.map(n => `<option>${n}</option>`).join("");
}

$<HTMLSelectElement>("preset-list").addEventListener("change", async e => {
    const name = (e.target as HTMLSelectElement).value;
    if (!name) return;
    const preset = await api.loadPreset(name);
    state.loadFromJson(preset.profile);
    for (const id of curveIds) editors.get(id)!.setLut(state.profile[id]);
    strengthSlider.value = String(Math.round(state.profile.strength * 100));
    strengthLabel.textContent = state.profile.strength.toFixed(2);
    pushProfile();
});

// --- upload -----------------------------------------------------------------

$<HTMLInputElement>("file-input").addEventListener("change", async e => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
        const info = await api.createSession(file, file.name);
        sessionId = info.id;
        state.reset();
        state.ackVersion = info.version;
        baselineBytes = null;
        sync = new PreviewSync(api, sessionId, onPreview, onError);
        sync.ackVersion = info.version;
        const preview = await api.getPreview(sessionId, info.version);
        onPreview(preview.bytes, preview.version);
        $<HTMLSpanElement>("session-label").textContent =
            `${file.name} (${info.preview_width}x${info.preview_height} preview)`;
        showBanner("session ready");
    } catch (err) {
        onError(err as ApiError);
    }
});

$<HTMLButtonElement>("export").addEventListener("click", async () => {
    if (!sessionId) return;
    try {
        const job = await api.startExport(sessionId, { tiles: "auto", overlap: 50 });
        showBanner(`export started (job ${job})`);
    } catch (err) {
        onError(err as ApiError);
    }
});

void refreshPresets().catch(() => showBanner("preset list unavailable"));
