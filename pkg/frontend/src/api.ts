// HTTP client for the tuning service plus the debounced preview loop.
// PreviewSync owns the edit->PATCH->preview cycle: rapid edits collapse
// into one request per debounce window, and stale preview responses
// (version older than the last acknowledged) are dropped, so the
// displayed version never decreases.

export interface PreviewResult {
    bytes: ArrayBuffer;
    version: number;
}

export interface SessionInfo {
    id: string;
    version: number;
    preview_width: number;
    preview_height: number;
}

type FetchLike = typeof fetch;

export class ApiError extends Error {
    constructor(public status: number, public code: string, message: string,
                public field?: string) {
        super(message);
    }
}

async function parseError(resp: Response): Promise<ApiError> {
    try {
        const body = await resp.json();
        return new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText, body.field);
    } catch {
        return new ApiError(resp.status, "error", resp.statusText);
    }
}

export class TuningApi {
    constructor(private base: string = "", private fetchImpl: FetchLike = fetch) {}

    private url(path: string): string {
        return this.base + path;
    }

    async createSession(file: Blob, filename: string, metadata?: object): Promise<SessionInfo> {
        const form = new FormData();
        form.append("file", file, filename);
        if (metadata) form.append("metadata", JSON.stringify(metadata));
        const resp = await this.fetchImpl(this.url("/sessions"), { method: "POST", body: form });
        if (!resp.ok) throw await parseError(resp);
        return resp.json();
    }

    async patchProfile(sessionId: string, patch: object): Promise<number> {
        const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/profile`), {
            method: "PATCH",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(patch),
        });
        if (!resp.ok) throw await parseError(resp);
        const body = await resp.json();
        return body.version as number;
    }

    async getProfile(sessionId: string): Promise<{ version: number; profile: object }> {
        const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/profile`));
        if (!resp.ok) throw await parseError(resp);
        return resp.json();
    }

    async getPreview(sessionId: string, version?: number): Promise<PreviewResult> {
        const q = version === undefined ? "" : `?version=${version}`;
        const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/preview${q}`));
        if (!resp.ok) throw await parseError(resp);
        const actual = Number(resp.headers.get("X-Preview-Version") ?? version ?? 0);
        return { bytes: await resp.arrayBuffer(), version: actual };
    }

    async getMap(sessionId: string, kind: string): Promise<ArrayBuffer> {
        const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/maps?kind=${kind}`));
        if (!resp.ok) throw await parseError(resp);
        return resp.arrayBuffer();
    }

    async listPresets(): Promise<string[]> {
        const resp = await this.fetchImpl(this.url("/presets"));
        if (!resp.ok) throw await parseError(resp);
        return (await resp.json()).presets;
    }

    async savePreset(name: string, profile: object, force = false): Promise<void> {
        const resp = await this.fetchImpl(this.url("/presets"), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ name, profile, force }),
        });
        if (!resp.ok) throw await parseError(resp);
    }

    async loadPreset(name: string): Promise<{ profile: { [k: string]: unknown } }> {
        const resp = await this.fetchImpl(this.url(`/presets/${name}`));
        if (!resp.ok) throw await parseError(resp);
        return resp.json();
    }

    async startExport(sessionId: string, opts: object = {}): Promise<string> {
        const resp = await this.fetchImpl(this.url(`/sessions/${sessionId}/export`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(opts),
        });
        if (!resp.ok) throw await parseError(resp);
        return (await resp.json()).job;
    }
}

export const DEBOUNCE_MS = 120;

export class PreviewSync {
    ackVersion = 0;
    private timer: ReturnType<typeof setTimeout> | null = null;
    private pendingPatch: Record<string, unknown> | null = null;
    private inflight = false;

    constructor(
        private api: TuningApi,
        private sessionId: string,
        private onPreview: (bytes: ArrayBuffer, version: number) => void,
        private onError: (err: ApiError) => void = () => {},
        private debounceMs: number = DEBOUNCE_MS,
    ) {}

    // Merge the patch into the pending window; one PATCH per quiet period.
    queuePatch(patch: Record<string, unknown>): void {
        this.pendingPatch = { ...(this.pendingPatch ?? {}), ...patch };
        if (this.timer !== null) clearTimeout(this.timer);
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.flush();
        }, this.debounceMs);
    }

    async flush(): Promise<void> {
        if (this.pendingPatch === null || this.inflight) return;
        const patch = this.pendingPatch;
        this.pendingPatch = null;
        this.inflight = true;
        try {
            const version = await this.api.patchProfile(this.sessionId, patch);
            const preview = await this.api.getPreview(this.sessionId, version);
            // stale responses (an older render finishing late) are dropped
            if (preview.version >= this.ackVersion) {
                this.ackVersion = preview.version;
                this.onPreview(preview.bytes, preview.version);
            }
        } catch (err) {
            this.onError(err instanceof ApiError ? err : new ApiError(0, "network", String(err)));
        } finally {
            this.inflight = false;
            if (this.pendingPatch !== null) void this.flush();
        }
    }
}
