// UI-side profile state: a mirror of the backend tuning profile plus
// view-only fields. The state can always be serialized to a valid
// profile patch; maps are never edited here.

import { Lut, identityLut, isValidLut, lutFromJson, lutToJson } from "./lut.js";

export type CurveId = "lut_weight" | "lut_exp0" | "lut_exp1";
export type CompareMode = "side-by-side" | "wipe" | "difference";

export interface Profile {
    lut_weight: Lut;
    lut_exp0: Lut;
    lut_exp1: Lut;
    strength: number;
}

export const DEFAULT_STRENGTH = 1.0;

export function defaultProfile(): Profile {
    return {
        lut_weight: identityLut(),
        lut_exp0: identityLut(),
        lut_exp1: identityLut(),
        strength: DEFAULT_STRENGTH,
    };
}

export function profileToPatch(profile: Profile): Record<string, unknown> {
    return {
        lut_weight: lutToJson(profile.lut_weight),
        lut_exp0: lutToJson(profile.lut_exp0),
        lut_exp1: lutToJson(profile.lut_exp1),
        strength: profile.strength,
    };
}

export function serializeProfile(profile: Profile): string {
    return JSON.stringify(profileToPatch(profile));
}

export class ProfileState {
    profile: Profile = defaultProfile();
    selectedCurve: CurveId = "lut_weight";
    selectedPoint: number | null = null;
    compareMode: CompareMode = "side-by-side";
    ackVersion = 0;

    setLut(curve: CurveId, lut: Lut): boolean {
        if (!isValidLut(lut)) return false;
        this.profile[curve] = lut;
        return true;
    }

    setStrength(s: number): boolean {
        if (!Number.isFinite(s) || s < 0 || s > 1) return false;
        this.profile.strength = s;
        return true;
    }

    // Partial patch with only the fields that differ from `prev`.
    diffPatch(prev: Profile): Record<string, unknown> {
        const patch: Record<string, unknown> = {};
        for (const key of ["lut_weight", "lut_exp0", "lut_exp1"] as CurveId[]) {
            if (JSON.stringify(lutToJson(this.profile[key])) !== JSON.stringify(lutToJson(prev[key]))) {
                patch[key] = lutToJson(this.profile[key]);
            }
        }
        if (this.profile.strength !== prev.strength) {
            patch.strength = this.profile.strength;
        }
        return patch;
    }

    reset(): void {
        this.profile = defaultProfile();
        this.selectedPoint = null;
    }

    loadFromJson(doc: { [k: string]: unknown }): void {
        const next = defaultProfile();
        for (const key of ["lut_weight", "lut_exp0", "lut_exp1"] as CurveId[]) {
            const pts = doc[key];
            if (Array.isArray(pts)) {
                const lut = lutFromJson(pts as [number, number][]);
                if (isValidLut(lut)) next[key] = lut;
            }
        }
        if (typeof doc.strength === "number" && doc.strength >= 0 && doc.strength <= 1) {
            next.strength = doc.strength;
        }
        this.profile = next;
        this.selectedPoint = null;
    }
}
