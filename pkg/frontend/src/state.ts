// Session state for the single-page flow: upload -> analyze -> view ->
// download. One analysis in flight at a time.

import type { AnalyzeResult, PixelScale, Unit } from './api.js';

export interface SessionState {
    imageB64: string | null;
    imageName: string | null;
    predictions: string | null;
    unit: Unit;
    pixelScale: PixelScale | null;
    result: AnalyzeResult | null;
    busy: boolean;
    error: string | null;
}

export function initialState(): SessionState {
    return {
        imageB64: null,
        imageName: null,
        predictions: null,
        unit: 'px',
        pixelScale: null,
        result: null,
        busy: false,
        error: null,
    };
}

const ALLOWED_EXTENSIONS = ['.jpg', '.jpeg', '.png'];

export function isSupportedFileName(name: string): boolean {
    const lower = name.toLowerCase();
    return ALLOWED_EXTENSIONS.some((ext) => lower.endsWith(ext));
}

// m² needs a positive pixel scale before the request may be sent
export function canSubmit(s: SessionState): boolean {
    if (s.busy || s.imageB64 === null) {
        return false;
    }
    if (s.unit === 'm2') {
        return s.pixelScale !== null && s.pixelScale.value > 0;
    }
    return true;
}

export function downloadsEnabled(s: SessionState): boolean {
    return s.result !== null;
}

export function withImage(s: SessionState, name: string,
                          b64: string): SessionState {
    return { ...s, imageB64: b64, imageName: name, result: null, error: null };
}

export function withUnit(s: SessionState, unit: Unit): SessionState {
    return { ...s, unit };
}

export function withPixelScale(s: SessionState,
                               scale: PixelScale | null): SessionState {
    return { ...s, pixelScale: scale };
}

export function withPredictions(s: SessionState,
                                text: string | null): SessionState {
    return { ...s, predictions: text };
}

export function startAnalysis(s: SessionState): SessionState {
    return { ...s, busy: true, error: null };
}

export function finishAnalysis(s: SessionState,
                               result: AnalyzeResult): SessionState {
    return { ...s, busy: false, result, error: null };
}

export function failAnalysis(s: SessionState, message: string): SessionState {
    return { ...s, busy: false, result: null, error: message };
}
