// Client for the analysis service. The service is the single source of
// truth: the UI never recomputes areas or masks.

export type Unit = 'px' | 'm2';

export type ScaleMode = 'pixel_side_m' | 'pixel_area_m2';

export interface PixelScale {
    mode: ScaleMode;
    value: number;
}

export interface AnalyzeRequest {
    image_b64: string;
    predictions: string | null;
    unit: Unit;
    pixel_scale?: PixelScale;
}

export interface AreaPayload {
    pixels: number;
    area_m2?: number;
}

export interface AnalyzeResult {
    overlay_png_b64: string;
    erosion_mask_png_b64: string;
    area: AreaPayload;
    per_class_counts: Record<string, number>;
    unit: Unit;
}

export interface ServiceError {
    error: string;
    detail: string;
}

export function buildAnalyzeRequest(
    imageB64: string,
    predictions: string | null,
    unit: Unit,
    scale: PixelScale | null,
): AnalyzeRequest {
    const req: AnalyzeRequest = { image_b64: imageB64, predictions, unit };
    if (unit === 'm2' && scale) {
        req.pixel_scale = scale;
    }
    return req;
}

export async function analyze(
    baseUrl: string,
    request: AnalyzeRequest,
    fetchFn: typeof fetch = fetch,
): Promise<AnalyzeResult> {
    const resp = await fetchFn(`${baseUrl}/analyze`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(request),
    });
    const body = await resp.json();
    if (!resp.ok) {
        const err = body as ServiceError;
        throw new Error(err.error ? `${err.error}: ${err.detail}` : `HTTP ${resp.status}`);
    }
    return body as AnalyzeResult;
}

export function base64ToBytes(b64: string): Uint8Array {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) {
        out[i] = bin.charCodeAt(i);
    }
    return out;
}

export function bytesToBase64(bytes: Uint8Array): string {
    let bin = '';
    for (let i = 0; i < bytes.length; i++) {
        bin += String.fromCharCode(bytes[i]);
    }
    return btoa(bin);
}
