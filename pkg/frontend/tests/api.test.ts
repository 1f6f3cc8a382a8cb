import { describe, expect, it } from 'vitest';

import {
    analyze,
    base64ToBytes,
    buildAnalyzeRequest,
    bytesToBase64,
} from '../src/api.js';
import type { AnalyzeResult } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

describe('buildAnalyzeRequest', () => {
    it('omits pixel_scale for px unit', () => {
        const req = buildAnalyzeRequest('abc', null, 'px',
            { mode: 'pixel_side_m', value: 1 });
        expect(req.pixel_scale).toBeUndefined();
        expect(req.unit).toBe('px');
    });

    it('includes pixel_scale for m2 unit', () => {
        const req = buildAnalyzeRequest('abc', '3 0 0 1 0 1 1 0.9', 'm2',
            { mode: 'pixel_area_m2', value: 2.5 });
        expect(req.pixel_scale).toEqual({ mode: 'pixel_area_m2', value: 2.5 });
        expect(req.predictions).toBe('3 0 0 1 0 1 1 0.9');
    });
});

describe('analyze', () => {
    const okBody: AnalyzeResult = {
        overlay_png_b64: 'AAAA',
        erosion_mask_png_b64: 'BBBB',
        area: { pixels: 500, area_m2: 500 },
        per_class_counts: { 'erosión fluvial': 1, 'río': 1 },
        unit: 'm2',
    };

    it('posts JSON to /analyze and returns the parsed body', async () => {
        let captured: { url: string; init?: RequestInit } | null = null;
        const fetchFn = (async (url: string, init?: RequestInit) => {
            captured = { url, init };
            return jsonResponse(okBody);
        }) as unknown as typeof fetch;

        const req = buildAnalyzeRequest('abc', null, 'm2',
            { mode: 'pixel_side_m', value: 1 });
        const result = await analyze('http://svc', req, fetchFn);

        expect(result.area.area_m2).toBe(500);
        expect(result.area.pixels).toBe(500);
        expect(captured!.url).toBe('http://svc/analyze');
        expect(captured!.init!.method).toBe('POST');
        const sent = JSON.parse(captured!.init!.body as string);
        expect(sent.pixel_scale).toEqual({ mode: 'pixel_side_m', value: 1 });
    });

    it('raises the service error code and detail on failure', async () => {
        const fetchFn = (async () => jsonResponse(
            { error: 'MissingPixelScale', detail: 'unit m2 needs a scale' },
            400,
        )) as unknown as typeof fetch;

        const req = buildAnalyzeRequest('abc', null, 'px', null);
        await expect(analyze('', req, fetchFn)).rejects.toThrow(
            'MissingPixelScale: unit m2 needs a scale');
    });
});

describe('base64 helpers', () => {
    it('round-trips arbitrary bytes', () => {
        const bytes = new Uint8Array(256).map((_, i) => i);
        expect(base64ToBytes(bytesToBase64(bytes))).toEqual(bytes);
    });

    it('decodes a known value', () => {
        expect(Array.from(base64ToBytes('AQID'))).toEqual([1, 2, 3]);
    });
});
