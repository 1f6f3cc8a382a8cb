import { analyze, buildAnalyzeRequest, bytesToBase64 } from './api.js';
import type { PixelScale, ScaleMode, Unit } from './api.js';
import { pngBlobFromBase64, triggerDownload } from './download.js';
import { formatAreaDisplay, formatAreaFullPrecision, formatCounts } from './format.js';
import {
    canSubmit,
    downloadsEnabled,
    failAnalysis,
    finishAnalysis,
    initialState,
    isSupportedFileName,
    startAnalysis,
    withImage,
    withPixelScale,
    withPredictions,
    withUnit,
} from './state.js';
import type { SessionState } from './state.js';

const BASE_URL = '';

let state: SessionState = initialState();

const $ = <T extends HTMLElement>(id: string) =>
    document.getElementById(id) as T;

const imageInput = $<HTMLInputElement>('image-input');
const predictionsInput = $<HTMLInputElement>('predictions-input');
const unitSelect = $<HTMLSelectElement>('unit-select');
const scaleModeSelect = $<HTMLSelectElement>('scale-mode');
const scaleValueInput = $<HTMLInputElement>('scale-value');
const scaleRow = $<HTMLDivElement>('scale-row');
const analyzeButton = $<HTMLButtonElement>('analyze-button');
const statusLine = $<HTMLParagraphElement>('status-line');
const errorLine = $<HTMLParagraphElement>('error-line');
const areaReadout = $<HTMLParagraphElement>('area-readout');
const countsLine = $<HTMLParagraphElement>('counts-line');
const previewImg = $<HTMLImageElement>('preview');
const overlayImg = $<HTMLImageElement>('overlay');
const maskImg = $<HTMLImageElement>('mask');
const downloadOverlayBtn = $<HTMLButtonElement>('download-overlay');
const downloadMaskBtn = $<HTMLButtonElement>('download-mask');

function setState(next: SessionState): void {
    state = next;
    render();
}

function currentScale(): PixelScale | null {
    const value = parseFloat(scaleValueInput.value);
    if (!isFinite(value) || value <= 0) {
        return null;
    }
    return { mode: scaleModeSelect.value as ScaleMode, value };
}

function render(): void {
    analyzeButton.disabled = !canSubmit(state);
    analyzeButton.textContent = state.busy ? 'Analyzing…' : 'Analyze';
    scaleRow.hidden = state.unit !== 'm2';
    errorLine.textContent = state.error ?? '';
    errorLine.hidden = state.error === null;

    if (state.unit === 'm2' && !state.busy && state.imageB64 !== null
            && state.pixelScale === null) {
        statusLine.textContent = 'Enter a positive pixel scale to analyze in m².';
    } else if (state.busy) {
        statusLine.textContent = 'Analysis in progress…';
    } else {
        statusLine.textContent = state.imageB64 === null
            ? 'Upload a .jpg or .png image to begin.' : '';
    }

    const result = state.result;
    const enabled = downloadsEnabled(state);
    downloadOverlayBtn.disabled = !enabled;
    downloadMaskBtn.disabled = !enabled;
    if (result) {
        overlayImg.src = `data:image/png;base64,${result.overlay_png_b64}`;
        maskImg.src = `data:image/png;base64,${result.erosion_mask_png_b64}`;
        areaReadout.textContent =
            `Erosion area: ${formatAreaDisplay(result.area, result.unit)}`;
        areaReadout.title = formatAreaFullPrecision(result.area, result.unit);
        countsLine.textContent = formatCounts(result.per_class_counts);
    } else {
        overlayImg.removeAttribute('src');
        maskImg.removeAttribute('src');
        areaReadout.textContent = '';
        areaReadout.title = '';
        countsLine.textContent = '';
    }
}

imageInput.addEventListener('change', async () => {
    const file = imageInput.files?.[0];
    if (!file) {
        return;
    }
    if (!isSupportedFileName(file.name)) {
        setState(failAnalysis(state,
            'UnsupportedFormat: only .jpg and .png files are accepted'));
        return;
    }
    const bytes = new Uint8Array(await file.arrayBuffer());
    const b64 = bytesToBase64(bytes);
    previewImg.src = URL.createObjectURL(file);
    setState(withImage(state, file.name, b64));
});

predictionsInput.addEventListener('change', async () => {
    const file = predictionsInput.files?.[0];
    setState(withPredictions(state, file ? await file.text() : null));
});

unitSelect.addEventListener('change', () => {
    const unit = unitSelect.value as Unit;
    setState(withPixelScale(withUnit(state, unit),
                            unit === 'm2' ? currentScale() : null));
});

const onScaleChange = () => {
    if (state.unit === 'm2') {
        setState(withPixelScale(state, currentScale()));
    }
};
scaleModeSelect.addEventListener('change', onScaleChange);
scaleValueInput.addEventListener('input', onScaleChange);

analyzeButton.addEventListener('click', async () => {
    if (!canSubmit(state) || state.imageB64 === null) {
        return;
    }
    setState(startAnalysis(state));
    try {
        const request = buildAnalyzeRequest(
            state.imageB64, state.predictions, state.unit, state.pixelScale);
        const result = await analyze(BASE_URL, request);
        setState(finishAnalysis(state, result));
    } catch (err) {
        setState(failAnalysis(state, err instanceof Error
            ? err.message : String(err)));
    }
});

downloadOverlayBtn.addEventListener('click', () => {
    if (state.result) {
        triggerDownload(pngBlobFromBase64(state.result.overlay_png_b64),
                        'segmented.png');
    }
});

downloadMaskBtn.addEventListener('click', () => {
    if (state.result) {
        triggerDownload(pngBlobFromBase64(state.result.erosion_mask_png_b64),
                        'erosion_mask.png');
    }
});

render();
