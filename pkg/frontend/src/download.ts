// File download via object URLs; the blob holds the service's bytes
// unchanged so downloads hash-match the payload.

import { base64ToBytes } from './api.js';

export function pngBlobFromBase64(b64: string): Blob {
    const bytes = base64ToBytes(b64);
    const copy = new Uint8Array(bytes);
    return new Blob([copy.buffer as ArrayBuffer], { type: 'image/png' });
}

export function triggerDownload(blob: Blob, filename: string): void {
    const url = URL.createObjectURL(blob);
    const a = document.createElement('a');
    a.href = url;
    a.download = filename;
    a.rel = 'noopener';
    document.body.appendChild(a);
    a.click();
    a.remove();
    URL.revokeObjectURL(url);
}
