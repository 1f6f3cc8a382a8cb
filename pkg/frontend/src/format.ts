// Area readout: the number shown is the service's value verbatim; only
// the display is shortened, full precision goes to the tooltip.

import type { AreaPayload, Unit } from './api.js';

export function areaValue(area: AreaPayload, unit: Unit): number {
    return unit === 'm2' && area.area_m2 !== undefined
        ? area.area_m2
        : area.pixels;
}

export function areaUnitLabel(unit: Unit): string {
    return unit === 'm2' ? 'm²' : 'px';
}

export function formatAreaDisplay(area: AreaPayload, unit: Unit): string {
    const v = areaValue(area, unit);
    const shown = Number.isInteger(v)
        ? v.toString()
        : v.toLocaleString('en-US', { maximumFractionDigits: 2 });
    return `${shown} ${areaUnitLabel(unit)}`;
}

export function formatAreaFullPrecision(area: AreaPayload,
                                        unit: Unit): string {
    return `${areaValue(area, unit)} ${areaUnitLabel(unit)}`;
}

export function formatCounts(counts: Record<string, number>): string {
    const parts = Object.entries(counts)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([name, n]) => `${name}: ${n}`);
    return parts.join(', ');
}
