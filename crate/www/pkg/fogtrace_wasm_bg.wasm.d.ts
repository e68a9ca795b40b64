/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_alertrun_free: (a: number, b: number) => void;
export const __wbg_evaluation_free: (a: number, b: number) => void;
export const __wbg_forecast_free: (a: number, b: number) => void;
export const alertrun_alerted: (a: number) => [number, number];
export const alertrun_baseline: (a: number) => [number, number];
export const evaluate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const evaluation_contact: (a: number) => number;
export const evaluation_infected: (a: number) => number;
export const evaluation_level: (a: number) => [number, number];
export const evaluation_symptom: (a: number) => number;
export const evaluation_total: (a: number) => number;
export const forecast: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const forecast_current: (a: number) => [number, number];
export const forecast_lockdown: (a: number) => [number, number];
export const forecast_observed: (a: number) => [number, number];
export const simulate_alerts: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
