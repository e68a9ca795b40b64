/* tslint:disable */
/* eslint-disable */

/**
 * Daily new infections for two runs over the same meetup stream.
 */
export class AlertRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly alerted: Uint32Array;
    readonly baseline: Uint32Array;
}

export class Evaluation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly contact: number;
    readonly infected: boolean;
    readonly level: string;
    readonly symptom: number;
    readonly total: number;
}

/**
 * Observed days followed by two continuations of the same final state.
 */
export class Forecast {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly current: Uint32Array;
    readonly lockdown: Uint32Array;
    readonly observed: Uint32Array;
}

export function evaluate(theta: number, tau0_minutes: number, nu0_dbm: number, symptomatic: boolean, peer_probability: Float64Array, contact_time_s: Float64Array, signal_dbm: Float64Array): Evaluation;

export function forecast(_case: number, population: number, meetups_per_day: number, days: number, seed: number, horizon: number, lockdown_meetups: number): Forecast;

export function simulate_alerts(_case: number, population: number, meetups_per_day: number, days: number, seed: number, compliance: number): AlertRun;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_alertrun_free: (a: number, b: number) => void;
    readonly __wbg_evaluation_free: (a: number, b: number) => void;
    readonly __wbg_forecast_free: (a: number, b: number) => void;
    readonly alertrun_alerted: (a: number) => [number, number];
    readonly alertrun_baseline: (a: number) => [number, number];
    readonly evaluate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly evaluation_contact: (a: number) => number;
    readonly evaluation_infected: (a: number) => number;
    readonly evaluation_level: (a: number) => [number, number];
    readonly evaluation_symptom: (a: number) => number;
    readonly evaluation_total: (a: number) => number;
    readonly forecast: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly forecast_current: (a: number) => [number, number];
    readonly forecast_lockdown: (a: number) => [number, number];
    readonly forecast_observed: (a: number) => [number, number];
    readonly simulate_alerts: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
