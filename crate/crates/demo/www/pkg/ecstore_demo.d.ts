/* tslint:disable */
/* eslint-disable */

/**
 * File availability of erasure (k, m) and replication r against endpoint
 * availability p, sampled at `samples` points in [p_min, 1].
 */
export function availability_curve(k: number, m: number, r: number, p_min: number, samples: number): string;

/**
 * The committed cost model as `[setup_latency, bandwidth]`.
 */
export function fitted_cost_model(): Float64Array;

/**
 * Round-robin layout of m chunks over s endpoints and its availability at p.
 */
export function placement_layout(k: number, m: number, s: number, p: number): string;

/**
 * Virtual upload and download times for T = 1..=max_threads on m uniform
 * endpoints with the given cost model. `codec_bandwidth` <= 0 makes
 * coding free.
 */
export function scaling_curve(size_bytes: number, k: number, m: number, max_threads: number, setup_latency: number, bandwidth: number, codec_bandwidth: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly availability_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly fitted_cost_model: () => [number, number];
    readonly placement_layout: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly scaling_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
