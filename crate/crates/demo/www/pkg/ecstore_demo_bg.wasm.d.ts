/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const availability_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const fitted_cost_model: () => [number, number];
export const placement_layout: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const scaling_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
