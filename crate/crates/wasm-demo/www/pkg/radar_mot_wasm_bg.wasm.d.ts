/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demorun_free: (a: number, b: number) => void;
export const demorun_frame: (a: number, b: number) => [number, number, number, number];
export const demorun_frame_count: (a: number) => number;
export const demorun_new: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: bigint) => [number, number, number];
export const demorun_scores: (a: number) => [number, number];
export const demorun_sweep: (a: number, b: number, c: number) => [number, number, number, number];
export const extent_box: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
