/* tslint:disable */
/* eslint-disable */

/**
 * A simulated sequence and the tracker output on it.
 */
export class DemoRun {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Points, ground truth, detections and tracks of frame `k` in BEV.
     */
    frame(k: number): string;
    /**
     * Simulates a preset and tracks it. `max_frames = 0` keeps the preset length.
     */
    constructor(preset_name: string, framework: string, seed: bigint, skew: number, max_frames: bigint);
    scores(): string;
    /**
     * MOTA over the localization threshold grid for one class.
     */
    sweep(_class: string): string;
    readonly frame_count: number;
}

/**
 * Box read off a symmetric extent matrix `[[xx, xy], [xy, yy]]`.
 */
export function extent_box(xx: number, xy: number, yy: number, axis_scale: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demorun_free: (a: number, b: number) => void;
    readonly demorun_frame: (a: number, b: number) => [number, number, number, number];
    readonly demorun_frame_count: (a: number) => number;
    readonly demorun_new: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: bigint) => [number, number, number];
    readonly demorun_scores: (a: number) => [number, number];
    readonly demorun_sweep: (a: number, b: number, c: number) => [number, number, number, number];
    readonly extent_box: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
