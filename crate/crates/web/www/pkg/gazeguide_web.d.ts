/* tslint:disable */
/* eslint-disable */

export class GazeguideDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * JSON with `text`, `token_score`, `gaze_score`, `total_score`.
     */
    generate(prompt: string, gaze_weight: number, max_tokens: number): string;
    constructor();
    stats(text: string): string;
}

export function fixations(threshold_deg: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_gazeguidedemo_free: (a: number, b: number) => void;
    readonly fixations: (a: number, b: number) => [number, number, number, number];
    readonly gazeguidedemo_generate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly gazeguidedemo_new: () => [number, number, number];
    readonly gazeguidedemo_stats: (a: number, b: number, c: number) => [number, number, number, number];
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
