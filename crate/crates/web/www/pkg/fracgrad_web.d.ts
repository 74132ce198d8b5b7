/* tslint:disable */
/* eslint-disable */

/**
 * Log profile below the unit square.
 */
export class Profile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly residual: number;
    readonly s: Float64Array;
    readonly slope: number;
    readonly values: Float64Array;
}

/**
 * `|face integral|` at `(x', -s)` for `count` offsets log-spaced between
 * `10^-decades` and `10^-1`, with the fitted slope in `ln(1/s)`.
 */
export function counterexample_profile(x: number, decades: number, count: number): Profile;

/**
 * `|face integral|` at `samples` evenly spaced points of `[0, 1] x {-s}`
 * followed by the fraction of them above `t`.
 */
export function plane_superlevel(t: number, s: number, samples: number): Float64Array;

/**
 * `I_alpha chi_Q` for the unit square on an `n x n` grid over
 * `[-0.5, 1.5]^2`, row-major with `x` slowest.
 */
export function riesz_heatmap(n: number, alpha: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_profile_free: (a: number, b: number) => void;
    readonly counterexample_profile: (a: number, b: number, c: number) => [number, number, number];
    readonly plane_superlevel: (a: number, b: number, c: number) => [number, number, number, number];
    readonly profile_residual: (a: number) => number;
    readonly profile_s: (a: number) => [number, number];
    readonly profile_slope: (a: number) => number;
    readonly profile_values: (a: number) => [number, number];
    readonly riesz_heatmap: (a: number, b: number) => [number, number, number, number];
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
