/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_profile_free: (a: number, b: number) => void;
export const counterexample_profile: (a: number, b: number, c: number) => [number, number, number];
export const plane_superlevel: (a: number, b: number, c: number) => [number, number, number, number];
export const profile_residual: (a: number) => number;
export const profile_s: (a: number) => [number, number];
export const profile_slope: (a: number) => number;
export const profile_values: (a: number) => [number, number];
export const riesz_heatmap: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
