/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_rollout_free: (a: number, b: number) => void;
export const algorithms: () => [number, number];
export const compare: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
export const defaultParameters: () => [number, number];
export const phase_field: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
export const reference: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
export const rollout_collided: (a: number) => number;
export const rollout_frames: (a: number) => [number, number];
export const rollout_goals: (a: number) => number;
export const rollout_interventions: (a: number) => number;
export const rollout_invalid: (a: number) => number;
export const rollout_minDistance: (a: number) => number;
export const rollout_safety: (a: number) => number;
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
