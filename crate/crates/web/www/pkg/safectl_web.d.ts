/* tslint:disable */
/* eslint-disable */

/**
 * A finished ball episode.
 */
export class Rollout {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[robot_x, robot_y, human_x, human_y, phi, intervened]` per frame.
     */
    frames(): Float64Array;
    readonly collided: boolean;
    readonly goals: number;
    /**
     * Fraction of frames where the controller changed the reference.
     */
    readonly interventions: number;
    /**
     * True when the episode stopped on a numerical failure.
     */
    readonly invalid: boolean;
    readonly minDistance: number;
    readonly safety: number;
}

/**
 * Algorithm names in the order used by [`compare`].
 */
export function algorithms(): string[];

/**
 * Every controller, at its default parameter, at one ball state next to
 * a static obstacle.
 *
 * Returns `[phi, u_x, u_y, ...]` with one `(u_x, u_y)` pair per algorithm
 * in the order of [`algorithms`].
 */
export function compare(px: number, py: number, vx: number, vy: number, ox: number, oy: number, u0x: number, u0y: number, d_min: number, k: number): Float64Array;

/**
 * Default value of each algorithm's parameter, in the order of [`algorithms`].
 */
export function defaultParameters(): Float64Array;

/**
 * Controller correction over a grid of ball positions in `[-3, 3]^2`
 * around an obstacle at the origin, with the ball moving at `(vx, vy)`
 * under a PD reference toward `(gx, gy)`.
 *
 * Returns `[x, y, phi, du_x, du_y]` per cell.
 */
export function phase_field(algorithm: string, parameter: number, d_min: number, k: number, vx: number, vy: number, gx: number, gy: number, resolution: number): Float64Array;

/**
 * The default PD reference control of the ball toward `(gx, gy)`.
 */
export function reference(px: number, py: number, vx: number, vy: number, gx: number, gy: number): Float64Array;

/**
 * Runs one ball episode of `seconds` length on the scenario drawn from
 * `seed`, with the passive human and noisy sensing.
 */
export function simulate(algorithm: string, parameter: number, d_min: number, k: number, seed: number, seconds: number): Rollout;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_rollout_free: (a: number, b: number) => void;
    readonly algorithms: () => [number, number];
    readonly compare: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly defaultParameters: () => [number, number];
    readonly phase_field: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly reference: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly rollout_collided: (a: number) => number;
    readonly rollout_frames: (a: number) => [number, number];
    readonly rollout_goals: (a: number) => number;
    readonly rollout_interventions: (a: number) => number;
    readonly rollout_invalid: (a: number) => number;
    readonly rollout_minDistance: (a: number) => number;
    readonly rollout_safety: (a: number) => number;
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
