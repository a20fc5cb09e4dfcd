/* tslint:disable */
/* eslint-disable */

/**
 * Estimation density along `α̂ = 0.5 + δ`, `δ ∈ [−1.5, 1.5]` real, for one continuous-variable scenario.
 */
export function cv_density_profile(kind: string, cutoff: number, x: number, points: number): string;

/**
 * Optimal likelihood for `|↑⟩ ⊗ (cos θ/2 |↑⟩ + e^{iφ} sin θ/2 |↓⟩)` under `U ⊗ U`, for θ on `[0, π]`.
 */
export function spin_pair_curve(points: number, phi: number): string;

/**
 * Squeezed-input likelihood against `2(1+x)/(1−x)` for `x` on `[0, x_max]`.
 */
export function squeezed_curve(cutoff: number, x_max: number, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cv_density_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly spin_pair_curve: (a: number, b: number) => [number, number];
    readonly squeezed_curve: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
