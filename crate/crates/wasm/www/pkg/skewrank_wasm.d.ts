/* tslint:disable */
/* eslint-disable */

/**
 * One synthetic rating trial: Kendall tau of completion scores and of mean ratings.
 */
export function irt(users: number, items: number, ratings_per_user: number, eps: number, seed: bigint): string;

/**
 * Ranks the items in a `voter,item,rating` CSV document.
 */
export function rank_csv(text: string, method: string, min_support: number, rank: number): string;

/**
 * Fraction of noiseless uniform instances recovered at each multiple of `n ln n` samples.
 */
export function recovery_curve(n: number, trials: number, max_multiplier: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly irt: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly rank_csv: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly recovery_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
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
