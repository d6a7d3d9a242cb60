/* tslint:disable */
/* eslint-disable */

/**
 * Integrated orbit plus the exact conic it should lie on.
 */
export class KeplerOrbit {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Interleaved `x, y` samples of `r = p/(1 + ε cos φ)`.
     */
    conic(): Float64Array;
    /**
     * Largest distance from an integrated sample to the conic `r(φ)`.
     */
    conic_error(m: number, l: number, e: number): number;
    /**
     * Start at perihelion and run rk4 for one period (or `horizon` time
     * units when the orbit is open).
     */
    constructor(m: number, l: number, e: number, dt: number, horizon: number);
    /**
     * Interleaved `x, y` samples of the integrated orbit.
     */
    xy(): Float64Array;
    readonly energy_drift: number;
    readonly eps: number;
    /**
     * NaN for open orbits.
     */
    readonly period: number;
    readonly truncated: boolean;
}

/**
 * Periodic Klein-Gordon lattice seeded with a Gaussian packet.
 */
export class KgLattice {
    free(): void;
    [Symbol.dispose](): void;
    energy(): number;
    /**
     * `|E(t) − E(0)| / |E(0)|`.
     */
    energy_drift(): number;
    momentum(): number;
    constructor(n: number, dx: number, m: number, dt: number, width: number, speed: number);
    phi(): Float64Array;
    step(k: number): void;
    readonly time: number;
}

/**
 * Two unit pendula coupled by a spring of stiffness `k`.
 */
export class Pendula {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Mode frequencies, ascending; NaN for non-oscillatory modes.
     */
    frequencies(): Float64Array;
    /**
     * Linearized motion from rest at `(q1, q2)`: interleaved `t, q1, q2`.
     */
    motion(q1: number, q2: number, t_end: number, samples: number): Float64Array;
    constructor(k: number);
    /**
     * Column `k` of the mode matrix.
     */
    shape(k: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_keplerorbit_free: (a: number, b: number) => void;
    readonly __wbg_kglattice_free: (a: number, b: number) => void;
    readonly __wbg_pendula_free: (a: number, b: number) => void;
    readonly keplerorbit_conic: (a: number) => [number, number];
    readonly keplerorbit_conic_error: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly keplerorbit_energy_drift: (a: number) => number;
    readonly keplerorbit_eps: (a: number) => number;
    readonly keplerorbit_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly keplerorbit_period: (a: number) => number;
    readonly keplerorbit_truncated: (a: number) => number;
    readonly keplerorbit_xy: (a: number) => [number, number];
    readonly kglattice_energy: (a: number) => [number, number, number];
    readonly kglattice_energy_drift: (a: number) => [number, number, number];
    readonly kglattice_momentum: (a: number) => [number, number, number];
    readonly kglattice_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly kglattice_phi: (a: number) => [number, number];
    readonly kglattice_step: (a: number, b: number) => [number, number];
    readonly kglattice_time: (a: number) => number;
    readonly pendula_frequencies: (a: number) => [number, number];
    readonly pendula_motion: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly pendula_new: (a: number) => [number, number, number];
    readonly pendula_shape: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
