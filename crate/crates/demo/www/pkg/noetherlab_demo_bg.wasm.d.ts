/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_keplerorbit_free: (a: number, b: number) => void;
export const __wbg_kglattice_free: (a: number, b: number) => void;
export const __wbg_pendula_free: (a: number, b: number) => void;
export const keplerorbit_conic: (a: number) => [number, number];
export const keplerorbit_conic_error: (a: number, b: number, c: number, d: number) => [number, number, number];
export const keplerorbit_energy_drift: (a: number) => number;
export const keplerorbit_eps: (a: number) => number;
export const keplerorbit_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const keplerorbit_period: (a: number) => number;
export const keplerorbit_truncated: (a: number) => number;
export const keplerorbit_xy: (a: number) => [number, number];
export const kglattice_energy: (a: number) => [number, number, number];
export const kglattice_energy_drift: (a: number) => [number, number, number];
export const kglattice_momentum: (a: number) => [number, number, number];
export const kglattice_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const kglattice_phi: (a: number) => [number, number];
export const kglattice_step: (a: number, b: number) => [number, number];
export const kglattice_time: (a: number) => number;
export const pendula_frequencies: (a: number) => [number, number];
export const pendula_motion: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const pendula_new: (a: number) => [number, number, number];
export const pendula_shape: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
