export { boundDecor, buildProjector, normMatch, projectSeparate } from "./decor.js";
export type { FloatBuffer, Projector } from "./decor.js";
export { headerPathFor, readEmbedding, writeEmbedding } from "./format.js";
export type { Embedding } from "./format.js";

/** Mirrors the core library's version. */
export const VERSION = "0.1.0";
