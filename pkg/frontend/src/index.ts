export * from "./types.js";
export * from "./api.js";
export * from "./encoding.js";
export * from "./state.js";
export * from "./controller.js";
export * from "./views/scatter.js";
export * from "./views/heatmap.js";
export * from "./views/bars.js";
export * from "./views/document.js";
