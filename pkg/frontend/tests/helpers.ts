// Test support: fixture loading and canned transports. Fixtures are real
// responses captured from a running server over a small synthetic project.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { Transport } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  const path = join(here, "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export interface Exchange {
  method: string;
  path: string;
  body?: unknown;
}

export type Route = unknown | ((body: unknown) => unknown);

/**
 * Transport answering from a routing table keyed by "METHOD path". Route
 * values are payloads or functions of the request body; thrown errors
 * propagate as rejections. Every exchange is logged for assertions.
 */
export function cannedTransport(routes: Record<string, Route>): {
  transport: Transport;
  log: Exchange[];
} {
  const log: Exchange[] = [];
  const transport: Transport = async (method, path, body) => {
    log.push(body === undefined ? { method, path } : { method, path, body });
    const key = `${method} ${path}`;
    if (!(key in routes)) {
      throw new Error(`no canned route for ${key}`);
    }
    const route = routes[key];
    return typeof route === "function" ? (route as (b: unknown) => unknown)(body) : route;
  };
  return { transport, log };
}

export function deferred<T>(): {
  promise: Promise<T>;
  resolve: (value: T) => void;
} {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}
