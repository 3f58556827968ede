import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["tests/service-setup.ts"],
    environment: "node",
    // undici's fetch can stall inside worker threads; run tests in processes
    pool: "forks",
    testTimeout: 120_000,
    hookTimeout: 60_000,
    // e2e suites drive one shared service process; keep files sequential
    fileParallelism: false,
  },
});
