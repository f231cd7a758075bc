import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // every test shells out to the engine; one CPU, so keep runs serial
    fileParallelism: false,
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
