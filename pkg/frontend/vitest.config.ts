import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    testTimeout: 180_000,
    hookTimeout: 180_000,
    // One file at a time: the end-to-end file owns a live service process
    // and real runs are CPU-bound anyway.
    fileParallelism: false,
  },
});
