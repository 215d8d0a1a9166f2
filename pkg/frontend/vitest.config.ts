import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // the integration spec boots the real service, which needs generous room
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
