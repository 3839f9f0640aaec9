import { defineConfig } from "vitest/config";

export default defineConfig({
  base: "./",
  server: {
    proxy: {
      // dev server forwards API calls to a locally running service
      "/corpora": "http://127.0.0.1:8400",
      "/models": "http://127.0.0.1:8400",
      "/jobs": "http://127.0.0.1:8400",
      "/trained": "http://127.0.0.1:8400",
      "/phrases": "http://127.0.0.1:8400",
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
