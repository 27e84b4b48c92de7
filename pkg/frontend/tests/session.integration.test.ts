/**
 * Scripted review session against a live, seeded review service.
 *
 * Boots the real Python service on a fixture workspace, then drives the
 * console's own api client and controller through 10 verdicts (two raters,
 * five items, one planned disagreement), checks /api/stats against the
 * hand-computed agreement (4 of 5 dual-verdict items match -> 80%), and
 * walks the deliberate stale-submission 409 recovery path.
 */
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { ReviewController } from "../src/state.js";

const PORT = 8900 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

let workspace: string;
let service: ChildProcess | undefined;

const SETUP = `
import json, pathlib, sys
sys.path.insert(0, "/root/pkg/tests")
from helpers import make_corpus
from figforge.bench import BenchmarkSpec, CurationStore, sample_candidates
from figforge.config import RunConfig, build_gateway
from figforge.forge import run_pipeline

root = pathlib.Path(sys.argv[1])
corpus = make_corpus(root / "corpus", n_articles=6)
config = RunConfig(
    corpus_dir=corpus, output_dir=root / "out", cache_dir=root / "cache",
    checkpoint_dir=root / "ckpt", seed=11,
).with_mock_defaults()
run_pipeline(corpus, config, gateway=build_gateway(config, mock=True))
pool = sample_candidates(root / "out" / "dataset.jsonl",
                         BenchmarkSpec(quota_per_category=5, seed=11), oversample=1.0)
CurationStore(root / "out" / "curation" / "events.jsonl").add_items(pool)
json.dump({"corpus_dir": "corpus", "output_dir": "out", "cache_dir": "cache",
           "checkpoint_dir": "ckpt"}, open(root / "config.json", "w"))
print("seeded", len(pool))
`;

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/api/stats`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("review service did not come up");
}

beforeAll(async () => {
  workspace = mkdtempSync(join(tmpdir(), "review-session-"));
  execFileSync("python3", ["-c", SETUP, workspace], { stdio: "pipe" });
  service = spawn(
    "figforge",
    ["review", "serve", "--config", "config.json", "--mock", "--port", String(PORT)],
    { cwd: workspace, stdio: "pipe" },
  );
  await waitForService();
});

afterAll(() => {
  service?.kill();
  rmSync(workspace, { recursive: true, force: true });
});

async function voteOn(controller: ReviewController, itemId: string,
                      decision: "accept" | "reject", withScores: boolean): Promise<void> {
  await controller.openItem(itemId);
  controller.setDecision(decision);
  if (withScores) {
    controller.setScore("correctness", 5);
    controller.setScore("completeness", 5);
    controller.setScore("clarity", 3);
  }
  const ok = await controller.submitVerdict();
  expect(ok).toBe(true);
}

describe("scripted review session", () => {
  it("completes 10 verdicts, matches the hand-computed agreement, and recovers from a 409", async () => {
    const alice = new ReviewController(new ReviewApi(BASE), "alice");
    const bob = new ReviewController(new ReviewApi(BASE), "bob");

    await alice.loadQueue();
    const textOnly = alice.state.queue
      .filter((entry) => entry.category === "text_only")
      .map((entry) => entry.item_id)
      .sort()
      .slice(0, 5);
    expect(textOnly).toHaveLength(5);

    // 5 verdicts from alice, 5 from bob; bob disagrees on the last item
    for (const itemId of textOnly) {
      await voteOn(alice, itemId, "accept", true);
    }
    await bob.loadQueue();
    for (const [index, itemId] of textOnly.entries()) {
      await voteOn(bob, itemId, index < 4 ? "accept" : "reject", index % 2 === 0);
    }

    // queue rule: neither rater sees the voted items any more
    await alice.loadQueue();
    const aliceRemaining = alice.state.queue.map((entry) => entry.item_id);
    for (const itemId of textOnly.slice(0, 4)) {
      expect(aliceRemaining).not.toContain(itemId);
    }

    // 4 matching dual-verdict items of 5 -> 80.0%, exactly as hand-computed
    await alice.loadStats();
    expect(alice.state.stats?.agreement_pct).toBeCloseTo(80.0, 9);
    expect(alice.state.stats?.per_state.accepted).toBe(4);
    expect(alice.state.stats?.per_state.conflict).toBe(1);
    expect(alice.state.stats?.ratings_report).not.toBeNull();

    // stale-submission recovery on the conflicted item
    const conflictId = textOnly[4]!;
    await alice.openItem(conflictId);
    expect(alice.state.item?.state).toBe("conflict");
    const staleRevision = alice.state.item!.revision;

    // a second browser resolves the conflict by revising first
    const outOfBand = new ReviewApi(BASE);
    await outOfBand.revise(conflictId, "bob", staleRevision);

    alice.setDecision("accept");
    const submitted = await alice.submitVerdict();
    expect(submitted).toBe(false);
    expect(alice.state.stalePrompt).toBe(true);

    await alice.reloadStaleItem();
    expect(alice.state.stalePrompt).toBe(false);
    expect(alice.state.item?.revision).toBe(staleRevision + 1);
    alice.setDecision("accept");
    const retried = await alice.submitVerdict();
    expect(retried).toBe(true);

    // the original first-two-verdict history still governs agreement
    await alice.loadStats();
    expect(alice.state.stats?.agreement_pct).toBeCloseTo(80.0, 9);
  });

  it("serves figure bytes and panel boxes for overlay rendering", async () => {
    const api = new ReviewApi(BASE);
    const queue = await api.queue("carol");
    const withFigure = queue.find((entry) => entry.category !== "text_only");
    expect(withFigure).toBeDefined();
    const detail = await api.item(withFigure!.item_id);
    expect(detail.figure).not.toBeNull();
    expect(detail.figure!.panels.length).toBeGreaterThanOrEqual(2);
    const image = await fetch(api.figureUrl(detail.figure!.image_url));
    expect(image.ok).toBe(true);
    const bytes = new Uint8Array(await image.arrayBuffer());
    expect(bytes.length).toBeGreaterThan(100);
  });
});
