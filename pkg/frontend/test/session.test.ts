import assert from "node:assert/strict";
import { test } from "node:test";

import type { MetricInfo } from "../src/api.js";
import { MemoryDraftStore, ReviewSession } from "../src/session.js";

const METRICS: MetricInfo[] = Array.from({ length: 10 }, (_, i) => ({
  id: `m${i + 1}`,
  label: `Metric ${i + 1}`,
  description: `description ${i + 1}`,
}));

function openSession(drafts = new MemoryDraftStore()): ReviewSession {
  const session = new ReviewSession("alice", METRICS, ["case-001", "case-002"], drafts);
  session.open("case-001", "model-x");
  return session;
}

test("requires exactly ten metrics", () => {
  assert.throws(() => new ReviewSession("alice", METRICS.slice(0, 9)));
});

test("all toggles start unset and block submission", () => {
  const session = openSession();
  assert.equal(session.complete, false);
  assert.equal(session.unsetMetrics.length, 10);
  assert.throws(() => session.buildSubmission(), /submission blocked/);
});

test("submission carries exactly the toggles the rater set", () => {
  const session = openSession();
  for (const metric of METRICS) {
    session.set(metric.id, metric.id === "m7" ? 0 : 1);
  }
  assert.equal(session.complete, true);
  const body = session.buildSubmission();
  assert.equal(body.rater_id, "alice");
  assert.equal(body.model_id, "model-x");
  assert.deepEqual(body.scores, {
    m1: 1, m2: 1, m3: 1, m4: 1, m5: 1, m6: 1, m7: 0, m8: 1, m9: 1, m10: 1,
  });
  assert.equal(body.notes, undefined);
});

test("nine of ten set keeps submission blocked", () => {
  const session = openSession();
  METRICS.slice(0, 9).forEach((m) => session.set(m.id, 1));
  assert.equal(session.complete, false);
  assert.deepEqual(session.unsetMetrics, ["m10"]);
  assert.throws(() => session.buildSubmission());
});

test("digit cycle walks unset -> 1 -> 0 -> unset", () => {
  const session = openSession();
  assert.equal(session.cycle("m1"), 1);
  assert.equal(session.cycle("m1"), 0);
  assert.equal(session.cycle("m1"), null);
});

test("notes ride along when present", () => {
  const session = openSession();
  METRICS.forEach((m) => session.set(m.id, 1));
  session.setNote("m5", "marker slightly off");
  assert.deepEqual(session.buildSubmission().notes, { m5: "marker slightly off" });
});

test("drafts survive a reopen (network-failure path)", () => {
  const drafts = new MemoryDraftStore();
  const first = openSession(drafts);
  first.set("m1", 1);
  first.set("m2", 0);

  const retry = new ReviewSession("alice", METRICS, ["case-001"], drafts);
  retry.open("case-001", "model-x");
  assert.equal(retry.state("m1"), 1);
  assert.equal(retry.state("m2"), 0);
  assert.equal(retry.state("m3"), null);
  assert.notEqual(retry.keepDraftForRetry(), null);
});

test("successful submit clears the draft and advances", () => {
  const drafts = new MemoryDraftStore();
  const session = new ReviewSession("alice", METRICS, ["case-001", "case-002"], drafts);
  session.open("case-001", "model-x");
  METRICS.forEach((m) => session.set(m.id, 1));
  const next = session.markSubmitted();
  assert.equal(next, "case-002");
  const reopened = new ReviewSession("alice", METRICS, [], drafts);
  reopened.open("case-001", "model-x");
  assert.equal(reopened.state("m1"), null);
});

test("drafts are scoped per rater, case and model", () => {
  const drafts = new MemoryDraftStore();
  const alice = new ReviewSession("alice", METRICS, [], drafts);
  alice.open("case-001", "model-x");
  alice.set("m1", 0);
  const bob = new ReviewSession("bob", METRICS, [], drafts);
  bob.open("case-001", "model-x");
  assert.equal(bob.state("m1"), null);
});

test("unknown metric rejected", () => {
  const session = openSession();
  assert.throws(() => session.set("m11", 1), /unknown metric/);
});
