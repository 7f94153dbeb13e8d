import assert from 'node:assert/strict';
import test from 'node:test';

import { AssessmentResponse } from '../src/api.js';
import { concatenated, formatSimilarity, formatTopPercent, spanViews } from '../src/render.js';

const canned: AssessmentResponse = {
  attempt_id: 1,
  transcript: '요일 날 여기다 청소하기 싫어 귀찮아',
  reference_text: '둘 다 청소하기 싫어 귀찮아',
  similarity: 0.8123,
  level: 'Advanced',
  top_percent: 33.3,
  diff: {
    reference_spans: [
      { text: '둘', flag: 'mispronounced' },
      { text: ' 다 청소하기 싫어 귀찮아', flag: 'ok' },
    ],
    hypothesis_spans: [
      { text: '요일', flag: 'extra' },
      { text: ' 날', flag: 'mispronounced' },
      { text: ' 여기', flag: 'extra' },
      { text: '다 청소하기 싫어 귀찮아', flag: 'ok' },
    ],
  },
};

test('exactly the non-ok spans are marked red', () => {
  const reference = spanViews(canned.diff.reference_spans);
  assert.deepEqual(reference.map((v) => v.red), [true, false]);
  const hypothesis = spanViews(canned.diff.hypothesis_spans);
  assert.deepEqual(hypothesis.map((v) => v.red), [true, true, true, false]);
});

test('concatenated span text reproduces the response strings', () => {
  assert.equal(
    concatenated(spanViews(canned.diff.reference_spans)),
    canned.reference_text,
  );
  assert.equal(
    concatenated(spanViews(canned.diff.hypothesis_spans)),
    canned.transcript,
  );
});

test('all-ok diff renders without any red', () => {
  const views = spanViews([{ text: '안녕하세요', flag: 'ok' }]);
  assert.ok(views.every((v) => !v.red));
});

test('missing and extra flags are red too', () => {
  const views = spanViews([
    { text: 'ㅁ', flag: 'missing' },
    { text: 'ㅂ', flag: 'extra' },
  ]);
  assert.deepEqual(views.map((v) => v.red), [true, true]);
});

test('score and rank formatting', () => {
  assert.equal(formatSimilarity(0.8123), '0.81');
  assert.equal(formatSimilarity(0.95), '0.95');
  assert.equal(formatTopPercent(33.3), 'top 33.3%');
});
