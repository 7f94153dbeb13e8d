// Result rendering. Flags arrive from the server and are displayed
// verbatim; the client never recomputes alignment.

import { AssessmentResponse, DiffSpan } from './api.js';

export interface SpanView {
  text: string;
  red: boolean;
}

export function spanViews(spans: DiffSpan[]): SpanView[] {
  return spans.map((span) => ({ text: span.text, red: span.flag !== 'ok' }));
}

export function concatenated(views: SpanView[]): string {
  return views.map((view) => view.text).join('');
}

export function formatSimilarity(similarity: number): string {
  return similarity.toFixed(2);
}

export function formatTopPercent(topPercent: number): string {
  return `top ${topPercent}%`;
}

function spanLine(target: HTMLElement, views: SpanView[]): void {
  target.replaceChildren();
  for (const view of views) {
    const el = document.createElement('span');
    el.textContent = view.text;
    if (view.red) {
      el.classList.add('red');
    }
    target.appendChild(el);
  }
}

export function renderResult(root: HTMLElement, response: AssessmentResponse): void {
  const reference = root.querySelector<HTMLElement>('.reference-line')!;
  const hypothesis = root.querySelector<HTMLElement>('.hypothesis-line')!;
  spanLine(reference, spanViews(response.diff.reference_spans));
  spanLine(hypothesis, spanViews(response.diff.hypothesis_spans));
  root.querySelector<HTMLElement>('.similarity')!.textContent = formatSimilarity(
    response.similarity,
  );
  const badge = root.querySelector<HTMLElement>('.level-badge')!;
  badge.textContent = response.level;
  badge.dataset.level = response.level;
  root.querySelector<HTMLElement>('.top-percent')!.textContent = formatTopPercent(
    response.top_percent,
  );
}
