// Typed client for the assessment service JSON API.

export type SpanFlag = 'ok' | 'mispronounced' | 'missing' | 'extra';

export interface DiffSpan {
  text: string;
  flag: SpanFlag;
}

export interface AssessmentResponse {
  attempt_id: number;
  transcript: string;
  reference_text: string;
  similarity: number;
  level: string;
  top_percent: number;
  diff: {
    reference_spans: DiffSpan[];
    hypothesis_spans: DiffSpan[];
  };
}

export interface SentenceSummary {
  sentence_id: string;
  text: string;
}

export interface LeaderboardRow {
  user_id: string;
  sentence_id: string;
  similarity: number;
  level: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

function friendlyMessage(status: number, detail: string): string {
  switch (status) {
    case 400:
      return 'The recording could not be read. Please record again.';
    case 404:
      return 'That sentence is not in the catalog any more.';
    case 422:
      return 'No speech was recognized in the recording.';
    case 502:
      return 'Speech service unavailable, try again.';
    default:
      return detail || `Request failed (${status})`;
  }
}

export class ApiClient {
  constructor(private readonly baseUrl = '') {}

  private async checked<T>(res: Response): Promise<T> {
    if (!res.ok) {
      let detail = '';
      try {
        detail = (await res.json()).detail ?? '';
      } catch {
        // non-JSON error body; the status is enough
      }
      throw new ApiError(res.status, friendlyMessage(res.status, detail));
    }
    return (await res.json()) as T;
  }

  async listSentences(): Promise<SentenceSummary[]> {
    return this.checked(await fetch(`${this.baseUrl}/api/sentences`));
  }

  async leaderboard(n = 10): Promise<LeaderboardRow[]> {
    return this.checked(await fetch(`${this.baseUrl}/api/leaderboard?n=${n}`));
  }

  async submitAttempt(
    userId: string,
    sentenceId: string,
    wav: Uint8Array,
  ): Promise<AssessmentResponse> {
    const form = new FormData();
    form.append('audio', new Blob([wav as BlobPart], { type: 'audio/wav' }), 'attempt.wav');
    form.append('user_id', userId);
    form.append('sentence_id', sentenceId);
    return this.checked(
      await fetch(`${this.baseUrl}/api/attempts`, { method: 'POST', body: form }),
    );
  }
}
