// Practice-loop state machine: pick a sentence, record, submit, view
// the result, retry. Kept free of DOM access so it can be exercised
// headless against a real service.

import { ApiError, AssessmentResponse, SentenceSummary } from './api.js';
import { Recorder } from './recorder.js';

export type SessionState = 'idle' | 'recording' | 'submitting' | 'result';

export interface AttemptApi {
  submitAttempt(
    userId: string,
    sentenceId: string,
    wav: Uint8Array,
  ): Promise<AssessmentResponse>;
}

export class PracticeSession {
  state: SessionState = 'idle';
  sentence: SentenceSummary | null = null;
  recording: Uint8Array | null = null;
  result: AssessmentResponse | null = null;
  error: string | null = null;
  history: AssessmentResponse[] = [];

  constructor(
    private readonly api: AttemptApi,
    private readonly recorder: Recorder,
    public userId = 'learner',
  ) {}

  selectSentence(sentence: SentenceSummary): void {
    if (this.state === 'recording' || this.state === 'submitting') {
      throw new Error(`cannot change sentence while ${this.state}`);
    }
    this.sentence = sentence;
    this.recording = null;
    this.result = null;
    this.error = null;
    this.state = 'idle';
  }

  async startRecording(onAutoStop?: () => void): Promise<void> {
    if (this.state !== 'idle' || !this.sentence) {
      throw new Error('can only record from idle with a sentence selected');
    }
    this.error = null;
    await this.recorder.start(onAutoStop);
    this.state = 'recording';
  }

  async stopRecording(): Promise<void> {
    if (this.state !== 'recording') {
      throw new Error('not recording');
    }
    this.recording = await this.recorder.stop();
    this.state = 'idle';
  }

  canSubmit(): boolean {
    return this.state === 'idle' && this.recording !== null && this.sentence !== null;
  }

  async submit(): Promise<void> {
    if (!this.canSubmit()) {
      throw new Error('submit needs a completed recording'); // single in-flight
    }
    this.state = 'submitting';
    this.error = null;
    try {
      const response = await this.api.submitAttempt(
        this.userId,
        this.sentence!.sentence_id,
        this.recording!,
      );
      this.result = response;
      this.history.push(response);
      this.state = 'result';
    } catch (err) {
      this.state = 'idle';
      if (err instanceof ApiError) {
        this.error = err.message;
        if (err.status !== 502) {
          this.recording = null; // unusable recording; 502 keeps it for resubmit
        }
      } else {
        this.error = `network error: ${err}`;
      }
    }
  }

  retry(): void {
    if (this.state !== 'result') {
      throw new Error('retry only applies to a result');
    }
    this.result = null;
    this.recording = null;
    this.error = null;
    this.state = 'idle'; // sentence is kept
  }
}
