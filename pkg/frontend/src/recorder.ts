// Microphone capture. MediaRecorder would hand us opus/webm, which the
// service does not accept, so raw PCM is tapped from an AudioContext
// and encoded to canonical WAV on the client.

import { toCanonicalWav } from './wav.js';

export const MAX_RECORDING_SECONDS = 15;

export interface Recorder {
  start(onAutoStop?: () => void): Promise<void>;
  stop(): Promise<Uint8Array>;
  isRecording(): boolean;
}

export class PermissionDenied extends Error {}

export class MicRecorder implements Recorder {
  private stream: MediaStream | null = null;
  private context: AudioContext | null = null;
  private processor: ScriptProcessorNode | null = null;
  private chunks: Float32Array[] = [];
  private capTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped: Promise<Uint8Array> | null = null;
  private finish: ((wav: Uint8Array) => void) | null = null;

  isRecording(): boolean {
    return this.context !== null;
  }

  async start(onAutoStop?: () => void): Promise<void> {
    if (this.isRecording()) {
      throw new Error('already recording');
    }
    try {
      this.stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    } catch (err) {
      throw new PermissionDenied(`microphone unavailable: ${err}`);
    }
    this.context = new AudioContext();
    const source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    this.chunks = [];
    this.processor.onaudioprocess = (event) => {
      this.chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
    };
    source.connect(this.processor);
    this.processor.connect(this.context.destination);
    this.stopped = new Promise((resolve) => {
      this.finish = resolve;
    });
    this.capTimer = setTimeout(() => {
      void this.stop();
      onAutoStop?.();
    }, MAX_RECORDING_SECONDS * 1000);
  }

  async stop(): Promise<Uint8Array> {
    if (!this.context || !this.stopped) {
      throw new Error('not recording');
    }
    if (this.capTimer) {
      clearTimeout(this.capTimer);
      this.capTimer = null;
    }
    const sourceRate = this.context.sampleRate;
    this.processor?.disconnect();
    this.stream?.getTracks().forEach((track) => track.stop());
    await this.context.close();

    const total = this.chunks.reduce((n, c) => n + c.length, 0);
    const samples = new Float32Array(total);
    let offset = 0;
    for (const chunk of this.chunks) {
      samples.set(chunk, offset);
      offset += chunk.length;
    }
    const wav = toCanonicalWav(samples, sourceRate);
    this.finish?.(wav);
    this.context = null;
    this.processor = null;
    this.stream = null;
    this.chunks = [];
    return wav;
  }
}
