import { ApiClient, SentenceSummary } from './api.js';
import { MicRecorder, PermissionDenied } from './recorder.js';
import { renderResult } from './render.js';
import { PracticeSession } from './session.js';

const api = new ApiClient();
const session = new PracticeSession(api, new MicRecorder());

const sentenceList = document.getElementById('sentence-list') as HTMLElement;
const selectedText = document.getElementById('selected-text') as HTMLElement;
const recordButton = document.getElementById('record') as HTMLButtonElement;
const submitButton = document.getElementById('submit') as HTMLButtonElement;
const retryButton = document.getElementById('retry') as HTMLButtonElement;
const statusLine = document.getElementById('status') as HTMLElement;
const errorBanner = document.getElementById('error') as HTMLElement;
const resultCard = document.getElementById('result') as HTMLElement;

function refresh(): void {
  selectedText.textContent = session.sentence ? session.sentence.text : '문장을 선택하세요';
  recordButton.disabled = session.sentence === null || session.state === 'submitting'
    || session.state === 'result';
  recordButton.textContent = session.state === 'recording' ? '■ 녹음 끝내기' : '● 녹음';
  submitButton.disabled = !session.canSubmit();
  retryButton.hidden = session.state !== 'result';
  resultCard.hidden = session.result === null;
  errorBanner.hidden = session.error === null;
  errorBanner.textContent = session.error ?? '';
  statusLine.textContent = {
    idle: session.recording ? '녹음 완료, 제출할 수 있어요' : '준비됨',
    recording: '녹음 중…',
    submitting: '평가 중…',
    result: '결과',
  }[session.state];
  if (session.result) {
    renderResult(resultCard, session.result);
  }
}

async function toggleRecording(): Promise<void> {
  try {
    if (session.state === 'recording') {
      await session.stopRecording();
    } else {
      await session.startRecording(() => refresh());
    }
  } catch (err) {
    session.error = err instanceof PermissionDenied
      ? '마이크 권한이 필요합니다.'
      : `녹음 실패: ${err}`;
  }
  refresh();
}

async function submit(): Promise<void> {
  refresh();
  await session.submit();
  refresh();
}

recordButton.addEventListener('click', () => void toggleRecording());
submitButton.addEventListener('click', () => void submit());
retryButton.addEventListener('click', () => {
  session.retry();
  refresh();
});

async function loadSentences(): Promise<void> {
  const sentences = await api.listSentences();
  sentenceList.replaceChildren();
  sentences.forEach((sentence: SentenceSummary) => {
    const button = document.createElement('button');
    button.className = 'sentence';
    button.textContent = sentence.text;
    button.addEventListener('click', () => {
      if (session.state === 'result') {
        session.retry();
      }
      session.selectSentence(sentence);
      refresh();
    });
    sentenceList.appendChild(button);
  });
}

void loadSentences().then(refresh);
