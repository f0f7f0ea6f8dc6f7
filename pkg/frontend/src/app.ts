// Entry point: collect a participant id, create a session (the server picks
// the study and randomizes the plan), and hand off to the matching flow.
// Resuming after a refresh only needs the session id and token, which are
// kept in sessionStorage; the server decides which task comes next.

import { SessionInfo, StudyClient } from './api.js';
import { runPairwiseFlow } from './pairwise.js';
import { runRatingFlow } from './rating.js';
import { el } from './views.js';

const SESSION_KEY = 'recourse-survey-session';

function savedSession(): SessionInfo | null {
  const raw = sessionStorage.getItem(SESSION_KEY);
  return raw ? (JSON.parse(raw) as SessionInfo) : null;
}

async function startFlow(root: HTMLElement, client: StudyClient, session: SessionInfo) {
  sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
  if (session.study === 'pairwise') {
    await runPairwiseFlow(root, client, session);
  } else {
    await runRatingFlow(root, client, session);
  }
  sessionStorage.removeItem(SESSION_KEY);
}

export function mountApp(root: HTMLElement, baseUrl: string): void {
  const client = new StudyClient(baseUrl);
  const resumed = savedSession();
  if (resumed) {
    void startFlow(root, client, resumed);
    return;
  }

  const form = el('form', 'signup');
  form.appendChild(el('h1', undefined, 'Explanation study'));
  const input = document.createElement('input');
  input.name = 'participant';
  input.placeholder = 'Participant id';
  input.required = true;
  form.appendChild(input);
  const button = el('button', 'begin', 'Begin');
  form.appendChild(button);
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    if (!input.value.trim()) return;
    button.disabled = true;
    try {
      const session = await client.createSession({ participant: input.value.trim() });
      await startFlow(root, client, session);
    } catch (error) {
      button.disabled = false;
      form.appendChild(el('p', 'error', `Could not start: ${(error as Error).message}`));
    }
  });
  root.replaceChildren(form);
}

declare global {
  interface Window {
    RECOURSE_BASE_URL?: string;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mountApp(
    document.getElementById('app') as HTMLElement,
    window.RECOURSE_BASE_URL ?? '',
  );
}
